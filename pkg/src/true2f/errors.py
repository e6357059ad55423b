"""Exception hierarchy shared by every endpoint."""


class True2FError(Exception):
    """Base class for all errors raised by this package."""


class ProtocolOrderError(True2FError):
    """A state machine received a message it cannot accept in its current phase."""


class ProtocolAbort(True2FError):
    """A cryptographic check failed; the protocol outputs failure."""

    def __init__(self, reason, detail=""):
        self.reason = reason
        self.detail = detail
        super().__init__(f"{reason}: {detail}" if detail else str(reason))


class KeygenAbort(ProtocolAbort):
    """The token rejected the browser's commitment opening."""

    def __init__(self, detail="commitment mismatch"):
        super().__init__("KeygenAbort", detail)


class TokenFailure(ProtocolAbort):
    """The browser caught the token misbehaving. The token is now disabled."""


class TokenDisabled(True2FError):
    """The browser refuses to talk to a token that failed once before."""


class UnknownIdentity(True2FError):
    """No registered key for this (appID, key handle) pair."""


class InvalidSignature(True2FError):
    pass


class NonceRejected(True2FError):
    """ECDSA signing produced c = 0 or s = 0 for the given nonce."""


class BadHints(True2FError):
    """Square-root hints for hash-to-point do not check out."""


class BadMac(True2FError):
    """A VRF cache triple carried a tag that does not verify."""


class CounterExhausted(True2FError):
    """The flash erase budget is used up; the counter cannot advance."""


class FlashViolation(True2FError):
    """An operation broke a NOR flash hardware constraint."""


class PowerLoss(True2FError):
    """Raised by the flash simulator at an injected crash point."""


class DecodeError(True2FError, ValueError):
    """Malformed bytes on the wire or in a stored blob."""


class SyncImportError(DecodeError):
    """A sync-state blob is corrupt; nothing was imported."""


class SimulatorAbort(True2FError):
    """The keygen simulator saw the adversary open to two different values."""


class SimulatorInapplicable(True2FError):
    """The adversary makes the honest token abort, outside the simulator's scope."""
