"""Relying-party simulator: registration, challenge/response checks, clone flags."""

import enum
import random
from dataclasses import dataclass

from . import group, wire
from .errors import DecodeError, InvalidSignature


class Verdict(enum.Enum):
    ACCEPT = "Accept"
    REJECT_SIG = "RejectSig"
    REJECT_COUNTER = "RejectCounter"


@dataclass
class AccountRecord:
    app_id: str
    key_handle: bytes
    pk: group.Point
    last_counter: int = 0
    clone_flag: bool = False


class RelyingParty:
    def __init__(self, origin, rng=None):
        self.origin = origin
        self.app_hash = wire.app_id_hash(origin)
        self.rng = rng or random.SystemRandom()
        self.accounts = []

    def new_challenge(self):
        return self.rng.getrandbits(256).to_bytes(32, "big")

    def chal(self, challenge):
        return wire.client_data_hash(challenge, self.origin)

    def rp_register(self, response, challenge):
        """Check the attestation signature and store a new account.

        The attestation key itself is not validated against any chain.
        """
        if isinstance(response, (bytes, bytearray)):
            response = wire.U2fRegistrationResponse.from_bytes(response)
        if len(response.key_handle) != wire.KEY_HANDLE_LEN:
            raise DecodeError("key handle must be 32 bytes")
        if not group.ecdsa_verify(response.cert.pk, self.app_hash + self.chal(challenge), response.sig):
            raise InvalidSignature("attestation signature does not verify")
        record = AccountRecord(self.origin, bytes(response.key_handle), response.pk)
        self.accounts.append(record)
        return record

    def rp_authenticate(self, record, response, challenge, require_presence=True):
        try:
            if isinstance(response, (bytes, bytearray)):
                response = wire.U2fAuthenticationResponse.from_bytes(response)
        except DecodeError:
            return Verdict.REJECT_SIG
        if require_presence and response.presence != 1:
            return Verdict.REJECT_SIG
        m = wire.signed_message(
            response.presence, self.app_hash, self.chal(challenge), record.key_handle, response.counter
        )
        if not group.ecdsa_verify(record.pk, m, response.sig):
            return Verdict.REJECT_SIG
        if response.counter <= record.last_counter:
            record.clone_flag = True
            return Verdict.REJECT_COUNTER
        record.last_counter = response.counter
        return Verdict.ACCEPT


def fingerprint_probe(observations):
    """Share of cross-site windows whose counters run ``c, c+1, c+2``.

    ``observations`` is a time-ordered sequence of ``(site, counter)`` pairs
    pooled by colluding sites. Every three consecutive observations that
    involve at least two sites form a window. Returns ``None`` when there is
    nothing to correlate.
    """
    obs = list(observations)
    if len({site for site, _ in obs}) < 2:
        return None
    windows = hits = 0
    for a, b, c in zip(obs, obs[1:], obs[2:]):
        if len({a[0], b[0], c[0]}) < 2:
            continue
        windows += 1
        hits += b[1] == a[1] + 1 and c[1] == a[1] + 2
    return hits / windows if windows else None
