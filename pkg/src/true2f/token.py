"""The simulated hardware token and the byte channel the browser talks through.

The token speaks only wire frames: :meth:`Token.handle` takes one encoded
frame and returns one. Protocol state between frames lives on the token.
Subclasses in :mod:`true2f.adversary` override the ``_``-free hook methods
to misbehave.
"""

import enum
import functools
import hashlib
import hmac

from . import group, instrument, keygen, vif, vrf, wire
from .counter import CounterStore
from .errors import (
    BadHints,
    CounterExhausted,
    DecodeError,
    KeygenAbort,
    NonceRejected,
    ProtocolOrderError,
)
from .firewall import Signer
from .flash import ERASE_BUDGET


class Phase(enum.Enum):
    UNINITIALIZED = "uninitialized"
    READY = "ready"
    FAILED = "failed"


def mac(key, ident, y):
    return hmac.new(key, ident + group.scalar_to_bytes(y), hashlib.sha256).digest()


class Token:
    def __init__(self, rng=None, counter_factory=None, erase_budget=ERASE_BUDGET):
        self.rng = rng or group.default_rng()
        self.counter_factory = counter_factory or functools.partial(CounterStore.create, erase_budget=erase_budget)
        self.phase = Phase.UNINITIALIZED
        self.msk = None
        self.mac_key = None
        self.counter = None
        self._keygen = None
        self._shares = []
        self._signer = None

    # --- frame dispatch -------------------------------------------------------

    def handle(self, data):
        with instrument.endpoint("token"):
            return self._reply(data).to_bytes()

    def _reply(self, data):
        if self.phase is Phase.FAILED:
            return wire.ErrorMsg(wire.ERR_FAILED)
        try:
            msg = wire.decode_frame(data)
        except DecodeError:
            return wire.ErrorMsg(wire.ERR_DECODE)
        handler = self._handlers.get(type(msg))
        if handler is None:
            return wire.ErrorMsg(wire.ERR_ORDER)
        try:
            return handler(self, msg)
        except ProtocolOrderError:
            self._signer = None
            return wire.ErrorMsg(wire.ERR_ORDER)
        except KeygenAbort:
            self._signer = None
            return wire.ErrorMsg(wire.ERR_KEYGEN)
        except BadHints:
            return wire.ErrorMsg(wire.ERR_HINTS)
        except CounterExhausted:
            self.phase = Phase.FAILED
            return wire.ErrorMsg(wire.ERR_EXHAUSTED)

    def _require(self, phase):
        if self.phase is not phase:
            raise ProtocolOrderError(f"token is {self.phase.value}")

    # --- initialization -------------------------------------------------------

    def _on_keygen_commit(self, msg):
        self._require(Phase.UNINITIALIZED)
        if self._keygen is not None:
            raise ProtocolOrderError("keygen already in progress")
        self._keygen = self.keygen_respond(msg.c)
        return wire.KeygenShare(self._keygen.V_share)

    def _on_keygen_open(self, msg):
        self._require(Phase.UNINITIALIZED)
        if self._keygen is None:
            raise ProtocolOrderError("no keygen in progress")
        st, self._keygen = self._keygen, None
        try:
            self._shares.append(self.keygen_finish(st, msg.v, msg.r))
        except KeygenAbort:
            self._shares = []
            raise
        if len(self._shares) == 2:
            self._finish_init(*self._shares)
        return wire.KeygenDone()

    def keygen_respond(self, c):
        return keygen.KeygenTokenState(c, self.rng)

    def keygen_finish(self, st, v, r):
        return st.finish(v, r)

    def _finish_init(self, x, sk_vrf):
        self.msk = vif.VifMasterKeypair(x, group.base_mult(x), vrf.VrfKeypair(sk_vrf, group.base_mult(sk_vrf)))
        self.mac_key = self.rng.getrandbits(256).to_bytes(32, "big")
        self.counter = self.counter_factory()
        self._shares = []
        self.phase = Phase.READY

    # --- registration ---------------------------------------------------------

    def _on_register(self, msg):
        self._require(Phase.READY)
        pk, proof = self.register(msg.ident, msg.hints)
        return wire.RegisterResponse(pk, proof, mac(self.mac_key, msg.ident, proof.y))

    def register(self, ident, hints):
        key = vif.vif_eval(self.msk, ident, hints)
        return key.pk, key.proof

    # --- authentication -------------------------------------------------------

    def _on_auth(self, msg):
        self._require(Phase.READY)
        self._signer = None
        if not hmac.compare_digest(msg.tag, mac(self.mac_key, msg.ident, msg.y)):
            return wire.ErrorMsg(wire.ERR_MAC)
        if msg.y == 0:
            return wire.ErrorMsg(wire.ERR_MAC)
        n = self.increment(msg.app + msg.ident)
        key = vif.vif_eval_cached(self.msk.x, msg.ident, msg.y, self.msk.X)
        m = wire.signed_message(msg.presence, msg.app, msg.chal, msg.ident, n)
        self._signer = self.make_signer(key.sk, m)
        return wire.SignShare(self._signer.respond(msg.c))

    def increment(self, key):
        return self.counter.inc(key)

    def make_signer(self, sk, m):
        return Signer(sk, m, self.rng)

    def _on_sign_open(self, msg):
        if self._signer is None:
            raise ProtocolOrderError("no signing session")
        try:
            sig = self._signer.finish(msg.v, msg.r)
        except NonceRejected:
            return wire.NonceRejectedMsg()
        self._signer = None
        return wire.SignatureMsg(sig)

    def _on_sign_restart(self, msg):
        if self._signer is None:
            raise ProtocolOrderError("no signing session")
        return wire.SignShare(self._signer.respond(msg.c))

    _handlers = {
        wire.KeygenCommit: _on_keygen_commit,
        wire.KeygenOpen: _on_keygen_open,
        wire.RegisterRequest: _on_register,
        wire.AuthRequest: _on_auth,
        wire.SignOpen: _on_sign_open,
        wire.SignRestart: _on_sign_restart,
    }


class Channel:
    """Carries frames to a token and keeps a log of every byte in both directions."""

    def __init__(self, token):
        self.token = token
        self.log = []

    def send(self, msg):
        data = msg.to_bytes()
        self.log.append(("to_token", data))
        reply = self.token.handle(data)
        self.log.append(("from_token", reply))
        return wire.decode_frame(reply)

    @property
    def bytes_to_token(self):
        return sum(len(d) for direction, d in self.log if direction == "to_token")

    @property
    def frames(self):
        return len(self.log)
