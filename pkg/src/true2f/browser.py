"""The auditing browser endpoint.

The browser holds the master public key, one record per registered
identity and its own replica of the token's counters. It checks every
answer the token gives. After the first failed check it disables the token
for good: later requests raise :class:`TokenDisabled` without sending a byte.
"""

import hashlib
import warnings
from dataclasses import dataclass

from . import group, instrument, keygen, vif, vrf, wire
from .counter import CounterStore
from .errors import ProtocolAbort, TokenDisabled, TokenFailure, UnknownIdentity
from .firewall import Firewall
from .flash import ERASE_BUDGET
from .group import Point

REGISTRATION_WARNING_AT = 100


@dataclass(frozen=True)
class IdentityRecord:
    """What the browser keeps per (appID, key handle): ``pk = X^y`` and the token's tag."""

    y: int
    tag: bytes
    pk: Point


@dataclass(frozen=True)
class RegistrationResult:
    ident: bytes
    pk: Point
    pk_att: Point
    sig_att: group.EcdsaSignature
    response: wire.U2fRegistrationResponse


@dataclass(frozen=True)
class AuthResult:
    sig: group.EcdsaSignature
    counter: int
    response: wire.U2fAuthenticationResponse


def record_key(app_hash, ident):
    return hashlib.sha256(app_hash + ident).digest()


class Browser:
    def __init__(self, channel, rng=None, counter=None, erase_budget=ERASE_BUDGET,
                 warn_at=REGISTRATION_WARNING_AT):
        self.channel = channel
        self.rng = rng or group.default_rng()
        self.counter = counter if counter is not None else CounterStore.create(erase_budget=erase_budget)
        self.warn_at = warn_at
        self.mpk = None
        self.records = {}
        self.token_failed = False
        self.registration_count = 0
        self.aborts = []

    # --- failure policy -----------------------------------------------------

    def _guard(self):
        if self.token_failed:
            raise TokenDisabled("token failed a check earlier and is disabled")

    def _fail(self, reason, detail=""):
        self.token_failed = True
        self.aborts.append(reason)
        raise TokenFailure(reason, detail)

    def _expect(self, reply, cls):
        if not isinstance(reply, cls):
            code = getattr(reply, "code", None)
            self._fail("UnexpectedReply", f"wanted {cls.__name__}, got {type(reply).__name__} {code or ''}".strip())
        return reply

    def _send(self, msg):
        try:
            return self.channel.send(msg)
        except wire.DecodeError as exc:
            self._fail("MalformedReply", str(exc))

    # --- initialization -----------------------------------------------------

    def initialize(self):
        self._guard()
        with instrument.endpoint("browser"):
            keys = [self._keygen_run() for _ in range(2)]
        self.mpk = vif.MasterPublicKey(*keys)
        return self.mpk

    def _keygen_run(self):
        st = keygen.KeygenBrowserState(self.rng)
        share = self._expect(self._send(wire.KeygenCommit(st.c)), wire.KeygenShare)
        X, (v, r) = st.open(share.point)
        self._expect(self._send(wire.KeygenOpen(v, r)), wire.KeygenDone)
        return X

    # --- registration -------------------------------------------------------

    def register(self, app_id, chal):
        self._guard()
        with instrument.endpoint("browser"):
            return self._register(wire.app_id_hash(app_id), chal)

    def _register(self, app_hash, chal):
        ident = self.rng.getrandbits(256).to_bytes(32, "big")
        hints = vrf.make_sqrt_hints(ident)
        reply = self._expect(self._send(wire.RegisterRequest(ident, hints)), wire.RegisterResponse)
        if not vif.vif_verify(self.mpk, ident, reply.pk, reply.proof):
            self._fail("VifVerify", "token's identity key does not match the master public key")
        self.records[record_key(app_hash, ident)] = IdentityRecord(reply.proof.y, reply.tag, reply.pk)

        sk_att, pk_att = group.ecdsa_keygen(self.rng)
        cert = wire.AttestationCert(pk_att, self._sign(sk_att, pk_att.to_bytes(False)))
        sig_att = self._sign(sk_att, app_hash + chal)
        self.registration_count += 1
        if self.registration_count == self.warn_at:
            warnings.warn(
                f"{self.registration_count} registrations: further identities may share counter state",
                RuntimeWarning,
                stacklevel=3,
            )
        response = wire.U2fRegistrationResponse(reply.pk, ident, cert, sig_att)
        return RegistrationResult(ident, reply.pk, pk_att, sig_att, response)

    def _sign(self, sk, m):
        while True:
            try:
                return group.ecdsa_sign(sk, m, group.random_scalar(self.rng))
            except group.NonceRejected:
                continue

    # --- authentication -----------------------------------------------------

    def authenticate(self, app_id, chal, key_handle, require_presence=True):
        self._guard()
        app_hash = wire.app_id_hash(app_id)
        rec = self.records.get(record_key(app_hash, bytes(key_handle)))
        if rec is None:
            raise UnknownIdentity("no key registered for this appID and key handle")
        with instrument.endpoint("browser"):
            return self._authenticate(app_hash, chal, bytes(key_handle), rec, int(require_presence))

    def _authenticate(self, app_hash, chal, ident, rec, presence):
        n = self.counter.inc(app_hash + ident)
        m = wire.signed_message(presence, app_hash, chal, ident, n)
        fw = Firewall(rec.pk, m, self.rng)
        reply = self._send(wire.AuthRequest(app_hash, chal, ident, presence, rec.y, rec.tag, fw.commit()))
        try:
            while True:
                share = self._expect(reply, wire.SignShare)
                reply = self._send(wire.SignOpen(*fw.open(share.point)))
                if isinstance(reply, wire.NonceRejectedMsg):
                    reply = self._send(wire.SignRestart(fw.nonce_rejected()))
                    continue
                sig = fw.finish(self._expect(reply, wire.SignatureMsg).sig)
                break
        except ProtocolAbort as exc:
            if isinstance(exc, TokenFailure):
                raise
            self._fail(exc.reason, exc.detail)
        response = wire.U2fAuthenticationResponse(presence, n, sig)
        return AuthResult(sig, n, response)
