"""Firewalled ECDSA signing.

The signer (token) and the firewall (browser) first run the key-generation
protocol to agree on a nonce ``r`` known only to the signer, with
``R = g^r`` known to the firewall. The signer signs with ``r``. The firewall
checks the signature, checks that the recovered nonce point is ``R^{+-1}``
and outputs the signature or its flip, chosen by a fresh coin.

When the jointly chosen nonce makes ECDSA signing fail (``c = 0`` or
``s = 0``) the signer says so, the firewall checks the claim against
public data, and both sides start over with a new nonce.
"""

from . import group, keygen
from .errors import InvalidSignature, NonceRejected, ProtocolAbort, ProtocolOrderError

BAD_SIGNATURE = "BadSignature"
NONCE_MISMATCH = "NonceMismatch"
FALSE_REJECTION = "FalseNonceRejection"
KEYGEN_ABORT = "KeygenAbort"


class Signer:
    def __init__(self, sk, m, rng=None):
        self.sk = sk
        self.m = m
        self.rng = rng or group.default_rng()
        self.keygen = None
        self.r = None

    def respond(self, c):
        """Answer a nonce commitment (first run or restart) with ``V'``."""
        if self.keygen is not None and self.keygen.phase is keygen.Phase.RESPONDED:
            raise ProtocolOrderError("signer already answered a commitment")
        self.keygen = keygen.KeygenTokenState(c, self.rng)
        return self.keygen.V_share

    def choose_nonce(self, r):
        return r

    def finish(self, v, r_open):
        """Complete keygen and sign. May raise KeygenAbort or NonceRejected."""
        if self.keygen is None:
            raise ProtocolOrderError("signer has no pending commitment")
        self.r = self.keygen.finish(v, r_open)
        return group.ecdsa_sign(self.sk, self.m, self.choose_nonce(self.r))


class Firewall:
    def __init__(self, pk, m, rng=None):
        self.pk = pk
        self.m = m
        self.rng = rng or group.default_rng()
        self.keygen = None
        self.R = None
        self.output = None
        self.flipped = None
        self.restarts = 0

    def commit(self):
        if self.keygen is not None and self.R is None:
            raise ProtocolOrderError("firewall already has an open commitment")
        self.keygen = keygen.KeygenBrowserState(self.rng)
        self.R = None
        return self.keygen.c

    def open(self, V_share):
        if self.keygen is None:
            raise ProtocolOrderError("firewall has not committed")
        self.R, opening = self.keygen.open(V_share)
        return opening

    def finish(self, sig):
        if self.R is None or self.output is not None:
            raise ProtocolOrderError("firewall is not waiting for a signature")
        try:
            r_abs = group.recover_r_abs(self.pk, self.m, sig)
        except InvalidSignature:
            raise ProtocolAbort(BAD_SIGNATURE, "signature does not verify") from None
        if r_abs != self.R and r_abs != -self.R:
            raise ProtocolAbort(NONCE_MISMATCH, "signature was not made with the agreed nonce")
        self.flipped = self.rng.random() < 0.5
        self.output = group.flip(sig) if self.flipped else sig
        return self.output

    def nonce_rejected(self):
        """Check a claimed signing failure; on success return a new commitment."""
        if self.R is None or self.output is not None:
            raise ProtocolOrderError("firewall is not waiting for a signature")
        if not nonce_rejection_is_genuine(self.pk, self.m, self.R):
            raise ProtocolAbort(FALSE_REJECTION, "signer claimed a signing failure that did not happen")
        self.restarts += 1
        self.R = None
        self.keygen = None
        return self.commit()


def nonce_rejection_is_genuine(pk, m, R):
    """``c = f(R)`` is zero, or ``s = 0`` which means ``g^{H(m)} = pk^{-c}``."""
    c = group.conversion(R)
    if c == 0:
        return True
    return group.base_mult(group.hash_to_scalar(m)) == group.scalar_mult(pk, -c % group.Q)


def run_firewalled_sign(signer, firewall, transcript=None):
    """Drive both state machines in memory; returns the firewall's output.

    ``transcript`` (a list) receives every message in order. Token-side
    keygen failures surface as ProtocolAbort with reason ``KeygenAbort``.
    """
    log = transcript.append if transcript is not None else (lambda msg: None)
    c = firewall.commit()
    while True:
        log(c)
        V_share = signer.respond(c)
        log(V_share)
        opening = firewall.open(V_share)
        log(opening)
        try:
            sig = signer.finish(*opening)
        except NonceRejected:
            log(None)
            c = firewall.nonce_rejected()
            continue
        log(sig)
        return firewall.finish(sig)
