"""Misbehaving tokens. Each one talks the same frames as :class:`Token`."""

import math

from . import group, keygen, wire
from .counter import GlobalCounter
from .firewall import Signer
from .token import Token


class _NonceSigner(Signer):
    def __init__(self, sk, m, rng, pick):
        super().__init__(sk, m, rng)
        self._pick = pick

    def choose_nonce(self, r):
        return self._pick(r)


class FixedNonceToken(Token):
    """Signs with a nonce of its own choosing instead of the agreed one."""

    def __init__(self, nonce=0x1234567, **kwargs):
        super().__init__(**kwargs)
        self.nonce = nonce

    def make_signer(self, sk, m):
        return _NonceSigner(sk, m, self.rng, lambda r: self.nonce)


class WrongNonceToken(Token):
    """Signs with ``r + 1``: a nonce related to, but not equal to, the agreed one."""

    def make_signer(self, sk, m):
        return _NonceSigner(sk, m, self.rng, lambda r: (r + 1) % group.Q or 1)


class BiasedKeygenToken(Token):
    """Tries to force its master secrets to known values by ignoring the browser's share."""

    def __init__(self, planted=(0xBAD, 0xC0FFEE), **kwargs):
        super().__init__(**kwargs)
        self.planted = list(planted)

    def keygen_respond(self, c):
        st = keygen.KeygenTokenState(c, self.rng)
        st.v_share = self.planted[len(self._shares)]
        st.V_share = group.base_mult(st.v_share)
        return st

    def keygen_finish(self, st, v, r):
        st.finish(v, r)
        return st.v_share


class WrongPkToken(Token):
    """Registers ``X^{y+1}`` instead of ``X^y``."""

    def register(self, ident, hints):
        pk, proof = super().register(ident, hints)
        return group.scalar_mult(self.msk.X, proof.y + 1), proof


class CounterDesyncToken(Token):
    """Silently bumps a counter one extra time on authentication number ``at``."""

    def __init__(self, at=2, **kwargs):
        super().__init__(**kwargs)
        self.at = at
        self.auths = 0

    def increment(self, key):
        self.auths += 1
        if self.auths == self.at:
            self.counter.inc(key)
        return self.counter.inc(key)


def global_counter_token(**kwargs):
    return Token(counter_factory=GlobalCounter, **kwargs)


class SelectiveAbortToken(Token):
    """Leaks a secret through *when* it fails.

    Over ``T`` authentication requests it refuses request number ``secret``
    (1 based), or never if ``secret`` is 0, so at most ``log2(T + 1)`` bits
    reach an observer who sees the abort position.
    """

    def __init__(self, secret, interactions=7, **kwargs):
        super().__init__(**kwargs)
        if not 0 <= secret <= interactions:
            raise ValueError("secret must be in [0, T]")
        self.secret = secret
        self.interactions = interactions
        self.seen = 0

    @property
    def leak_bound_bits(self):
        return math.log2(self.interactions + 1)

    def _on_auth(self, msg):
        self.seen += 1
        if self.seen == self.secret:
            return wire.ErrorMsg(wire.ERR_INTERNAL)
        return super()._on_auth(msg)

    _handlers = {**Token._handlers, wire.AuthRequest: _on_auth}


VARIANTS = {
    "honest": Token,
    "fixed-nonce": FixedNonceToken,
    "wrong-nonce": WrongNonceToken,
    "biased-keygen": BiasedKeygenToken,
    "wrong-pk": WrongPkToken,
    "counter-desync": CounterDesyncToken,
    "global-counter": global_counter_token,
    "selective-abort": SelectiveAbortToken,
}
