"""Commit-then-reveal key generation between a browser and a token.

1. browser: pick ``v, r``; send ``c = Hc(v, r)``
2. token:   pick ``v'``; send ``V' = g^{v'}``
3. browser: send ``(v, r)``; public key ``X = V' * g^v``
4. token:   check ``c``; secret key ``x = v + v'``

Messages are 32, 33 and 64 bytes. The token does one exponentiation.
"""

import enum
import hashlib

from . import group
from .errors import KeygenAbort, ProtocolOrderError, SimulatorAbort, SimulatorInapplicable

COMMIT_LEN = 32
_TAG = b"true2f-keygen-commit"


def commitment(v, r):
    return hashlib.sha256(_TAG + group.scalar_to_bytes(v) + group.scalar_to_bytes(r)).digest()


class Phase(enum.Enum):
    COMMITTED = "committed"
    RESPONDED = "responded"
    DONE = "done"
    ABORTED = "aborted"


class KeygenBrowserState:
    def __init__(self, rng=None):
        rng = rng or group.default_rng()
        self.v = rng.randrange(group.Q)
        self.r = rng.randrange(group.Q)
        self.c = commitment(self.v, self.r)
        self.phase = Phase.COMMITTED
        self.V_share = None
        self.X = None

    def open(self, V_share):
        if self.phase is not Phase.COMMITTED:
            raise ProtocolOrderError(f"browser keygen cannot open in phase {self.phase.value}")
        self.V_share = V_share
        self.X = V_share + group.base_mult(self.v)
        self.phase = Phase.DONE
        return self.X, (self.v, self.r)


class KeygenTokenState:
    def __init__(self, c, rng=None):
        if len(c) != COMMIT_LEN:
            raise ValueError("commitment must be 32 bytes")
        rng = rng or group.default_rng()
        self.c = bytes(c)
        self.v_share = rng.randrange(group.Q)
        self.V_share = group.base_mult(self.v_share)
        self.phase = Phase.RESPONDED
        self.x = None

    def finish(self, v, r):
        if self.phase is not Phase.RESPONDED:
            raise ProtocolOrderError(f"token keygen cannot finish in phase {self.phase.value}")
        if commitment(v, r) != self.c:
            self.phase = Phase.ABORTED
            raise KeygenAbort()
        self.x = (v + self.v_share) % group.Q
        self.phase = Phase.DONE
        return self.x


def browser_commit(rng=None):
    st = KeygenBrowserState(rng)
    return st, st.c


def token_respond(c, rng=None):
    st = KeygenTokenState(c, rng)
    return st, st.V_share


def browser_open(st, V_share):
    return st.open(V_share)


def token_finish(st, v, r):
    return st.finish(v, r)


def run_keygen(rng_browser=None, rng_token=None):
    """Honest run; returns ``(x, X)``."""
    bst, c = browser_commit(rng_browser)
    tst, V_share = token_respond(c, rng_token)
    X, (v, r) = browser_open(bst, V_share)
    return token_finish(tst, v, r), X


class HonestBrowserStrategy:
    """A browser strategy usable by :func:`simulate_browser_view`.

    ``commit`` returns opaque state; ``open`` must be replayable on it.
    """

    def __init__(self, rng=None):
        self.rng = rng or group.default_rng()

    def commit(self):
        st = KeygenBrowserState(self.rng)
        return (st.v, st.r), st.c

    def open(self, state, V_share):
        return state


def simulate_browser_view(X, adversary, rng=None):
    """Produce the browser's view of a run whose public key is ``X``.

    The adversary is rewound: first opened against a random point, then
    against ``X / g^v``. Returns ``(c, V', (v, r*))``.
    """
    rng = rng or group.default_rng()
    state, c = adversary.commit()
    v, r = adversary.open(state, group.base_mult(group.random_scalar(rng)))
    V_share = X - group.base_mult(v)
    v_star, r_star = adversary.open(state, V_share)
    if commitment(v, r) != c or commitment(v_star, r_star) != c:
        raise SimulatorInapplicable("adversary's opening would make the token abort")
    if v != v_star:
        raise SimulatorAbort("adversary opened to two different values")
    return c, V_share, (v, r_star)
