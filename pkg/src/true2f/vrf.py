"""Verifiable random function over P-256 with outsourced hash-to-point.

Hash-to-point uses try-and-increment: candidate ``u_i = SHA-256(i || id) mod p``
for ``i = 0, 1, ...`` with ``w_i = u_i^3 - 3 u_i + b``; the first ``w_i`` that
is a square gives the point ``(u_i, sqrt(w_i))`` with even ``y``.

Because ``p = 3 mod 4``, ``-1`` is a non-residue, so for every rejected
candidate ``-w_i`` is a square. A helper holding no secrets can therefore
prove each rejection by handing over ``sqrt(-w_i)``, and the final acceptance
by handing over ``sqrt(w_l)``. Checking those hints costs one squaring each.

Proof layout (97 bytes)::

    offset  0  Gamma  compressed point, 33 bytes
    offset 33  c      challenge scalar, 32 bytes big-endian
    offset 65  s      response scalar, 32 bytes big-endian

with ``Gamma = H(id)^sk``, nonce commitments ``U = g^k``, ``V = H(id)^k``,
``c = SHA-256("true2f-vrf-dleq" || g || H(id) || pk || Gamma || U || V) mod q``
and ``s = k - c*sk mod q``. The output is
``y = SHA-256("true2f-vrf-out" || Gamma) mod q``, with 0 replaced by 1.
"""

import hashlib
from dataclasses import dataclass

from . import group
from .errors import BadHints, DecodeError
from .group import G, P, Point, Q

MAX_CANDIDATES = 256
PROOF_LEN = 97

_DLEQ_TAG = b"true2f-vrf-dleq"
_OUT_TAG = b"true2f-vrf-out"
_NONCE_TAG = b"true2f-vrf-nonce"


def candidate(i, ident):
    u = int.from_bytes(hashlib.sha256(bytes([i]) + ident).digest(), "big") % P
    return u, group.curve_rhs(u)


def _even(u, y):
    return Point(u, y if y % 2 == 0 else P - y)


def hash_to_point(ident):
    for i in range(MAX_CANDIDATES):
        u, w = candidate(i, ident)
        y = group.sqrt_mod_p(w)
        if y is not None:
            return _even(u, y)
    raise RuntimeError("hash_to_point: no candidate found")


@dataclass(frozen=True)
class SqrtHints:
    """Roots ``r_1..r_l``: ``r_i^2 = -w_i`` for rejected candidates, ``r_l^2 = w_l``."""

    roots: tuple

    def __len__(self):
        return len(self.roots)


def make_sqrt_hints(ident):
    roots = []
    for i in range(MAX_CANDIDATES):
        u, w = candidate(i, ident)
        y = group.sqrt_mod_p(w)
        if y is not None:
            roots.append(y)
            return SqrtHints(tuple(roots))
        roots.append(group.sqrt_mod_p(-w % P))
    raise RuntimeError("make_sqrt_hints: no candidate found")


def hash_to_point_with_hints(ident, hints):
    """Same point as :func:`hash_to_point`, checked with squarings only."""
    roots = hints.roots
    if not 1 <= len(roots) <= MAX_CANDIDATES:
        raise BadHints("wrong number of hints")
    for i, r in enumerate(roots):
        u, w = candidate(i, ident)
        last = i == len(roots) - 1
        target = w if last else -w % P
        if not (0 <= r < P) or r * r % P != target:
            raise BadHints(f"hint {i} does not square to the expected value")
    return _even(u, roots[-1])


@dataclass(frozen=True)
class VrfKeypair:
    sk: int
    pk: Point


@dataclass(frozen=True)
class VrfOutput:
    y: int
    proof: bytes


def vrf_keygen(rng=None):
    sk, pk = group.ecdsa_keygen(rng)
    return VrfKeypair(sk, pk)


def output_from_gamma(gamma):
    y = int.from_bytes(hashlib.sha256(_OUT_TAG + gamma.to_bytes()).digest(), "big") % Q
    return y or 1


def _challenge(h, pk, gamma, u, v):
    data = b"".join(pt.to_bytes() for pt in (G, h, pk, gamma, u, v))
    return int.from_bytes(hashlib.sha256(_DLEQ_TAG + data).digest(), "big") % Q


def vrf_eval(keypair, ident, hints=None):
    if hints is None:
        h = hash_to_point(ident)
    else:
        h = hash_to_point_with_hints(ident, hints)
    gamma = group.scalar_mult(h, keypair.sk)
    seed = hashlib.sha256(_NONCE_TAG + group.scalar_to_bytes(keypair.sk) + h.to_bytes()).digest()
    k = int.from_bytes(seed, "big") % Q or 1
    c = _challenge(h, keypair.pk, gamma, group.base_mult(k), group.scalar_mult(h, k))
    s = (k - c * keypair.sk) % Q
    proof = gamma.to_bytes() + group.scalar_to_bytes(c) + group.scalar_to_bytes(s)
    return VrfOutput(output_from_gamma(gamma), proof)


def parse_proof(proof):
    if len(proof) != PROOF_LEN:
        raise DecodeError(f"VRF proof must be {PROOF_LEN} bytes")
    gamma = Point.from_bytes(proof[:33], allow_identity=False)
    return gamma, group.scalar_from_bytes(proof[33:65]), group.scalar_from_bytes(proof[65:])


def vrf_verify(pk, ident, y, proof):
    try:
        gamma, c, s = parse_proof(bytes(proof))
        if pk.is_identity or not 0 < y < Q:
            return False
        h = hash_to_point(ident)
        u = group.double_mult(s, pk, c)
        v = group.scalar_mult(h, s) + group.scalar_mult(gamma, c)
        return c == _challenge(h, pk, gamma, u, v) and y == output_from_gamma(gamma)
    except (DecodeError, TypeError, AttributeError):
        return False
