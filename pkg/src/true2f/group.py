"""NIST P-256 group arithmetic and the plain ECDSA scheme built on it.

Scalars are Python ints in ``[0, Q)``. Points are immutable affine
:class:`Point` values; the identity is ``Point.identity()``. Internally the
scalar multiplications run in Jacobian coordinates, with a precomputed
4-bit comb table for the generator and width-5 NAF for other bases.

Every scalar multiplication is reported to :mod:`true2f.instrument` as one
group exponentiation (``"exp"``).
"""

import hashlib
import random
from dataclasses import dataclass
from functools import lru_cache

from . import instrument
from .errors import DecodeError, InvalidSignature, NonceRejected

P = 0xFFFFFFFF00000001000000000000000000000000FFFFFFFFFFFFFFFFFFFFFFFF
A = P - 3
B = 0x5AC635D8AA3A93E7B3EBBD55769886BC651D06B0CC53B0F63BCE3C3E27D2604B
Q = 0xFFFFFFFF00000000FFFFFFFFFFFFFFFFBCE6FAADA7179E84F3B9CAC2FC632551
GX = 0x6B17D1F2E12C4247F8BCE6E563A440F277037D812DEB33A0F4A13945D898C296
GY = 0x4FE342E2FE1A7F9B8EE7EB4A7C0F9E162BCE33576B315ECECBB6406837BF51F5

SCALAR_LEN = 32
POINT_LEN = 33
UNCOMPRESSED_LEN = 65
IDENTITY_BYTES = bytes(POINT_LEN)
SQRT_EXP = (P + 1) // 4

_system_rng = random.SystemRandom()


def default_rng():
    return _system_rng


def random_scalar(rng=None):
    """Uniform nonzero scalar."""
    return (rng or _system_rng).randrange(1, Q)


def inv_mod(a, m=Q):
    return pow(a, -1, m)


def curve_rhs(x):
    """``x^3 - 3x + b mod p``."""
    return (x * x * x - 3 * x + B) % P


def is_square(z):
    z %= P
    return z == 0 or pow(z, (P - 1) // 2, P) == 1


def sqrt_mod_p(z):
    """Square root of ``z`` mod p, or ``None`` if ``z`` is a non-residue."""
    instrument.record("sqrt")
    r = pow(z, SQRT_EXP, P)
    return r if r * r % P == z % P else None


@dataclass(frozen=True)
class Point:
    x: int | None
    y: int | None

    @classmethod
    def identity(cls):
        return cls(None, None)

    @property
    def is_identity(self):
        return self.x is None

    def is_on_curve(self):
        if self.is_identity:
            return True
        return 0 <= self.x < P and 0 <= self.y < P and self.y * self.y % P == curve_rhs(self.x)

    def __neg__(self):
        if self.is_identity:
            return self
        return Point(self.x, (-self.y) % P)

    def __add__(self, other):
        return _to_affine(_add_mixed(_to_jacobian(self), other))

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, k):
        return scalar_mult(self, k)

    __rmul__ = __mul__

    def to_bytes(self, compressed=True):
        if self.is_identity:
            if not compressed:
                raise ValueError("identity has no uncompressed encoding")
            return IDENTITY_BYTES
        if compressed:
            return bytes([2 | (self.y & 1)]) + self.x.to_bytes(32, "big")
        return b"\x04" + self.x.to_bytes(32, "big") + self.y.to_bytes(32, "big")

    @classmethod
    def from_bytes(cls, data, allow_identity=True):
        """Decode a 33-byte compressed or 65-byte uncompressed SEC1 point."""
        data = bytes(data)
        if data == IDENTITY_BYTES:
            if not allow_identity:
                raise DecodeError("identity is not a valid public key")
            return cls.identity()
        if len(data) == POINT_LEN and data[0] in (2, 3):
            x = int.from_bytes(data[1:], "big")
            if x >= P:
                raise DecodeError("x coordinate out of range")
            y = sqrt_mod_p(curve_rhs(x))
            if y is None:
                raise DecodeError("x is not on the curve")
            if (y & 1) != (data[0] & 1):
                y = P - y
            return cls(x, y)
        if len(data) == UNCOMPRESSED_LEN and data[0] == 4:
            pt = cls(int.from_bytes(data[1:33], "big"), int.from_bytes(data[33:], "big"))
            if not pt.is_on_curve():
                raise DecodeError("point is not on the curve")
            return pt
        raise DecodeError(f"bad point encoding ({len(data)} bytes)")

    def __repr__(self):
        if self.is_identity:
            return "Point(identity)"
        return f"Point({self.to_bytes().hex()[:18]}...)"


G = Point(GX, GY)

# --- Jacobian arithmetic, infinity has Z == 0 --------------------------------

_INF = (1, 1, 0)


def _to_jacobian(pt):
    return _INF if pt.is_identity else (pt.x, pt.y, 1)


def _to_affine(j):
    x, y, z = j
    if z == 0:
        return Point.identity()
    zi = pow(z, -1, P)
    zi2 = zi * zi % P
    return Point(x * zi2 % P, y * zi2 * zi % P)


def _double(j):
    x1, y1, z1 = j
    if z1 == 0 or y1 == 0:
        return _INF
    delta = z1 * z1 % P
    gamma = y1 * y1 % P
    beta = x1 * gamma % P
    alpha = 3 * (x1 - delta) * (x1 + delta) % P
    x3 = (alpha * alpha - 8 * beta) % P
    z3 = ((y1 + z1) ** 2 - gamma - delta) % P
    y3 = (alpha * (4 * beta - x3) - 8 * gamma * gamma) % P
    return (x3, y3, z3)


def _add_mixed(j, pt):
    """Jacobian ``j`` plus affine ``pt``."""
    if pt.is_identity:
        return j
    x1, y1, z1 = j
    if z1 == 0:
        return (pt.x, pt.y, 1)
    z1z1 = z1 * z1 % P
    u2 = pt.x * z1z1 % P
    s2 = pt.y * z1 * z1z1 % P
    h = (u2 - x1) % P
    r = 2 * (s2 - y1) % P
    if h == 0:
        return _double(j) if r == 0 else _INF
    hh = h * h % P
    i = 4 * hh % P
    jj = h * i % P
    v = x1 * i % P
    x3 = (r * r - jj - 2 * v) % P
    y3 = (r * (v - x3) - 2 * y1 * jj) % P
    z3 = ((z1 + h) ** 2 - z1z1 - hh) % P
    return (x3, y3, z3)


def _add(j1, j2):
    x1, y1, z1 = j1
    x2, y2, z2 = j2
    if z1 == 0:
        return j2
    if z2 == 0:
        return j1
    z1z1 = z1 * z1 % P
    z2z2 = z2 * z2 % P
    u1 = x1 * z2z2 % P
    u2 = x2 * z1z1 % P
    s1 = y1 * z2 * z2z2 % P
    s2 = y2 * z1 * z1z1 % P
    h = (u2 - u1) % P
    r = 2 * (s2 - s1) % P
    if h == 0:
        return _double(j1) if r == 0 else _INF
    i = 4 * h * h % P
    jj = h * i % P
    v = u1 * i % P
    x3 = (r * r - jj - 2 * v) % P
    y3 = (r * (v - x3) - 2 * s1 * jj) % P
    z3 = ((z1 + z2) ** 2 - z1z1 - z2z2) * h % P
    return (x3, y3, z3)


@lru_cache(maxsize=1)
def _base_table():
    """``table[i][d] = d * 16^i * G`` in affine form, ``d`` in 1..15."""
    table = []
    base = G
    for _ in range(64):
        row = [None, base]
        acc = _to_jacobian(base)
        for _ in range(14):
            acc = _add_mixed(acc, base)
            row.append(_to_affine(acc))
        table.append(row)
        j = _to_jacobian(base)
        for _ in range(4):
            j = _double(j)
        base = _to_affine(j)
    return table


def _wnaf(k, w=5):
    digits = []
    half, full = 1 << (w - 1), 1 << w
    while k:
        if k & 1:
            d = k & (full - 1)
            if d >= half:
                d -= full
            k -= d
        else:
            d = 0
        digits.append(d)
        k >>= 1
    return digits


def _base_mult_j(k):
    table = _base_table()
    acc = _INF
    for i in range(64):
        d = (k >> (4 * i)) & 15
        if d:
            acc = _add_mixed(acc, table[i][d])
    return acc


def _var_mult_j(pt, k):
    odd = [pt]
    twice = _to_affine(_double(_to_jacobian(pt)))
    acc = _to_jacobian(pt)
    for _ in range(7):
        acc = _add_mixed(acc, twice)
        odd.append(_to_affine(acc))
    neg = [-o for o in odd]
    acc = _INF
    for d in reversed(_wnaf(k)):
        acc = _double(acc)
        if d > 0:
            acc = _add_mixed(acc, odd[d >> 1])
        elif d < 0:
            acc = _add_mixed(acc, neg[(-d) >> 1])
    return acc


def scalar_mult(pt, k):
    """``k * pt`` (written ``pt^k`` multiplicatively). Counts one exponentiation."""
    instrument.record("exp")
    k %= Q
    if k == 0 or pt.is_identity:
        return Point.identity()
    if pt == G:
        return _to_affine(_base_mult_j(k))
    return _to_affine(_var_mult_j(pt, k))


def base_mult(k):
    """``g^k``."""
    return scalar_mult(G, k)


def double_mult(a, pt, b):
    """``g^a * pt^b``; counts as two exponentiations."""
    instrument.record("exp", 2)
    a %= Q
    b %= Q
    acc = _base_mult_j(a) if a else _INF
    if b and not pt.is_identity:
        acc = _add(acc, _var_mult_j(pt, b))
    return _to_affine(acc)


# --- scalar codecs -----------------------------------------------------------


def scalar_to_bytes(k):
    return (k % Q).to_bytes(SCALAR_LEN, "big")


def scalar_from_bytes(data):
    if len(data) != SCALAR_LEN:
        raise DecodeError(f"scalar must be {SCALAR_LEN} bytes, got {len(data)}")
    k = int.from_bytes(data, "big")
    if k >= Q:
        raise DecodeError("scalar out of range")
    return k


def hash_to_scalar(m):
    """ECDSA message hash: SHA-256, big-endian, reduced mod q."""
    return int.from_bytes(hashlib.sha256(m).digest(), "big") % Q


def conversion(pt):
    """The ECDSA conversion function: x coordinate mod q."""
    return pt.x % Q


# --- ECDSA -------------------------------------------------------------------


@dataclass(frozen=True)
class EcdsaSignature:
    c: int
    s: int

    def to_bytes(self):
        return scalar_to_bytes(self.c) + scalar_to_bytes(self.s)

    @classmethod
    def from_bytes(cls, data):
        if len(data) != 2 * SCALAR_LEN:
            raise DecodeError("signature must be 64 bytes")
        return cls(scalar_from_bytes(data[:32]), scalar_from_bytes(data[32:]))


def ecdsa_keygen(rng=None):
    x = random_scalar(rng)
    return x, base_mult(x)


def ecdsa_sign(sk, m, r):
    """Deterministic ECDSA signing with nonce ``r``.

    Raises :class:`NonceRejected` when ``c == 0`` or ``s == 0``; callers that
    fix the nonce jointly must rerun nonce generation rather than resample.
    """
    if r % Q == 0 or sk % Q == 0:
        raise ValueError("nonce and secret key must be nonzero")
    c = conversion(base_mult(r))
    s = (hash_to_scalar(m) + c * sk) * inv_mod(r) % Q
    if c == 0 or s == 0:
        raise NonceRejected("c or s is zero")
    return EcdsaSignature(c, s)


def _r_abs(pk, m, sig):
    s_inv = inv_mod(sig.s)
    return double_mult(hash_to_scalar(m) * s_inv, pk, sig.c * s_inv)


def ecdsa_verify(pk, m, sig):
    try:
        c, s = sig.c, sig.s
        if not (0 < c < Q and 0 < s < Q) or pk.is_identity:
            return False
        r_abs = _r_abs(pk, m, sig)
        return not r_abs.is_identity and conversion(r_abs) == c
    except (AttributeError, TypeError, ValueError):
        return False


def recover_r_abs(pk, m, sig):
    """Recover ``g^{+-r}`` from a valid signature made with nonce ``r``."""
    if not ecdsa_verify(pk, m, sig):
        raise InvalidSignature("signature does not verify")
    return _r_abs(pk, m, sig)


def flip(sig):
    """The other valid signature ``(c, -s)``."""
    return EcdsaSignature(sig.c, (-sig.s) % Q)
