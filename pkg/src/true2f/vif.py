"""Verifiable identity family: one master key, one ECDSA keypair per identity.

``msk = (x, skVRF)`` and ``mpk = (X, pkVRF)``. For identity ``id`` the VRF
yields ``y`` and the identity keypair is ``(x*y, X^y)``. The proof is
``y || pi_VRF`` (129 bytes).

The module also carries two broken derivations, ``x*id`` and ``x + id``, and
the forgeries that break them. They exist only as negative test oracles.
"""

from dataclasses import dataclass

from . import group, vrf
from .errors import DecodeError
from .group import Point, Q

PROOF_LEN = 32 + vrf.PROOF_LEN
MPK_LEN = 66


@dataclass(frozen=True)
class MasterPublicKey:
    X: Point
    pk_vrf: Point

    def to_bytes(self):
        return self.X.to_bytes() + self.pk_vrf.to_bytes()

    @classmethod
    def from_bytes(cls, data):
        if len(data) != MPK_LEN:
            raise DecodeError("master public key must be 66 bytes")
        return cls(Point.from_bytes(data[:33], False), Point.from_bytes(data[33:], False))


@dataclass(frozen=True)
class VifMasterKeypair:
    x: int
    X: Point
    vrf: vrf.VrfKeypair

    @property
    def mpk(self):
        return MasterPublicKey(self.X, self.vrf.pk)


@dataclass(frozen=True)
class VifProof:
    y: int
    vrf_proof: bytes

    def to_bytes(self):
        return group.scalar_to_bytes(self.y) + self.vrf_proof

    @classmethod
    def from_bytes(cls, data):
        if len(data) != PROOF_LEN:
            raise DecodeError(f"VIF proof must be {PROOF_LEN} bytes")
        return cls(group.scalar_from_bytes(data[:32]), bytes(data[32:]))


@dataclass(frozen=True)
class VifIdentityKey:
    sk: int
    pk: Point
    proof: VifProof


class CachedIdentityKey:
    """Identity key rebuilt from a cached ``y``. ``pk`` is only computed on demand."""

    def __init__(self, sk, X, y):
        self.sk = sk
        self._X = X
        self._y = y
        self._pk = None

    @property
    def pk(self):
        if self._pk is None:
            self._pk = group.scalar_mult(self._X, self._y)
        return self._pk


def vif_keygen(rng=None):
    x, X = group.ecdsa_keygen(rng)
    return VifMasterKeypair(x, X, vrf.vrf_keygen(rng))


def vif_eval(msk, ident, hints=None):
    out = vrf.vrf_eval(msk.vrf, ident, hints)
    return VifIdentityKey(msk.x * out.y % Q, group.scalar_mult(msk.X, out.y), VifProof(out.y, out.proof))


def vif_eval_cached(x, ident, y, X=None):
    if not 0 < y < Q:
        raise ValueError("cached VRF output must be in [1, q)")
    return CachedIdentityKey(x * y % Q, X if X is not None else group.base_mult(x), y)


def vif_verify(mpk, ident, pk_id, proof):
    try:
        if isinstance(proof, (bytes, bytearray)):
            proof = VifProof.from_bytes(proof)
        if not 0 < proof.y < Q or pk_id.is_identity:
            return False
        if group.scalar_mult(mpk.X, proof.y) != pk_id:
            return False
        return vrf.vrf_verify(mpk.pk_vrf, ident, proof.y, proof.vrf_proof)
    except (DecodeError, AttributeError, TypeError):
        return False


# --- insecure derivations ----------------------------------------------------

MULTIPLICATIVE = "multiplicative"
ADDITIVE = "additive"


def insecure_derived_sk(variant, x, ident):
    if variant == MULTIPLICATIVE:
        sk = x * ident % Q
    elif variant == ADDITIVE:
        sk = (x + ident) % Q
    else:
        raise ValueError(f"unknown variant {variant!r}")
    if sk == 0:
        raise ValueError("derived key is zero")
    return sk


def insecure_derived_pk(variant, X, ident):
    if variant == MULTIPLICATIVE:
        return group.scalar_mult(X, ident)
    return X + group.base_mult(ident)


def insecure_vif_sign(variant, x, ident, m, r):
    if ident % Q == 0:
        raise ValueError("identity must be nonzero")
    return group.ecdsa_sign(insecure_derived_sk(variant, x, ident), m, r)


def forge_multiplicative(id0, m0, sig0, m1):
    """Turn a signature on ``m0`` under ``x*id0`` into one on ``m1`` under ``x*id1``."""
    h0, h1 = group.hash_to_scalar(m0), group.hash_to_scalar(m1)
    if h0 == 0:
        raise ValueError("H(m0) = 0, cannot forge")
    ratio = h1 * group.inv_mod(h0) % Q
    return id0 * ratio % Q, group.EcdsaSignature(sig0.c, sig0.s * ratio % Q)


def forge_additive(id0, m0, sig0, m1):
    """Same signature, shifted identity: valid on ``m1`` under ``x + id1``."""
    if sig0.c == 0:
        raise ValueError("c0 = 0, cannot forge")
    h0, h1 = group.hash_to_scalar(m0), group.hash_to_scalar(m1)
    return (id0 + (h0 - h1) * group.inv_mod(sig0.c)) % Q, sig0
