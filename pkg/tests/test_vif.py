import random

import pytest

from true2f import group, vif, vrf
from true2f.group import Q


@pytest.fixture(scope="module")
def msk():
    return vif.vif_keygen(random.Random(11))


def test_eval_verify(msk):
    ident = b"\x01" * 32
    key = vif.vif_eval(msk, ident)
    assert group.base_mult(key.sk) == key.pk
    assert vif.vif_verify(msk.mpk, ident, key.pk, key.proof)
    assert vif.vif_verify(msk.mpk, ident, key.pk, key.proof.to_bytes())
    assert len(key.proof.to_bytes()) == vif.PROOF_LEN


def test_eval_is_deterministic(msk):
    ident = b"\x02" * 32
    a, b = vif.vif_eval(msk, ident), vif.vif_eval(msk, ident, vrf.make_sqrt_hints(ident))
    assert a.proof.to_bytes() == b.proof.to_bytes() and a.pk == b.pk


def test_cached_key_matches(msk):
    ident = b"\x03" * 32
    key = vif.vif_eval(msk, ident)
    cached = vif.vif_eval_cached(msk.x, ident, key.proof.y, msk.X)
    assert cached.sk == key.sk and cached.pk == key.pk
    with pytest.raises(ValueError):
        vif.vif_eval_cached(msk.x, ident, 0)


def test_mpk_roundtrip(msk):
    assert vif.MasterPublicKey.from_bytes(msk.mpk.to_bytes()) == msk.mpk
    assert len(msk.mpk.to_bytes()) == vif.MPK_LEN


def test_perturbations_rejected(msk):
    ident = b"\x04" * 32
    key = vif.vif_eval(msk, ident)
    proof = key.proof
    assert not vif.vif_verify(msk.mpk, ident, key.pk + group.G, proof)
    assert not vif.vif_verify(msk.mpk, ident, key.pk, vif.VifProof(proof.y + 1, proof.vrf_proof))
    assert not vif.vif_verify(msk.mpk, b"\x05" * 32, key.pk, proof)
    assert not vif.vif_verify(msk.mpk, ident, group.Point.identity(), proof)
    assert not vif.vif_verify(msk.mpk, ident, key.pk, b"short")
    assert not vif.vif_verify(msk.mpk, ident, key.pk, None)
    other = vif.vif_keygen(random.Random(12))
    assert not vif.vif_verify(other.mpk, ident, key.pk, proof)


@pytest.mark.parametrize("variant, forge", [
    (vif.MULTIPLICATIVE, vif.forge_multiplicative),
    (vif.ADDITIVE, vif.forge_additive),
])
def test_related_key_forgery(variant, forge):
    rng = random.Random(13)
    x, X = group.ecdsa_keygen(rng)
    id0 = rng.randrange(1, Q)
    sig0 = vif.insecure_vif_sign(variant, x, id0, b"m0", group.random_scalar(rng))
    id1, sig1 = forge(id0, b"m0", sig0, b"m1")
    assert id1 != id0
    assert group.ecdsa_verify(vif.insecure_derived_pk(variant, X, id1), b"m1", sig1)


def test_insecure_variant_guards():
    with pytest.raises(ValueError):
        vif.insecure_derived_sk("other", 1, 1)
    with pytest.raises(ValueError):
        vif.insecure_vif_sign(vif.MULTIPLICATIVE, 5, Q, b"m", 7)
