import random

import pytest
from cryptography.hazmat.primitives import hashes
from cryptography.hazmat.primitives.asymmetric import ec
from cryptography.hazmat.primitives.asymmetric.utils import decode_dss_signature, encode_dss_signature
from hypothesis import given, settings
from hypothesis import strategies as st

from true2f import group, instrument
from true2f.errors import DecodeError, InvalidSignature, NonceRejected
from true2f.group import G, Point, Q

# RFC 6979 A.2.5, P-256 with SHA-256, message "sample"
RFC_X = 0xC9AFA9D845BA75166B5C215767B1D6934E50C3DB36E89B127B8A622B120F6721
RFC_UX = 0x60FED4BA255A9D31C961EB74C6356D68C049B8923B61FA6CE669622E60F29FB6
RFC_UY = 0x7903FE1008B8BC99A41AE9E95628BC64F2F1B20C2D7E9F5177A3C294D4462299
RFC_K = 0xA6E3C57DD01ABE90086538398355DD4C3B17AA873382B0F24D6129493D8AAD60
RFC_R = 0xEFD48B2AACB6A8FD1140DD9CD45E81D69D2C877B56AAF991C34D0EA84EAF3716
RFC_S = 0xF7CB1C942D657C41D436C7A1B6E29F65F3E900DBB9AFF4064DC4AB2F843ACDA8

scalars = st.integers(min_value=1, max_value=Q - 1)


def _oracle_pub(sk):
    return ec.derive_private_key(sk, ec.SECP256R1()).public_key()


def test_rfc6979_sample_vector():
    pk = group.base_mult(RFC_X)
    assert (pk.x, pk.y) == (RFC_UX, RFC_UY)
    sig = group.ecdsa_sign(RFC_X, b"sample", RFC_K)
    assert (sig.c, sig.s) == (RFC_R, RFC_S)
    # independent check of the same vector
    _oracle_pub(RFC_X).verify(encode_dss_signature(RFC_R, RFC_S), b"sample", ec.ECDSA(hashes.SHA256()))


def test_generator_order():
    assert G.is_on_curve()
    assert group.scalar_mult(G, Q).is_identity
    assert group.scalar_mult(G, Q + 1) == G


@settings(max_examples=200, deadline=None)
@given(scalars)
def test_base_mult_matches_cryptography(k):
    nums = _oracle_pub(k).public_numbers()
    pt = group.base_mult(k)
    assert (pt.x, pt.y) == (nums.x, nums.y)


@settings(max_examples=100, deadline=None)
@given(scalars, scalars)
def test_var_mult_and_double_mult(a, b):
    P = group.base_mult(a)
    assert group.scalar_mult(P, b) == group.base_mult(a * b % Q)
    assert group.double_mult(a, P, b) == group.base_mult((a + a * b) % Q)


def test_group_laws_random():
    rng = random.Random(5)
    for _ in range(1000):
        a, b = rng.randrange(1, Q), rng.randrange(1, Q)
        A, B = group.base_mult(a), group.base_mult(b)
        assert A + B == B + A == group.base_mult((a + b) % Q)
        assert (A - A).is_identity
        assert A + Point.identity() == A
        assert -(-A) == A


def test_point_encoding_roundtrip(rng):
    for _ in range(50):
        pt = group.base_mult(rng.randrange(1, Q))
        assert Point.from_bytes(pt.to_bytes()) == pt
        assert Point.from_bytes(pt.to_bytes(False)) == pt
    assert Point.from_bytes(group.IDENTITY_BYTES).is_identity
    with pytest.raises(DecodeError):
        Point.from_bytes(group.IDENTITY_BYTES, allow_identity=False)


@pytest.mark.parametrize("data", [b"", b"\x02" + bytes(31), b"\x05" + bytes(32), b"\x04" + bytes(64)])
def test_point_decoding_rejects(data):
    with pytest.raises(DecodeError):
        Point.from_bytes(data)


def test_point_decoding_rejects_x_not_on_curve():
    x = next(x for x in range(1, 100) if not group.is_square(group.curve_rhs(x)))
    with pytest.raises(DecodeError):
        Point.from_bytes(b"\x02" + x.to_bytes(32, "big"))


@settings(max_examples=60, deadline=None)
@given(scalars, scalars, st.binary(max_size=64))
def test_sign_verified_by_cryptography(sk, r, m):
    try:
        sig = group.ecdsa_sign(sk, m, r)
    except NonceRejected:
        return
    der = encode_dss_signature(sig.c, sig.s)
    _oracle_pub(sk).verify(der, m, ec.ECDSA(hashes.SHA256()))
    flipped = group.flip(sig)
    _oracle_pub(sk).verify(encode_dss_signature(flipped.c, flipped.s), m, ec.ECDSA(hashes.SHA256()))


@settings(max_examples=60, deadline=None)
@given(scalars, st.binary(max_size=64))
def test_verify_accepts_cryptography_signatures(sk, m):
    der = ec.derive_private_key(sk, ec.SECP256R1()).sign(m, ec.ECDSA(hashes.SHA256()))
    c, s = decode_dss_signature(der)
    assert group.ecdsa_verify(group.base_mult(sk), m, group.EcdsaSignature(c, s))
    assert not group.ecdsa_verify(group.base_mult(sk), m + b"x", group.EcdsaSignature(c, s))


def test_recover_r_abs(rng):
    sk, pk = group.ecdsa_keygen(rng)
    for _ in range(20):
        r = group.random_scalar(rng)
        sig = group.ecdsa_sign(sk, b"msg", r)
        R = group.base_mult(r)
        assert group.recover_r_abs(pk, b"msg", sig) in (R, -R)
        assert group.recover_r_abs(pk, b"msg", group.flip(sig)) in (R, -R)
    with pytest.raises(InvalidSignature):
        group.recover_r_abs(pk, b"other", sig)


def test_verify_rejects_out_of_range(rng):
    sk, pk = group.ecdsa_keygen(rng)
    sig = group.ecdsa_sign(sk, b"m", 12345)
    for bad in (group.EcdsaSignature(0, sig.s), group.EcdsaSignature(sig.c, 0), group.EcdsaSignature(Q, sig.s)):
        assert not group.ecdsa_verify(pk, b"m", bad)
    assert not group.ecdsa_verify(Point.identity(), b"m", sig)


def test_signature_bytes_roundtrip(rng):
    sk, _ = group.ecdsa_keygen(rng)
    sig = group.ecdsa_sign(sk, b"m", 99)
    assert group.EcdsaSignature.from_bytes(sig.to_bytes()) == sig
    with pytest.raises(DecodeError):
        group.EcdsaSignature.from_bytes(b"\x00" * 63)


def test_sign_rejects_degenerate_nonce():
    # s = 0 exactly when H(m) + c*sk = 0
    r = 777
    c = group.conversion(group.base_mult(r))
    h = group.hash_to_scalar(b"m")
    sk = -h * group.inv_mod(c) % Q
    with pytest.raises(NonceRejected):
        group.ecdsa_sign(sk, b"m", r)


def test_exponentiation_counting():
    with instrument.counting() as ops:
        with instrument.endpoint("a"):
            group.base_mult(3)
            group.double_mult(1, G, 2)
        with instrument.endpoint("b"):
            group.scalar_mult(G, 5)
            group.sqrt_mod_p(4)
    assert ops["a", "exp"] == 3
    assert ops["b", "exp"] == 1
    assert ops["b", "sqrt"] == 1


def test_sqrt_mod_p(rng):
    for _ in range(50):
        z = rng.randrange(group.P)
        root = group.sqrt_mod_p(z)
        assert (root is not None) == group.is_square(z)
        if root is not None:
            assert root * root % group.P == z
