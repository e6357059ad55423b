import random

import pytest
from cryptography.hazmat.primitives.asymmetric.utils import decode_dss_signature, encode_dss_signature
from hypothesis import given, settings
from hypothesis import strategies as st

import samples
from true2f import group, wire
from true2f.errors import DecodeError

scalars = st.integers(min_value=1, max_value=group.Q - 1)


@pytest.mark.parametrize("msg", samples.frames(), ids=lambda m: type(m).__name__)
def test_frame_roundtrip(msg):
    raw = msg.to_bytes()
    assert wire.decode_frame(raw) == msg
    assert wire.decode_frame(raw).to_bytes() == raw


@pytest.mark.parametrize("msg", samples.u2f_messages(), ids=lambda m: type(m).__name__)
def test_u2f_roundtrip(msg):
    raw = msg.to_bytes()
    assert type(msg).from_bytes(raw) == msg


def test_auth_request_payload_size():
    msg = next(m for m in samples.frames() if isinstance(m, wire.AuthRequest))
    assert len(msg.to_bytes()) == 3 + 193


@settings(max_examples=200, deadline=None)
@given(scalars, scalars)
def test_der_matches_cryptography(c, s):
    sig = group.EcdsaSignature(c, s)
    der = wire.encode_der_signature(sig)
    assert der == encode_dss_signature(c, s)
    assert decode_dss_signature(der) == (c, s)
    assert wire.decode_der_signature(der) == sig


@pytest.mark.parametrize("der", [
    b"",
    b"\x30\x00",
    b"\x30\x06\x02\x01\x01\x02\x01\x01\x00",  # trailing byte
    b"\x30\x06\x02\x01\x81\x02\x01\x01",  # negative
    b"\x30\x07\x02\x02\x00\x01\x02\x01\x01",  # non-minimal integer
    b"\x30\x81\x06\x02\x01\x01\x02\x01\x01",  # non-minimal length
    b"\x30\x06\x02\x01\x00\x02\x01\x01",  # zero scalar
])
def test_der_strict(der):
    with pytest.raises(DecodeError):
        wire.decode_der_signature(der)


@settings(max_examples=300, deadline=None)
@given(st.binary(max_size=300))
def test_decode_frame_only_raises_decode_error(data):
    try:
        wire.decode_frame(data)
    except DecodeError:
        pass


@settings(max_examples=200, deadline=None)
@given(st.sampled_from(samples.frames()), st.data())
def test_mutated_frames_never_crash(msg, data):
    raw = bytearray(msg.to_bytes())
    i = data.draw(st.integers(0, len(raw) - 1))
    raw[i] = data.draw(st.integers(0, 255))
    try:
        out = wire.decode_frame(bytes(raw))
    except DecodeError:
        return
    assert out.to_bytes() == bytes(raw)


def test_frame_header_checks():
    raw = wire.KeygenDone().to_bytes()
    for bad in (raw[:2], raw + b"\x00", b"\x55" + raw[1:]):
        with pytest.raises(DecodeError):
            wire.decode_frame(bad)


def test_auth_response_counter_wraps():
    sig = group.EcdsaSignature(5, 6)
    resp = wire.U2fAuthenticationResponse(1, 2**32 + 7, sig)
    assert wire.U2fAuthenticationResponse.from_bytes(resp.to_bytes()).counter == 7


def test_signed_message_layout():
    m = wire.signed_message(1, b"a" * 32, b"c" * 32, b"i" * 32, 258)
    assert len(m) == 1 + 96 + 8
    assert m[0] == 1 and m[-2:] == b"\x01\x02"


def test_client_data_hash_binds_origin():
    assert wire.client_data_hash(b"x", "https://a") != wire.client_data_hash(b"x", "https://b")


def test_attestation_self_signature():
    cert = samples.u2f_messages()[-1]
    assert cert.self_signed_ok()
    other = wire.AttestationCert(group.G, cert.self_sig)
    assert not other.self_signed_ok()


def test_random_u2f_parsers_never_crash():
    rng = random.Random(8)
    parsers = [wire.U2fRegistrationRequest, wire.U2fRegistrationResponse, wire.U2fAuthenticationRequest,
               wire.U2fAuthenticationResponse, wire.AttestationCert]
    for _ in range(3000):
        data = bytes(rng.getrandbits(8) for _ in range(rng.randrange(200)))
        for cls in parsers:
            try:
                cls.from_bytes(data)
            except DecodeError:
                pass
