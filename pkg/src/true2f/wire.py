"""Byte codecs: U2F raw messages toward the relying party and token frames.

Every ``decode_*`` function is total: on any input it returns a value or
raises :class:`DecodeError`.

U2F raw formats (all integers big-endian)::

    registration request   chal(32) | app(32)
    registration response  0x05 | user pk(65) | L(1) | key handle(L) | cert | sig DER
    auth request           control(1) | chal(32) | app(32) | L(1) | key handle(L)
    auth response          presence(1) | counter(4) | sig DER

``cert`` is ``SEQUENCE { OCTET STRING pk_att(65), OCTET STRING self-sig DER }``.

Token frames are ``tag(1) | length(2) | payload``; see :data:`FRAME_TYPES`.
"""

import hashlib
from dataclasses import dataclass

from . import group, vif, vrf
from .errors import DecodeError
from .group import EcdsaSignature, Point

KEY_HANDLE_LEN = 32
U2F_REGISTER_ID = 0x05
AUTH_ENFORCE = 0x03
AUTH_CHECK_ONLY = 0x07
AUTH_DONT_ENFORCE = 0x08


def sha256(data):
    return hashlib.sha256(data).digest()


def app_id_hash(app_id):
    return sha256(app_id.encode() if isinstance(app_id, str) else app_id)


def client_data_hash(challenge, origin):
    """The 32-byte ``chal``; the channel-ID input is zero-filled."""
    return sha256(challenge + origin.encode() + bytes(32))


def signed_message(presence, app_hash, chal, ident, counter):
    """What the token signs at authentication time."""
    return bytes([presence]) + app_hash + chal + ident + counter.to_bytes(8, "big")


# --- DER ---------------------------------------------------------------------


def _der_len(n):
    if n < 0x80:
        return bytes([n])
    body = n.to_bytes((n.bit_length() + 7) // 8, "big")
    return bytes([0x80 | len(body)]) + body


def der_tlv(tag, body):
    return bytes([tag]) + _der_len(len(body)) + body


def der_read(data, pos, tag):
    """Read one TLV with ``tag`` at ``pos``; returns ``(body, next_pos)``."""
    if pos + 2 > len(data):
        raise DecodeError("truncated DER")
    if data[pos] != tag:
        raise DecodeError(f"expected DER tag {tag:#x}, got {data[pos]:#x}")
    first = data[pos + 1]
    pos += 2
    if first < 0x80:
        n = first
    else:
        k = first & 0x7F
        if k == 0 or k > 2 or pos + k > len(data):
            raise DecodeError("bad DER length")
        n = int.from_bytes(data[pos : pos + k], "big")
        if n < 0x80 or data[pos] == 0:
            raise DecodeError("non-minimal DER length")
        pos += k
    if pos + n > len(data):
        raise DecodeError("truncated DER body")
    return data[pos : pos + n], pos + n


def _der_int(v):
    body = v.to_bytes(v.bit_length() // 8 + 1, "big")
    return der_tlv(0x02, body)


def _der_read_int(data, pos):
    body, pos = der_read(data, pos, 0x02)
    if not body:
        raise DecodeError("empty DER integer")
    if body[0] & 0x80:
        raise DecodeError("negative DER integer")
    if len(body) > 1 and body[0] == 0 and not body[1] & 0x80:
        raise DecodeError("non-minimal DER integer")
    return int.from_bytes(body, "big"), pos


def encode_der_signature(sig):
    return der_tlv(0x30, _der_int(sig.c) + _der_int(sig.s))


def decode_der_signature(data):
    data = bytes(data)
    body, end = der_read(data, 0, 0x30)
    if end != len(data):
        raise DecodeError("trailing bytes after DER signature")
    c, pos = _der_read_int(body, 0)
    s, pos = _der_read_int(body, pos)
    if pos != len(body):
        raise DecodeError("trailing bytes inside DER signature")
    if not (0 < c < group.Q and 0 < s < group.Q):
        raise DecodeError("signature scalar out of range")
    return EcdsaSignature(c, s)


def _split_der(data, pos, tag):
    """Return the raw bytes of the TLV at ``pos`` and the next position."""
    _, end = der_read(data, pos, tag)
    return data[pos:end], end


# --- attestation container -------------------------------------------------


@dataclass(frozen=True)
class AttestationCert:
    pk: Point
    self_sig: EcdsaSignature

    def to_bytes(self):
        body = der_tlv(0x04, self.pk.to_bytes(False)) + der_tlv(0x04, encode_der_signature(self.self_sig))
        return der_tlv(0x30, body)

    @classmethod
    def from_bytes(cls, data):
        data = bytes(data)
        body, end = der_read(data, 0, 0x30)
        if end != len(data):
            raise DecodeError("trailing bytes after certificate")
        pk_raw, pos = der_read(body, 0, 0x04)
        sig_raw, pos = der_read(body, pos, 0x04)
        if pos != len(body) or len(pk_raw) != 65:
            raise DecodeError("bad certificate body")
        return cls(Point.from_bytes(pk_raw, False), decode_der_signature(sig_raw))

    def self_signed_ok(self):
        return group.ecdsa_verify(self.pk, self.pk.to_bytes(False), self.self_sig)


# --- U2F raw messages ------------------------------------------------------


def _uncompressed(data):
    if len(data) != 65 or data[0] != 4:
        raise DecodeError("user public key must be 65-byte uncompressed")
    return Point.from_bytes(data, False)


@dataclass(frozen=True)
class U2fRegistrationRequest:
    chal: bytes
    app: bytes

    def to_bytes(self):
        return self.chal + self.app

    @classmethod
    def from_bytes(cls, data):
        if len(data) != 64:
            raise DecodeError("registration request must be 64 bytes")
        return cls(bytes(data[:32]), bytes(data[32:]))


@dataclass(frozen=True)
class U2fRegistrationResponse:
    pk: Point
    key_handle: bytes
    cert: AttestationCert
    sig: EcdsaSignature

    def to_bytes(self):
        return (
            bytes([U2F_REGISTER_ID])
            + self.pk.to_bytes(False)
            + bytes([len(self.key_handle)])
            + self.key_handle
            + self.cert.to_bytes()
            + encode_der_signature(self.sig)
        )

    @classmethod
    def from_bytes(cls, data):
        data = bytes(data)
        if len(data) < 67 or data[0] != U2F_REGISTER_ID:
            raise DecodeError("bad registration response header")
        pk = _uncompressed(data[1:66])
        n = data[66]
        if n != KEY_HANDLE_LEN or len(data) < 67 + n:
            raise DecodeError("key handle must be 32 bytes")
        key_handle = data[67 : 67 + n]
        cert_raw, pos = _split_der(data, 67 + n, 0x30)
        return cls(pk, key_handle, AttestationCert.from_bytes(cert_raw), decode_der_signature(data[pos:]))


@dataclass(frozen=True)
class U2fAuthenticationRequest:
    control: int
    chal: bytes
    app: bytes
    key_handle: bytes

    def to_bytes(self):
        return bytes([self.control]) + self.chal + self.app + bytes([len(self.key_handle)]) + self.key_handle

    @classmethod
    def from_bytes(cls, data):
        data = bytes(data)
        if len(data) < 66:
            raise DecodeError("truncated authentication request")
        if data[0] not in (AUTH_ENFORCE, AUTH_CHECK_ONLY, AUTH_DONT_ENFORCE):
            raise DecodeError(f"unknown control byte {data[0]:#x}")
        n = data[65]
        if len(data) != 66 + n:
            raise DecodeError("key handle length mismatch")
        return cls(data[0], data[1:33], data[33:65], data[66:])


@dataclass(frozen=True)
class U2fAuthenticationResponse:
    presence: int
    counter: int
    sig: EcdsaSignature

    def to_bytes(self):
        return bytes([self.presence]) + (self.counter % 2**32).to_bytes(4, "big") + encode_der_signature(self.sig)

    @classmethod
    def from_bytes(cls, data):
        data = bytes(data)
        if len(data) < 5:
            raise DecodeError("truncated authentication response")
        if data[0] not in (0, 1):
            raise DecodeError("presence byte must be 0x00 or 0x01")
        return cls(data[0], int.from_bytes(data[1:5], "big"), decode_der_signature(data[5:]))


# --- token frames ----------------------------------------------------------

FRAME_TYPES = {}


def frame(tag):
    def register(cls):
        cls.TAG = tag
        FRAME_TYPES[tag] = cls
        return cls

    return register


def _fixed(payload, n):
    if len(payload) != n:
        raise DecodeError(f"payload must be {n} bytes, got {len(payload)}")
    return payload


class _Message:
    def to_bytes(self):
        payload = self.payload()
        return bytes([self.TAG]) + len(payload).to_bytes(2, "big") + payload


@frame(0x01)
@dataclass(frozen=True)
class KeygenCommit(_Message):
    c: bytes

    def payload(self):
        return self.c

    @classmethod
    def parse(cls, p):
        return cls(_fixed(p, 32))


@dataclass(frozen=True)
class _PointMsg(_Message):
    point: Point

    def payload(self):
        return self.point.to_bytes()

    @classmethod
    def parse(cls, p):
        return cls(Point.from_bytes(_fixed(p, 33)))


@dataclass(frozen=True)
class _OpenMsg(_Message):
    v: int
    r: int

    def payload(self):
        return group.scalar_to_bytes(self.v) + group.scalar_to_bytes(self.r)

    @classmethod
    def parse(cls, p):
        _fixed(p, 64)
        return cls(group.scalar_from_bytes(p[:32]), group.scalar_from_bytes(p[32:]))


@dataclass(frozen=True)
class _EmptyMsg(_Message):
    def payload(self):
        return b""

    @classmethod
    def parse(cls, p):
        _fixed(p, 0)
        return cls()


@frame(0x02)
class KeygenShare(_PointMsg):
    pass


@frame(0x03)
class KeygenOpen(_OpenMsg):
    pass


@frame(0x04)
class KeygenDone(_EmptyMsg):
    pass


@frame(0x10)
@dataclass(frozen=True)
class RegisterRequest(_Message):
    ident: bytes
    hints: vrf.SqrtHints

    def payload(self):
        roots = b"".join(r.to_bytes(32, "big") for r in self.hints.roots)
        return self.ident + bytes([len(self.hints)]) + roots

    @classmethod
    def parse(cls, p):
        if len(p) < 33 or p[32] == 0 or len(p) != 33 + 32 * p[32]:
            raise DecodeError("bad registration request payload")
        roots = tuple(int.from_bytes(p[33 + 32 * i : 65 + 32 * i], "big") for i in range(p[32]))
        if any(r >= group.P for r in roots):
            raise DecodeError("hint out of field range")
        return cls(p[:32], vrf.SqrtHints(roots))


@frame(0x11)
@dataclass(frozen=True)
class RegisterResponse(_Message):
    pk: Point
    proof: vif.VifProof
    tag: bytes

    def payload(self):
        return self.pk.to_bytes() + self.proof.to_bytes() + self.tag

    @classmethod
    def parse(cls, p):
        _fixed(p, 33 + vif.PROOF_LEN + 32)
        return cls(Point.from_bytes(p[:33]), vif.VifProof.from_bytes(p[33:162]), p[162:])


@frame(0x20)
@dataclass(frozen=True)
class AuthRequest(_Message):
    app: bytes
    chal: bytes
    ident: bytes
    presence: int
    y: int
    tag: bytes
    c: bytes

    def payload(self):
        return (
            self.app + self.chal + self.ident + bytes([self.presence])
            + group.scalar_to_bytes(self.y) + self.tag + self.c
        )

    @classmethod
    def parse(cls, p):
        _fixed(p, 193)
        if p[96] not in (0, 1):
            raise DecodeError("presence flag must be 0 or 1")
        return cls(p[:32], p[32:64], p[64:96], p[96], group.scalar_from_bytes(p[97:129]), p[129:161], p[161:])


@frame(0x21)
class SignShare(_PointMsg):
    pass


@frame(0x22)
class SignOpen(_OpenMsg):
    pass


@frame(0x23)
@dataclass(frozen=True)
class SignatureMsg(_Message):
    sig: EcdsaSignature

    def payload(self):
        return self.sig.to_bytes()

    @classmethod
    def parse(cls, p):
        return cls(EcdsaSignature.from_bytes(_fixed(p, 64)))


@frame(0x24)
class SignRestart(KeygenCommit):
    pass


@frame(0x25)
class NonceRejectedMsg(_EmptyMsg):
    pass


@frame(0x7F)
@dataclass(frozen=True)
class ErrorMsg(_Message):
    code: int

    def payload(self):
        return bytes([self.code])

    @classmethod
    def parse(cls, p):
        return cls(_fixed(p, 1)[0])


ERR_ORDER = 1
ERR_KEYGEN = 2
ERR_HINTS = 3
ERR_MAC = 4
ERR_EXHAUSTED = 5
ERR_DECODE = 6
ERR_FAILED = 7
ERR_INTERNAL = 8


def decode_frame(data):
    data = bytes(data)
    if len(data) < 3:
        raise DecodeError("truncated frame header")
    cls = FRAME_TYPES.get(data[0])
    if cls is None:
        raise DecodeError(f"unknown frame tag {data[0]:#x}")
    n = int.from_bytes(data[1:3], "big")
    if len(data) != 3 + n:
        raise DecodeError("frame length mismatch")
    return cls.parse(data[3:])
