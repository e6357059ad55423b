"""Browser audit state as a canonical byte blob, for moving between browsers.

Layout (multi-byte integers little-endian unless noted)::

    header     "T2FS" | version u8 | flags u8 | registrations u32 | records u16
               flags: bit 0 token failed, bit 1 data page B active, bit 2 global counter
    mpk        X (33) | pkVRF (33)
    counter    global mode: count u40
               otherwise:   serial u16 | overflow u40 | erase counts 3 x u32 | erase budget u32
                            | used log slots u16 | table size u8
                            | table entries: record index u16 | count u40
                            | log entries u16 | log entries, each either
                              one byte 0x80 | table index (a pointer), or
                              two bytes big-endian record index < 0x8000 (a hash)
    records    sorted by key: key (32) | y (32) | tag (32)
               key = SHA-256(appID hash | key handle); pk is rebuilt as X^y
    checksum   SHA-256 of everything above

Every counter identity is the hash of some record key, so the counter
section refers to records by index instead of repeating 126-bit hashes.
"""

import hashlib
import struct

from . import group, vif
from .browser import Browser, IdentityRecord
from .counter import HASH_BITS, HASH_SLOTS, LOG_SLOTS, PAGE_B, TABLE_SIZE, CounterStore, GlobalCounter
from .errors import DecodeError, SyncImportError
from .flash import FlashSim

MAGIC = b"T2FS"
VERSION = 1
RECORD_LEN = 96
F_FAILED, F_PAGE_B, F_GLOBAL = 1, 2, 4


def size_bound(n_identities):
    return 4162 + 97 * n_identities


def _counter_hash(key):
    # the counter hashes appID hash | key handle, whose SHA-256 is the record key
    return int.from_bytes(key, "big") >> (256 - HASH_BITS)


def _u40(v):
    return v.to_bytes(5, "little")


def export_state(browser):
    keys = sorted(browser.records)
    index = {_counter_hash(k): i for i, k in enumerate(keys)}
    st = browser.counter
    flags = F_FAILED * browser.token_failed
    out = bytearray()
    if isinstance(st, GlobalCounter):
        flags |= F_GLOBAL
        counter = _u40(st.count)
    else:
        flags |= F_PAGE_B * (st.active == PAGE_B)
        counter = _export_counter(st, index)
    out += MAGIC + struct.pack("<BBIH", VERSION, flags, browser.registration_count, len(keys))
    out += browser.mpk.to_bytes() + counter
    for k in keys:
        rec = browser.records[k]
        out += k + group.scalar_to_bytes(rec.y) + rec.tag
    return bytes(out + hashlib.sha256(out).digest())


def _export_counter(st, index):
    flash = st.flash
    out = bytearray(struct.pack("<H", st.serial) + _u40(st.overflow))
    out += struct.pack("<IIII", *flash.erase_counts, flash.erase_budget)
    table = [e for e in st.table if e is not None]
    out += struct.pack("<HB", st.used_slots, len(table))
    for h, count in table:
        out += struct.pack("<H", _record_index(index, h)) + _u40(count)
    out += struct.pack("<H", len(st.log))
    for h in st.log:
        if h in st.index:
            out.append(0x80 | st.index[h])
        else:
            out += _record_index(index, h).to_bytes(2, "big")
    return bytes(out)


def _record_index(index, h):
    try:
        return index[h]
    except KeyError:
        raise ValueError("counter holds an identity with no browser record") from None


class _Reader:
    def __init__(self, data):
        self.data = data
        self.pos = 0

    def take(self, n):
        if self.pos + n > len(self.data):
            raise SyncImportError("truncated sync state")
        chunk = self.data[self.pos : self.pos + n]
        self.pos += n
        return chunk

    def unpack(self, fmt):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))

    def u40(self):
        return int.from_bytes(self.take(5), "little")


def import_state(blob, channel, rng=None):
    """Rebuild a :class:`Browser` bound to ``channel``. Nothing is kept on failure."""
    try:
        return _import(bytes(blob), channel, rng)
    except SyncImportError:
        raise
    except (DecodeError, ValueError, IndexError, struct.error) as exc:
        raise SyncImportError(f"corrupt sync state: {exc}") from exc


def _import(blob, channel, rng):
    if len(blob) < 32 or hashlib.sha256(blob[:-32]).digest() != blob[-32:]:
        raise SyncImportError("checksum mismatch")
    rd = _Reader(blob[:-32])
    if rd.take(4) != MAGIC:
        raise SyncImportError("bad magic")
    version, flags, registrations, n_records = rd.unpack("<BBIH")
    if version != VERSION or flags & ~(F_FAILED | F_PAGE_B | F_GLOBAL):
        raise SyncImportError("unsupported version or flags")
    mpk = vif.MasterPublicKey.from_bytes(rd.take(vif.MPK_LEN))
    if flags & F_GLOBAL:
        counter_fields = rd.u40()
    else:
        counter_fields = _read_counter(rd)
    keys, records = [], {}
    for _ in range(n_records):
        k, y, tag = rd.take(32), group.scalar_from_bytes(rd.take(32)), rd.take(32)
        if keys and k <= keys[-1]:
            raise SyncImportError("records out of order")
        if y == 0:
            raise SyncImportError("zero VRF output")
        keys.append(k)
        records[k] = IdentityRecord(y, tag, group.scalar_mult(mpk.X, y))
    if rd.pos != len(rd.data):
        raise SyncImportError("trailing bytes")

    if flags & F_GLOBAL:
        counter = GlobalCounter(counter_fields)
    else:
        counter = _build_counter(counter_fields, keys, PAGE_B if flags & F_PAGE_B else 1)
    browser = Browser(channel, rng=rng, counter=counter)
    browser.mpk = mpk
    browser.records = records
    browser.token_failed = bool(flags & F_FAILED)
    browser.registration_count = registrations
    return browser


def _read_counter(rd):
    serial = rd.unpack("<H")[0]
    overflow = rd.u40()
    erases = list(rd.unpack("<III"))
    budget = rd.unpack("<I")[0]
    used, n_table = rd.unpack("<HB")
    if n_table > TABLE_SIZE or used > LOG_SLOTS:
        raise SyncImportError("counter section out of range")
    table = [(rd.unpack("<H")[0], rd.u40()) for _ in range(n_table)]
    log = []
    for _ in range(rd.unpack("<H")[0]):
        first = rd.take(1)[0]
        if first & 0x80:
            idx = first & 0x7F
            if idx >= n_table:
                raise SyncImportError("pointer past the end of the table")
            log.append(("ptr", idx))
        else:
            log.append(("hash", (first << 8) | rd.take(1)[0]))
    return serial, overflow, erases, budget, used, table, log


def _build_counter(fields, keys, active):
    serial, overflow, erases, budget, used, table, log = fields
    hashes = [_counter_hash(k) for k in keys]
    try:
        entries = [(hashes[i], count) for i, count in table]
        log_hashes = [entries[v][0] if kind == "ptr" else hashes[v] for kind, v in log]
    except IndexError:
        raise SyncImportError("record index out of range") from None
    if len({h for h, _ in entries}) != len(entries):
        raise SyncImportError("duplicate table entry")
    table_hashes = {h for h, _ in entries}
    if any(kind == "hash" and hashes[v] in table_hashes for kind, v in log):
        raise SyncImportError("hash entry for an identity that is in the table")
    slots = sum(1 if kind == "ptr" else HASH_SLOTS for kind, _ in log)
    if slots > used:
        raise SyncImportError("log entries exceed used slots")
    if any(c >> 34 for _, c in entries) or overflow >> 34:
        raise SyncImportError("count wider than 34 bits")
    flash = FlashSim(erase_budget=budget)
    flash.erase_counts = erases
    return CounterStore.rebuild(flash, active, serial, overflow, entries, log_hashes, used - slots)
