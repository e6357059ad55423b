"""Per-identity counters in one log page and two data pages of NOR flash.

Flash layout (page 0 is the log, pages 1 and 2 are data pages A and B)::

    data page, 32-bit words
      0        serial   (s << 16) | (~s & 0xffff), written last
      1        digest   first 4 bytes of SHA-256 over words 0, 2, 3, 6..505
      2, 3     overflow counter (34 bits, word 2 holds the top bits)
      4        GC marker (s << 16) | (~s & 0xffff) of this page, set while
               this page's contents are being copied to the other page
      5        log-clean flag, 0 once the log was erased for this page
      6..505   100 table entries of 5 words: 126-bit hash << 34 | count
      506..511 unused

    log page, 1024 little-endian 16-bit slots (slot 2k is the low half of word k)
      0xffff             end of log
      bit 15             invalid, cleared last
      bit 14 = 1         pointer: bits 13..7 table index, bits 6..0 ones
      bit 14 = 0         hash entry: 8 slots, 128 bits with the top two
                         being the invalid and type bits, then the 126-bit hash

The page with the larger serial is active. A counter reads as its table
count (or the overflow value when absent) plus its log occurrences.
"""

import hashlib
import struct

from .errors import CounterExhausted
from .flash import ONES, FlashSim

LOG, PAGE_A, PAGE_B = 0, 1, 2
LOG_SLOTS = 1024
HASH_SLOTS = 8
TABLE_SIZE = 100
ENTRY_WORDS = 5
HASH_BITS = 126
COUNT_BITS = 34
COUNT_MASK = (1 << COUNT_BITS) - 1
HASH_MASK = (1 << HASH_BITS) - 1
EMPTY_ENTRY = (1 << (HASH_BITS + COUNT_BITS)) - 1
DEAD_SLOT = 0xC07F

W_SERIAL, W_DIGEST, W_OVF_HI, W_OVF_LO, W_MARKER, W_CLEAN, W_TABLE = range(7)
_DIGEST_WORDS = [W_SERIAL, W_OVF_HI, W_OVF_LO, *range(W_TABLE, W_TABLE + TABLE_SIZE * ENTRY_WORDS)]

WORST_CASE_PER_ERASE = LOG_SLOTS // HASH_SLOTS
BEST_CASE_PER_ERASE = LOG_SLOTS


def identity_hash(key):
    """Top 126 bits of SHA-256(key)."""
    return int.from_bytes(hashlib.sha256(key).digest(), "big") >> (256 - HASH_BITS)


def encode_serial(s):
    return (s << 16) | (~s & 0xFFFF)


def decode_serial(word):
    s = word >> 16
    return s if word & 0xFFFF == ~s & 0xFFFF else None


def _other(page):
    return PAGE_B if page == PAGE_A else PAGE_A


class CounterStore:
    """Counter state mirrored in memory and persisted to ``flash``.

    Use :meth:`create` for a fresh flash and :meth:`recover` after a reboot.
    """

    def __init__(self, flash):
        self.flash = flash
        self.active = PAGE_A
        self.serial = 0
        self.overflow = 0
        self.table = [None] * TABLE_SIZE
        self.index = {}
        self.log = []
        self.log_counts = {}
        self.used_slots = 0

    @classmethod
    def create(cls, flash=None, **flash_kwargs):
        st = cls(flash if flash is not None else FlashSim(**flash_kwargs))
        st._initialize()
        return st

    @classmethod
    def rebuild(cls, flash, active, serial, overflow, entries, log, dead_slots=0):
        """Lay out a blank flash so that it holds exactly the given logical state."""
        st = cls(flash)
        st._write_page(active, serial, entries, overflow)
        flash.write(active, W_CLEAN, 0)
        st._load_page(active, serial, entries, overflow)
        for h in log:
            st._append(h)
        for _ in range(dead_slots):
            st._write_slot(st.used_slots, DEAD_SLOT)
            st.used_slots += 1
        return st

    @classmethod
    def recover(cls, flash):
        st = cls(flash)
        st._recover()
        return st

    # --- reading ------------------------------------------------------------

    def value_of_hash(self, h):
        idx = self.index.get(h)
        base = self.overflow if idx is None else self.table[idx][1]
        return base + self.log_counts.get(h, 0)

    def value(self, key):
        return self.value_of_hash(identity_hash(key))

    def values(self):
        """Every identity the store knows by name, with its current value."""
        hashes = set(self.index) | set(self.log_counts)
        return {h: self.value_of_hash(h) for h in hashes}

    @property
    def free_slots(self):
        return LOG_SLOTS - self.used_slots

    # --- incrementing -------------------------------------------------------

    def inc(self, key):
        return self.inc_hash(identity_hash(key))

    def inc_hash(self, h):
        if self.free_slots < self._entry_slots(h):
            self.garbage_collect()
        self._append(h)
        return self.value_of_hash(h)

    def _append(self, h):
        if h in self.index:
            self._append_pointer(self.index[h])
        else:
            self._append_hash(h)
        self.log.append(h)
        self.log_counts[h] = self.log_counts.get(h, 0) + 1

    def _entry_slots(self, h):
        return 1 if h in self.index else HASH_SLOTS

    def _write_slot(self, slot, hw):
        word, high = divmod(slot, 2)
        value = (hw << 16) | 0xFFFF if high else 0xFFFF0000 | hw
        self.flash.write(LOG, word, value)

    def _read_slot(self, slot):
        word = self.flash.read(LOG, slot // 2)
        return (word >> 16) if slot % 2 else word & 0xFFFF

    def _append_pointer(self, idx):
        slot = self.used_slots
        hw = 0x4000 | (idx << 7) | 0x7F
        self.used_slots += 1
        self._write_slot(slot, 0x8000 | hw)
        self._write_slot(slot, hw)

    def _append_hash(self, h):
        slot = self.used_slots
        self.used_slots += HASH_SLOTS
        entry = (1 << 127) | h
        halves = [(entry >> (16 * (7 - i))) & 0xFFFF for i in range(HASH_SLOTS)]
        for i, hw in enumerate(halves):
            self._write_slot(slot + i, hw)
        self._write_slot(slot, halves[0] & 0x7FFF)

    # --- garbage collection -------------------------------------------------

    def garbage_collect(self):
        """Compact log and table into the inactive page, which becomes active."""
        target = _other(self.active)
        if self.flash.erases_left(LOG) < 1 or self.flash.erases_left(target) < 1:
            raise CounterExhausted("flash erase budget exhausted")
        if self.flash.read(self.active, W_MARKER) == ONES:
            self.flash.write(self.active, W_MARKER, encode_serial(self.serial))
        self._copy_to(target)

    def _select(self):
        merged = self.values()
        chosen, seen = [], set()
        for h in reversed(self.log):
            if h not in seen:
                seen.add(h)
                chosen.append(h)
        chosen = chosen[:TABLE_SIZE]
        rest = sorted((h for h in self.index if h not in seen), key=lambda h: (-merged[h], h))
        chosen += rest[: TABLE_SIZE - len(chosen)]
        kept = set(chosen)
        evicted = [merged[h] for h in merged if h not in kept]
        overflow = max([self.overflow, *evicted])
        return [(h, merged[h]) for h in chosen], overflow

    def _copy_to(self, target):
        entries, overflow = self._select()
        serial = self.serial + 1
        self.flash.erase(target)
        self._write_page(target, serial, entries, overflow)
        self._load_page(target, serial, entries, overflow)
        self._clean_log()

    def _write_page(self, target, serial, entries, overflow):
        words = {W_OVF_HI: overflow >> 32, W_OVF_LO: overflow & ONES}
        for i, (h, count) in enumerate(entries):
            packed = (h << COUNT_BITS) | count
            for j in range(ENTRY_WORDS):
                words[W_TABLE + i * ENTRY_WORDS + j] = (packed >> (32 * (ENTRY_WORDS - 1 - j))) & ONES
        for idx, w in sorted(words.items()):
            self.flash.write(target, idx, w)
        words[W_SERIAL] = encode_serial(serial)
        self.flash.write(target, W_DIGEST, _digest(lambda i: words.get(i, ONES)))
        self.flash.write(target, W_SERIAL, words[W_SERIAL])

    def _clean_log(self):
        self.flash.erase(LOG)
        self.flash.write(self.active, W_CLEAN, 0)
        self.log = []
        self.log_counts = {}
        self.used_slots = 0

    def _load_page(self, page, serial, entries, overflow):
        self.active = page
        self.serial = serial
        self.overflow = overflow
        self.table = [None] * TABLE_SIZE
        self.index = {}
        for i, (h, count) in enumerate(entries):
            self.table[i] = [h, count]
            self.index[h] = i

    # --- initialization and recovery ----------------------------------------

    def _initialize(self):
        for page in (LOG, PAGE_A, PAGE_B):
            if not self.flash.page_is_blank(page):
                self.flash.erase(page)
        for page, serial in ((PAGE_B, 0), (PAGE_A, 1)):
            words = {W_SERIAL: encode_serial(serial), W_OVF_HI: 0, W_OVF_LO: 0}
            self.flash.write(page, W_OVF_HI, 0)
            self.flash.write(page, W_OVF_LO, 0)
            self.flash.write(page, W_DIGEST, _digest(lambda i: words.get(i, ONES)))
            self.flash.write(page, W_SERIAL, words[W_SERIAL])
            self.flash.write(page, W_CLEAN, 0)
        self._load_page(PAGE_A, 1, [], 0)

    def _page_serial(self, page):
        read = lambda i: self.flash.read(page, i)
        serial = decode_serial(read(W_SERIAL))
        if serial is None or read(W_DIGEST) != _digest(read):
            return None
        return serial

    def _recover(self):
        serials = {p: self._page_serial(p) for p in (PAGE_A, PAGE_B)}
        valid = [p for p, s in serials.items() if s is not None]
        if not valid:
            self._initialize()
            return
        page = max(valid, key=lambda p: serials[p])
        overflow = (self.flash.read(page, W_OVF_HI) << 32) | self.flash.read(page, W_OVF_LO)
        entries = []
        for i in range(TABLE_SIZE):
            packed = 0
            for j in range(ENTRY_WORDS):
                packed = (packed << 32) | self.flash.read(page, W_TABLE + i * ENTRY_WORDS + j)
            if packed != EMPTY_ENTRY:
                entries.append((packed >> COUNT_BITS, packed & COUNT_MASK))
        self._load_page(page, serials[page], entries, overflow)
        if self.flash.read(page, W_CLEAN) != 0:
            self._clean_log()
        else:
            self._parse_log()
        if self.flash.read(page, W_MARKER) != ONES:
            self.garbage_collect()

    def _parse_log(self):
        slot = 0
        while slot < LOG_SLOTS:
            hw = self._read_slot(slot)
            if hw == 0xFFFF:
                break
            invalid = hw >> 15
            if hw & 0x4000:
                idx = (hw >> 7) & 0x7F
                if not invalid and idx < TABLE_SIZE and self.table[idx] is not None:
                    self.log.append(self.table[idx][0])
                slot += 1
                continue
            if slot + HASH_SLOTS > LOG_SLOTS:
                slot = LOG_SLOTS
                break
            if not invalid:
                entry = 0
                for i in range(HASH_SLOTS):
                    entry = (entry << 16) | self._read_slot(slot + i)
                self.log.append(entry & HASH_MASK)
            slot += HASH_SLOTS
        self.used_slots = slot
        for h in self.log:
            self.log_counts[h] = self.log_counts.get(h, 0) + 1

    # --- reporting ----------------------------------------------------------

    def erases_remaining(self):
        return self.flash.erases_left(LOG)

    def capacity_report(self):
        remaining = self.erases_remaining()
        headroom = self.free_slots // HASH_SLOTS if not self.index else self.free_slots
        return {
            "worst_case_remaining": remaining * WORST_CASE_PER_ERASE,
            "best_case_remaining": headroom + max(remaining - 1, 0) * BEST_CASE_PER_ERASE,
        }


def _digest(read):
    data = struct.pack(f">{len(_DIGEST_WORDS)}I", *(read(i) for i in _DIGEST_WORDS))
    return int.from_bytes(hashlib.sha256(data).digest()[:4], "big")


class GlobalCounter:
    """One counter shared by every identity. Same interface as CounterStore."""

    def __init__(self, start=0):
        self.count = start

    def inc(self, key):
        self.count += 1
        return self.count

    def value(self, key):
        return self.count

