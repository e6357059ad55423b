"""Bit-accurate NOR flash simulator.

Pages are 2048 bytes (512 little-endian 32-bit words). A write can only
clear bits (the stored word becomes ``old & value``), a word may be written
at most 8 times between erases, and each page has a lifetime erase budget.
Breaking any of these raises :class:`FlashViolation`.

Power loss is injected with ``crash_after(n)``: the ``n``-th mutation from
now (0 based) is only partly applied and then :class:`PowerLoss` is raised.
The bits a write was clearing, or every bit of an erased page, become
indeterminate. ``"random"`` fills them with random bits, ``"zeros"`` with
zeros.
"""

import random
import struct

from .errors import FlashViolation, PowerLoss

PAGE_WORDS = 512
PAGE_BYTES = PAGE_WORDS * 4
MAX_WRITES = 8
ERASE_BUDGET = 50_000
ONES = 0xFFFFFFFF
CRASH_MODELS = ("random", "zeros")


class FlashSim:
    def __init__(self, n_pages=3, erase_budget=ERASE_BUDGET, crash_model="random", rng=None):
        if crash_model not in CRASH_MODELS:
            raise ValueError(f"crash model must be one of {CRASH_MODELS}")
        self.n_pages = n_pages
        self.erase_budget = erase_budget
        self.crash_model = crash_model
        self.rng = rng or random.Random()
        self.words = [[ONES] * PAGE_WORDS for _ in range(n_pages)]
        self.write_counts = [[0] * PAGE_WORDS for _ in range(n_pages)]
        self.erase_counts = [0] * n_pages
        self.mutations = 0
        self._crash_at = None

    def read(self, page, idx):
        return self.words[page][idx]

    def page_is_blank(self, page):
        return all(w == ONES for w in self.words[page])

    def erases_left(self, page):
        return self.erase_budget - self.erase_counts[page]

    def crash_after(self, n):
        self._crash_at = self.mutations + n

    def cancel_crash(self):
        self._crash_at = None

    def _crashing(self):
        crash = self._crash_at is not None and self.mutations == self._crash_at
        self.mutations += 1
        if crash:
            self._crash_at = None
        return crash

    def _noise(self):
        return self.rng.getrandbits(32) if self.crash_model == "random" else 0

    def write(self, page, idx, value):
        value &= ONES
        if self.write_counts[page][idx] >= MAX_WRITES:
            raise FlashViolation(f"word {idx} of page {page} written more than {MAX_WRITES} times")
        old = self.words[page][idx]
        self.write_counts[page][idx] += 1
        if self._crashing():
            clearing = old & ~value
            self.words[page][idx] = old & ~(clearing & ~self._noise())
            raise PowerLoss(f"write page {page} word {idx}")
        self.words[page][idx] = old & value

    def erase(self, page):
        if self.erase_counts[page] >= self.erase_budget:
            raise FlashViolation(f"page {page} erase budget of {self.erase_budget} exhausted")
        self.erase_counts[page] += 1
        self.write_counts[page] = [0] * PAGE_WORDS
        if self._crashing():
            self.words[page] = [self._noise() for _ in range(PAGE_WORDS)]
            raise PowerLoss(f"erase page {page}")
        self.words[page] = [ONES] * PAGE_WORDS

    def snapshot(self):
        return (
            [list(p) for p in self.words],
            [list(p) for p in self.write_counts],
            list(self.erase_counts),
        )

    def restore(self, snap):
        words, counts, erases = snap
        self.words = [list(p) for p in words]
        self.write_counts = [list(p) for p in counts]
        self.erase_counts = list(erases)
        self._crash_at = None

    def to_bytes(self):
        return b"".join(struct.pack(f"<{PAGE_WORDS}I", *p) for p in self.words)

    @classmethod
    def from_bytes(cls, data, **kwargs):
        n_pages, rem = divmod(len(data), PAGE_BYTES)
        if rem or not n_pages:
            raise ValueError(f"flash image must be a multiple of {PAGE_BYTES} bytes")
        flash = cls(n_pages, **kwargs)
        for p in range(n_pages):
            flash.words[p] = list(struct.unpack_from(f"<{PAGE_WORDS}I", data, p * PAGE_BYTES))
        return flash
