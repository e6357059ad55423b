import random

import pytest

from true2f.errors import FlashViolation, PowerLoss
from true2f.flash import MAX_WRITES, ONES, PAGE_WORDS, FlashSim


def test_write_only_clears_bits():
    f = FlashSim()
    f.write(0, 3, 0xF0F0F0F0)
    f.write(0, 3, 0xFFFF0000)
    assert f.read(0, 3) == 0xF0F00000


def test_write_limit():
    f = FlashSim()
    for _ in range(MAX_WRITES):
        f.write(1, 0, ONES)
    with pytest.raises(FlashViolation):
        f.write(1, 0, 0)
    f.erase(1)
    f.write(1, 0, 0)


def test_erase_budget():
    f = FlashSim(erase_budget=2)
    f.erase(0)
    f.erase(0)
    assert f.erases_left(0) == 0
    with pytest.raises(FlashViolation):
        f.erase(0)
    f.erase(1)


def test_crash_on_write_leaves_partial_bits():
    f = FlashSim(crash_model="zeros")
    f.crash_after(1)
    f.write(0, 0, 0x0000FFFF)
    with pytest.raises(PowerLoss):
        f.write(0, 1, 0x0000FFFF)
    # zeros model: undetermined bits read as 0, so the write landed in full
    assert f.read(0, 1) == 0x0000FFFF
    f.write(0, 2, 0)


def test_crash_on_write_random_stays_between_old_and_new():
    for seed in range(20):
        f = FlashSim(rng=random.Random(seed))
        f.crash_after(0)
        with pytest.raises(PowerLoss):
            f.write(0, 0, 0x12345678)
        w = f.read(0, 0)
        assert w & 0x12345678 == 0x12345678


def test_crash_on_erase():
    f = FlashSim(crash_model="zeros")
    f.write(2, 5, 0)
    f.crash_after(0)
    with pytest.raises(PowerLoss):
        f.erase(2)
    assert not f.page_is_blank(2)
    assert f.erase_counts[2] == 1


def test_snapshot_restore_and_image():
    f = FlashSim()
    f.write(1, 10, 0xABCD)
    snap = f.snapshot()
    f.write(1, 11, 0)
    f.restore(snap)
    assert f.read(1, 11) == ONES
    g = FlashSim.from_bytes(f.to_bytes())
    assert g.words == f.words
    assert len(f.to_bytes()) == 3 * PAGE_WORDS * 4
    with pytest.raises(ValueError):
        FlashSim.from_bytes(b"123")


def test_unknown_crash_model():
    with pytest.raises(ValueError):
        FlashSim(crash_model="sometimes")
