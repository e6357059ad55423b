import pytest

from true2f.counter import PAGE_A, PAGE_B, W_MARKER, CounterStore
from true2f.crash import make_trace, run_crash_campaign
from true2f.errors import PowerLoss
from true2f.flash import FlashSim, ONES


def test_no_crash_control_run():
    import random

    ids, trace = make_trace(300, 20, random.Random(0))
    st = CounterStore.create()
    oracle = dict.fromkeys(ids, 0)
    for k in trace:
        oracle[k] += 1
        st.inc(k)
    assert {k: st.value(k) for k in ids} == oracle


@pytest.mark.parametrize("model", ["random", "zeros"])
def test_small_campaign(model):
    (res,) = run_crash_campaign(n_ops=150, n_ids=30, models=[model], seed=2)
    assert res.violations == []
    assert res.crash_points > res.ops
    assert res.gc_ops >= 1 and res.gc_crash_points > 0


@pytest.mark.parametrize("model", ["random", "zeros"])
def test_crash_mid_gc_reruns_collection(model):
    flash = FlashSim(crash_model=model)
    st = CounterStore.create(flash)
    keys = [bytes([i]) * 32 for i in range(10)]
    i = 0
    while st.free_slots >= 8:
        st.inc(keys[i % 10])
        i += 1
    before = {k: st.value(k) for k in keys}
    # the next hash append no longer fits: garbage collection runs first
    flash.crash_after(2)
    with pytest.raises(PowerLoss):
        st.inc(b"\xee" * 32)
    page = st.active
    assert flash.read(page, W_MARKER) != ONES
    rec = CounterStore.recover(flash)
    assert rec.active != page
    assert flash.read(rec.active, W_MARKER) == ONES
    assert {k: rec.value(k) for k in keys} == before
    assert rec.inc(keys[0]) == before[keys[0]] + 1
