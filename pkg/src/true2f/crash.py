"""Power-loss sweeps over a counter trace.

For every operation of a random trace the flash is snapshotted, the
operation is replayed once per flash mutation it performs with power cut at
that mutation, and the recovered store is checked:

* every identity reads at least what it read before the operation,
  and never more than the number of increments issued so far;
* recovering a second time changes nothing;
* the next increment of the interrupted identity returns a fresh value.
"""

import random
from dataclasses import dataclass, field

from .counter import LOG, CounterStore
from .errors import PowerLoss
from .flash import CRASH_MODELS, ERASE_BUDGET, FlashSim


@dataclass
class CampaignResult:
    model: str
    ops: int = 0
    crash_points: int = 0
    gc_ops: int = 0
    gc_crash_points: int = 0
    lost_increments: int = 0
    violations: list = field(default_factory=list)

    def as_dict(self):
        return {
            "model": self.model,
            "ops": self.ops,
            "crash_points": self.crash_points,
            "gc_ops": self.gc_ops,
            "gc_crash_points": self.gc_crash_points,
            "lost_increments": self.lost_increments,
            "violations": list(self.violations),
        }


def make_trace(n_ops, n_ids, rng):
    ids = [rng.getrandbits(256).to_bytes(32, "big") for _ in range(n_ids)]
    return ids, [rng.choice(ids) for _ in range(n_ops)]


def _check_point(flash, snap, key, point, ids, before, issued, result):
    flash.restore(snap)
    st = CounterStore.recover(flash)
    flash.crash_after(point)
    try:
        st.inc(key)
        flash.cancel_crash()
        result.violations.append(f"crash point {point} was never reached")
        return
    except PowerLoss:
        pass
    rec = CounterStore.recover(flash)
    values = {k: rec.value(k) for k in ids}
    for k in ids:
        if values[k] < before[k]:
            result.violations.append(f"point {point}: value went back from {before[k]} to {values[k]}")
        if values[k] > issued:
            result.violations.append(f"point {point}: value {values[k]} exceeds {issued} increments")
    if values[key] == before[key]:
        result.lost_increments += 1
    mark = flash.mutations
    again = CounterStore.recover(flash)
    if flash.mutations != mark or any(again.value(k) != values[k] for k in ids):
        result.violations.append(f"point {point}: recovery is not idempotent")
    nxt = again.inc(key)
    if nxt != values[key] + 1 or nxt <= before[key]:
        result.violations.append(f"point {point}: next increment returned {nxt} after {values[key]}")


def run_crash_campaign(n_ops=500, n_ids=120, models=CRASH_MODELS, seed=0, erase_budget=ERASE_BUDGET):
    """Returns one :class:`CampaignResult` per crash model."""
    results = []
    for model in models:
        rng = random.Random(seed)
        ids, trace = make_trace(n_ops, n_ids, rng)
        flash = FlashSim(erase_budget=erase_budget, crash_model=model, rng=random.Random(seed + 1))
        st = CounterStore.create(flash)
        result = CampaignResult(model)
        for i, key in enumerate(trace):
            before = {k: st.value(k) for k in ids}
            snap = flash.snapshot()
            start, log_erases = flash.mutations, flash.erase_counts[LOG]
            st.inc(key)
            n_points = flash.mutations - start
            is_gc = flash.erase_counts[LOG] != log_erases
            after = flash.snapshot()
            for point in range(n_points):
                _check_point(flash, snap, key, point, ids, before, i + 1, result)
            flash.restore(after)
            result.ops += 1
            result.crash_points += n_points
            if is_gc:
                result.gc_ops += 1
                result.gc_crash_points += n_points
        results.append(result)
    return results
