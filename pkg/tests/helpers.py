"""Shared test utilities: light-weight ensemble statistics and naive oracles."""

from __future__ import annotations

from dataclasses import dataclass

from oee_ca.ensemble import SamplePlan, config_for_tuple, draw_plan
from oee_ca.innovation import is_eca_reproducible
from oee_ca.recurrence import build_report
from oee_ca.variants import run_trajectory


@dataclass(frozen=True)
class LightStats:
    oee_percent: float
    inn_percent: float
    ue_percent: float
    n_live: int
    n_censored: int


def light_stats(plan: SamplePlan, tuples=None) -> LightStats:
    """OEE/INN/UE percentages without the complexity pipeline (fast path)."""
    if tuples is None:
        tuples = draw_plan(plan)
    n = n_oee = n_inn = n_ue = n_cens = 0
    for i, tup in enumerate(tuples):
        config = config_for_tuple(plan, i, tup)
        traj = run_trajectory(config, plan.step_cap)
        rep = build_report(traj)
        if rep.censored:
            n_cens += 1
            continue
        n += 1
        states = [s.s_o for s in traj.snapshots]
        end = min(max(rep.t_r, 1), len(states) - 1)
        inn = end >= 1 and is_eca_reproducible(states[:end + 1]) is None
        n_inn += inn
        n_ue += bool(rep.ue)
        n_oee += bool(rep.ue and inn)
    if n == 0:
        raise ValueError("all executions censored")
    return LightStats(100.0 * n_oee / n, 100.0 * n_inn / n, 100.0 * n_ue / n,
                      n, n_cens)


def naive_cycle(step_fn, initial) -> tuple[int, int]:
    """(pre_period, period) by storing every visited value (test oracle)."""
    seen = {initial: 0}
    cur = initial
    t = 0
    while True:
        cur = step_fn(cur)
        t += 1
        if cur in seen:
            return seen[cur], t - seen[cur]
        seen[cur] = t
