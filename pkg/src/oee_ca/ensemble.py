"""Sampling plans, deduplicated tuple draws, parallel execution, aggregation.

A SamplePlan pins everything needed to reproduce an ensemble: variant,
widths, mutation rate, sample count, master seed and the step cap.  Records
come back in draw order regardless of worker count, so ensembles are
byte-reproducible.

The sampled space restricts initial rules to the 88 canonical orbit
representatives; the full space size is 88^2 * 2^w_o * 2^w_e for the coupled
deterministic variants and 88 * 2^w_o for the noise-driven one.  (The
source's printed formula uses exponents 8*w in disagreement with its own
state-space sizes; the state-space product is implemented.)
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from collections import Counter
from dataclasses import dataclass, field, replace

from scipy import stats

from . import complexity as cx
from .eca import BitState, canonical_rules, wolfram_class
from .innovation import innovation_metric, is_eca_reproducible
from .recurrence import build_report, detect_cycle, poincare_time
from .variants import Trajectory, Variant, VariantConfig, execution_rng, run_trajectory

CASE1_RATIOS = ("1/2", "1", "3/2", "2", "5/2")


class EmptyReportError(ValueError):
    """Aggregation over an all-censored (or empty) record set."""


def environment_width(w_o: int, ratio: str) -> int:
    """w_e from a ratio label; fractional products are rounded down."""
    num, _, den = ratio.partition("/")
    return (w_o * int(num)) // int(den or 1)


@dataclass(frozen=True)
class SamplePlan:
    variant: Variant
    w_o: int
    w_e: int | None = None
    mu: float | None = None
    sample_count: int = 1000
    master_seed: int = 0
    step_cap: int | None = None
    norm_samples: int = 1000
    norm_steps: int = 1024
    norm_seed: int = 0

    def __post_init__(self):
        if self.variant is Variant.CASE_II:
            if self.w_e not in (None, 8):
                raise ValueError("Case II fixes w_e = 8")
            object.__setattr__(self, "w_e", 8)
        if self.variant is Variant.CASE_I:
            if self.w_e is None or self.w_e < 1:
                raise ValueError("Case I requires w_e >= 1")
        if self.variant in (Variant.CASE_III, Variant.ISOLATED) and self.w_e is not None:
            raise ValueError(f"{self.variant.value} takes no environment width")
        if self.variant is Variant.CASE_III and self.mu is None:
            object.__setattr__(self, "mu", 0.5)

    @property
    def full_width(self) -> int:
        return self.w_o + (self.w_e or 0)


def sample_space_size(variant: Variant, w_o: int, w_e: int | None = None) -> int:
    if variant in (Variant.CASE_III, Variant.ISOLATED):
        return 88 * (1 << w_o)
    if variant is Variant.CASE_II:
        w_e = 8
    if w_e is None:
        raise ValueError("coupled variants need w_e")
    return 88 * 88 * (1 << w_o) * (1 << w_e)


def draw_plan(plan: SamplePlan) -> list[tuple]:
    """The initial tuples of a plan, in draw order.

    Coupled deterministic variants deduplicate tuples; the noise-driven
    variant allows repeats and keys each execution by its index instead.
    Draw order per tuple: r_o, (r_e,) s_o, (s_e).
    """
    rng = execution_rng(plan.master_seed)
    canon = canonical_rules()
    space = sample_space_size(plan.variant, plan.w_o, plan.w_e)
    tuples: list[tuple] = []

    if plan.variant is Variant.CASE_III:
        for _ in range(plan.sample_count):
            r_o = canon[int(rng.integers(0, 88))]
            s_o = int(rng.integers(0, 1 << plan.w_o))
            tuples.append((r_o, s_o))
        return tuples

    if plan.sample_count > space:
        raise ValueError(f"sample_count {plan.sample_count} exceeds space {space}")
    seen = set()
    while len(tuples) < plan.sample_count:
        r_o = canon[int(rng.integers(0, 88))]
        if plan.variant is Variant.ISOLATED:
            tup = (r_o, int(rng.integers(0, 1 << plan.w_o)))
        else:
            r_e = canon[int(rng.integers(0, 88))]
            s_o = int(rng.integers(0, 1 << plan.w_o))
            s_e = int(rng.integers(0, 1 << plan.w_e))
            tup = (r_o, r_e, s_o, s_e)
        if tup in seen:
            continue
        seen.add(tup)
        tuples.append(tup)
    return tuples


def exhaustive_plan_tuples(plan: SamplePlan) -> list[tuple]:
    """Every tuple of the plan's space, in lexicographic order."""
    canon = canonical_rules()
    out = []
    if plan.variant in (Variant.ISOLATED, Variant.CASE_III):
        for r_o in canon:
            for s_o in range(1 << plan.w_o):
                out.append((r_o, s_o))
        return out
    for r_o in canon:
        for r_e in canon:
            for s_o in range(1 << plan.w_o):
                for s_e in range(1 << plan.w_e):
                    out.append((r_o, r_e, s_o, s_e))
    return out


@dataclass(frozen=True)
class ExecutionRecord:
    variant: Variant
    w_o: int
    w_e: int | None
    mu: float | None
    seed: int | None           # per-execution stream seed (Case III only)
    init_rule_o: int
    rule_e: int | None
    init_state_o: int
    init_state_e: int | None
    t_P: int
    t_r: int | None
    t_r_rule: int | None
    t_a: int | None
    inn: bool | None
    ue: bool | None
    oee: bool | None
    attractor_ue: bool | None
    n_rule_transitions: int | None
    innovation_I: float | None
    compressed_bits: int | None
    norm_bits: int | None
    C: float | None
    k: float | str | None
    censored: bool
    # in-memory only (not a CSV column): rule sequence over one attractor cycle
    attractor_rules: tuple[int, ...] | None = None


def config_for_tuple(plan: SamplePlan, index: int, tup: tuple) -> VariantConfig:
    if plan.variant is Variant.CASE_III:
        r_o, s_o = tup
        return VariantConfig(plan.variant, BitState(s_o, plan.w_o), r_o,
                             mu=plan.mu, seed=_case3_seed(plan.master_seed, index))
    if plan.variant is Variant.ISOLATED:
        r_o, s_o = tup
        return VariantConfig(plan.variant, BitState(s_o, plan.w_o), r_o)
    r_o, r_e, s_o, s_e = tup
    return VariantConfig(plan.variant, BitState(s_o, plan.w_o), r_o,
                         s_e=BitState(s_e, plan.w_e), r_e=r_e)


def _case3_seed(master_seed: int, index: int) -> int:
    # distinct per-execution key; kept within 64 bits for the Philox key split
    return (master_seed * 0x9E3779B97F4A7C15 + index + 1) & (2**64 - 1)


def execute_tuple(plan: SamplePlan, index: int, tup: tuple, norm_bits: int) -> ExecutionRecord:
    """Run one sampled tuple through trajectory, recurrence, innovation and
    complexity analysis."""
    config = config_for_tuple(plan, index, tup)
    traj = run_trajectory(config, plan.step_cap)
    rep = build_report(traj)

    base = dict(
        variant=plan.variant, w_o=plan.w_o, w_e=plan.w_e, mu=plan.mu,
        seed=config.seed, init_rule_o=config.r_o, rule_e=config.r_e,
        init_state_o=config.s_o.bits,
        init_state_e=config.s_e.bits if config.s_e else None,
        t_P=rep.t_P, t_r=rep.t_r, t_r_rule=rep.t_r_rule, t_a=rep.t_a,
        ue=rep.ue, attractor_ue=rep.attractor_ue, censored=rep.censored)

    if rep.censored:
        return ExecutionRecord(**base, inn=None, oee=None, n_rule_transitions=None,
                               innovation_I=None, compressed_bits=None,
                               norm_bits=norm_bits, C=None, k=None)

    states = [s.s_o for s in traj.snapshots]
    rules = traj.rule_sequence()
    window_end = min(max(rep.t_r, 1), len(states) - 1)
    # a single-state window is trivially reproducible (identity rule)
    inn = (window_end >= 1
           and is_eca_reproducible(states[:window_end + 1]) is None)
    n_rt = sum(1 for a, b in zip(rules[:rep.t_r + 1], rules[1:rep.t_r + 1]) if a != b)
    inno = n_rt / (1 << plan.w_o)
    compressed, c_val = cx.compressibility(states[:rep.t_r + 1], norm_bits)
    horizon = max(2, min(rep.t_r, rep.t_P))
    k = cx.lyapunov(config, perturb_bit=0, horizon=horizon)
    att = None
    if plan.variant.deterministic:
        cyc = detect_cycle(traj)
        att = tuple(rules[cyc.pre_period:cyc.pre_period + cyc.period])
    return ExecutionRecord(**base, inn=inn, oee=(rep.ue and inn),
                           n_rule_transitions=n_rt, innovation_I=inno,
                           compressed_bits=compressed, norm_bits=norm_bits,
                           C=c_val, k=k, attractor_rules=att)


def _worker(args) -> ExecutionRecord:
    return execute_tuple(*args)


def worker_count(default: int = 1) -> int:
    env = os.environ.get("OEE_THREADS")
    if env:
        return max(1, int(env))
    return default


def run_ensemble(plan: SamplePlan, workers: int | None = None,
                 tuples: list[tuple] | None = None,
                 norm_cache: str | None = None) -> list[ExecutionRecord]:
    """Execute a plan; output order equals draw order for any worker count."""
    if tuples is None:
        tuples = draw_plan(plan)
    norm_bits = cx.normalization_constant(
        plan.full_width, plan.norm_samples, plan.norm_steps, plan.norm_seed,
        cache_path=norm_cache)
    workers = worker_count(workers or 1)
    tasks = [(plan, i, tup, norm_bits) for i, tup in enumerate(tuples)]
    if workers <= 1:
        return [_worker(t) for t in tasks]
    chunk = max(1, len(tasks) // (workers * 8))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_worker, tasks, chunksize=chunk))


# --- aggregation ------------------------------------------------------------

@dataclass(frozen=True)
class BoxStats:
    minimum: float
    q1: float
    median: float
    q3: float
    maximum: float
    whisker_lo: float
    whisker_hi: float


def box_stats(values: list[float]) -> BoxStats | None:
    if not values:
        return None
    vs = sorted(values)
    q1, med, q3 = (_quantile(vs, q) for q in (0.25, 0.5, 0.75))
    iqr = q3 - q1
    lo = min((v for v in vs if v >= q1 - 1.5 * iqr), default=vs[0])
    hi = max((v for v in vs if v <= q3 + 1.5 * iqr), default=vs[-1])
    return BoxStats(vs[0], q1, med, q3, vs[-1], lo, hi)


def _quantile(sorted_vals: list[float], q: float) -> float:
    n = len(sorted_vals)
    if n == 1:
        return float(sorted_vals[0])
    pos = q * (n - 1)
    lo = int(math.floor(pos))
    hi = min(lo + 1, n - 1)
    frac = pos - lo
    return sorted_vals[lo] * (1 - frac) + sorted_vals[hi] * frac


def log2_histogram(ratios: list[float]) -> dict[str, int]:
    """Counts per log2 bin of a ratio distribution; zeros get their own bin.
    Bin "e" covers [2^e, 2^(e+1))."""
    hist: Counter = Counter()
    for r in ratios:
        hist["zero" if r <= 0 else str(math.floor(math.log2(r)))] += 1
    return dict(sorted(hist.items(), key=lambda kv: (kv[0] == "zero", _bin_key(kv[0]))))


def _bin_key(label: str) -> int:
    return 0 if label == "zero" else int(label)


def metagenome(records: list[ExecutionRecord], oee_only: bool = False) -> list[dict]:
    """Rank-ordered rule frequencies over attractor-cycle rule sequences."""
    counts: Counter = Counter()
    for rec in records:
        if rec.attractor_rules is None:
            continue
        if oee_only and not rec.oee:
            continue
        counts.update(rec.attractor_rules)
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    return [{"rule": rule, "count": count, "wolfram_class": int(wolfram_class(rule))}
            for rule, count in ranked]


@dataclass(frozen=True)
class EnsembleReport:
    n_records: int
    n_censored: int
    oee_percent: float
    inn_percent: float
    ue_percent: float
    t_r_ratio_hist: dict[str, int]
    t_a_ratio_hist: dict[str, int]
    t_r_ratio_box: BoxStats | None
    t_a_ratio_box: BoxStats | None
    innovation_points: list[tuple[float, int]]   # (I, t_r)
    spearman_rho: float | None
    spearman_p: float | None
    metagenome_all: list[dict]
    metagenome_oee: list[dict]
    c_mean: float | None
    c_hist: dict[str, int]
    k_mean: float | None
    k_hist: dict[str, int]
    n_extinct_k: int

    def to_dict(self) -> dict:
        d = {
            "n_records": self.n_records,
            "n_censored": self.n_censored,
            "oee_percent": self.oee_percent,
            "inn_percent": self.inn_percent,
            "ue_percent": self.ue_percent,
            "t_r_ratio_hist": self.t_r_ratio_hist,
            "t_a_ratio_hist": self.t_a_ratio_hist,
            "spearman_rho": self.spearman_rho,
            "spearman_p": self.spearman_p,
            "metagenome_all": self.metagenome_all,
            "metagenome_oee": self.metagenome_oee,
            "c_mean": self.c_mean,
            "c_hist": self.c_hist,
            "k_mean": self.k_mean,
            "k_hist": self.k_hist,
            "n_extinct_k": self.n_extinct_k,
        }
        for name in ("t_r_ratio_box", "t_a_ratio_box"):
            box = getattr(self, name)
            d[name] = None if box is None else vars(box)
        return d


def value_histogram(values: list[float], bins: int = 20) -> dict[str, int]:
    if not values:
        return {}
    lo, hi = min(values), max(values)
    if hi == lo:
        return {f"{lo:.6g}": len(values)}
    width = (hi - lo) / bins
    hist: Counter = Counter()
    for v in values:
        idx = min(bins - 1, int((v - lo) / width))
        hist[f"{lo + idx * width:.6g}"] += 1
    return dict(sorted(hist.items(), key=lambda kv: float(kv[0])))


def aggregate(records: list[ExecutionRecord]) -> EnsembleReport:
    """Percentages, distributions, correlations and metagenome of a record
    set.  Merging subsets then aggregating the union is equivalent to
    aggregating everything at once."""
    live = [r for r in records if not r.censored]
    if not live:
        raise EmptyReportError("no non-censored records to aggregate")
    n = len(live)
    pct = lambda flag: 100.0 * sum(1 for r in live if getattr(r, flag)) / n

    t_r_ratios = [r.t_r / r.t_P for r in live]
    t_a_ratios = [r.t_a / r.t_P for r in live if r.t_a is not None]
    points = sorted((r.innovation_I, r.t_r) for r in live)
    rho = p = None
    if len(points) >= 3 and len({i for i, _ in points}) > 1 and len({t for _, t in points}) > 1:
        res = stats.spearmanr([i for i, _ in points], [t for _, t in points])
        rho, p = float(res.statistic), float(res.pvalue)

    cs = [r.C for r in live if r.C is not None]
    ks = [r.k for r in live if isinstance(r.k, float)]
    return EnsembleReport(
        n_records=len(records),
        n_censored=len(records) - n,
        oee_percent=pct("oee"),
        inn_percent=pct("inn"),
        ue_percent=pct("ue"),
        t_r_ratio_hist=log2_histogram(t_r_ratios),
        t_a_ratio_hist=log2_histogram(t_a_ratios),
        t_r_ratio_box=box_stats(t_r_ratios),
        t_a_ratio_box=box_stats(t_a_ratios),
        innovation_points=points,
        spearman_rho=rho,
        spearman_p=p,
        metagenome_all=metagenome(records),
        metagenome_oee=metagenome(records, oee_only=True),
        c_mean=float(sum(cs) / len(cs)) if cs else None,
        c_hist=value_histogram(cs),
        k_mean=float(sum(ks) / len(ks)) if ks else None,
        k_hist=value_histogram(ks),
        n_extinct_k=sum(1 for r in live if r.k == cx.EXTINCT),
    )
