"""The three time-dependent rule-update mechanisms and the coupled stepping loop.

Variant summary (rule evolution of the organism ``o``):

* Case I   -- r_o(t+1) = f(s_o(t), r_o(t), s_e(t)): triplet-frequency driven
              bit flips; environment is a fixed-rule ECA of width w_e.
* Case II  -- r_o(t+1) = s_e(t) read as an 8-bit rule number; w_e = 8.
* Case III -- each rule bit flips independently with probability mu per step;
              the environment is a noise source, there is no s_e.
* Isolated -- plain ECA, the rule never changes (control).

The stepping order is rule-first: r_o(t+1) is derived from time-t quantities
and immediately applied to s_o(t).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .eca import (
    SIM_MAX_WIDTH,
    SIM_MIN_WIDTH,
    BitState,
    RuleTable,
    count_table,
    rule_from_number,
    step_bits,
    step_table,
    triplet_counts_bits,
)


class Variant(enum.Enum):
    CASE_I = "case1"
    CASE_II = "case2"
    CASE_III = "case3"
    ISOLATED = "eca"

    @property
    def deterministic(self) -> bool:
        return self is not Variant.CASE_III

    @property
    def has_environment(self) -> bool:
        return self in (Variant.CASE_I, Variant.CASE_II)


@dataclass(frozen=True)
class VariantConfig:
    variant: Variant
    s_o: BitState
    r_o: int
    s_e: BitState | None = None
    r_e: int | None = None
    mu: float | None = None
    seed: int | None = None

    def __post_init__(self):
        if not SIM_MIN_WIDTH <= self.s_o.width <= SIM_MAX_WIDTH:
            raise ValueError(f"organism width must be in [{SIM_MIN_WIDTH}, {SIM_MAX_WIDTH}]")
        if not 0 <= self.r_o <= 255:
            raise ValueError("r_o out of range")
        if self.variant.has_environment:
            if self.s_e is None or self.r_e is None:
                raise ValueError(f"{self.variant.value} requires s_e and r_e")
            if self.variant is Variant.CASE_II and self.s_e.width != 8:
                raise ValueError("Case II requires an environment of width 8")
            if self.s_e.width > SIM_MAX_WIDTH:
                raise ValueError("environment width exceeds simulation maximum")
        else:
            if self.s_e is not None or self.r_e is not None:
                raise ValueError(f"{self.variant.value} takes no environment CA")
        if self.variant is Variant.CASE_III:
            if self.mu is None or not 0.0 <= self.mu < 1.0:
                raise ValueError("Case III requires mu in [0, 1)")
            if self.seed is None:
                raise ValueError("Case III requires a seed")

    @property
    def w_o(self) -> int:
        return self.s_o.width

    @property
    def w_e(self) -> int | None:
        return self.s_e.width if self.s_e is not None else None


@dataclass(frozen=True)
class SystemSnapshot:
    t: int
    s_o: BitState
    r_o: int
    s_e: BitState | None = None

    def key(self) -> tuple:
        # r_e is constant along a trajectory, so (s_o, s_e, r_o) identifies
        # the full system state.
        return (self.s_o.bits, self.r_o, None if self.s_e is None else self.s_e.bits)


@dataclass
class Trajectory:
    config: VariantConfig
    snapshots: list[SystemSnapshot]
    cap_hit: bool = False
    # deterministic variants: time at which the repeated snapshot first occurred
    first_seen: int | None = None
    repeat_time: int | None = None
    # Case III: first step with a homogeneous organism state
    convergence_time: int | None = None

    def state_sequence(self) -> list[int]:
        return [s.s_o.bits for s in self.snapshots]

    def rule_sequence(self) -> list[int]:
        return [s.r_o for s in self.snapshots]


# --- rule updates -----------------------------------------------------------

def case1_update_bits(s_o_bits: int, w_o: int, r_o: int, s_e_bits: int, w_e: int) -> int:
    """Flip rule bit i when triplet S3[i] occurs in both states and its
    normalized frequency in s_o meets or exceeds the one in s_e (exact
    cross-multiplied integer comparison).

    Requiring the triplet in both states is what makes a single-triplet
    update (the rule 30 -> 62 example) possible at all: if absent-from-the-
    environment triplets flipped too, every present triplet would win
    against a zero frequency and updates could never isolate one bit.
    """
    if max(w_o, w_e) <= 16:
        co = count_table(w_o)[s_o_bits]
        ce = count_table(w_e)[s_e_bits]
    else:
        co = triplet_counts_bits(s_o_bits, w_o)
        ce = triplet_counts_bits(s_e_bits, w_e)
    out = r_o
    for i in range(8):
        if co[i] and ce[i] and co[i] * w_e >= ce[i] * w_o:
            out ^= 1 << (7 - i)
    return out


@lru_cache(maxsize=64)
def _case1_flip_table(w_o: int, w_e: int) -> list[tuple[int, ...]]:
    """flip mask for every (s_o, s_e) pair; hot-loop path for narrow widths."""
    co_tab = count_table(w_o)
    ce_tab = count_table(w_e)
    table = []
    for so in range(1 << w_o):
        co = co_tab[so]
        row = []
        for se in range(1 << w_e):
            ce = ce_tab[se]
            mask = 0
            for i in range(8):
                if co[i] and ce[i] and co[i] * w_e >= ce[i] * w_o:
                    mask |= 1 << (7 - i)
            row.append(mask)
        table.append(tuple(row))
    return table


def case1_rule_update(s_o: BitState, r_o: RuleTable, s_e: BitState) -> RuleTable:
    return rule_from_number(
        case1_update_bits(s_o.bits, s_o.width, r_o.number, s_e.bits, s_e.width))


def case2_rule_update(s_e: BitState) -> RuleTable:
    """The width-8 environment state read MSB-first as a rule number."""
    if s_e.width != 8:
        raise ValueError("Case II environment must have width 8")
    return rule_from_number(s_e.bits)


def case3_update_bits(r_o: int, mu: float, rng: np.random.Generator) -> int:
    # exactly 8 draws per call, consumed in S3 index order (bit 7 downward)
    draws = rng.random(8)
    out = r_o
    for i in range(8):
        if draws[i] < mu:
            out ^= 1 << (7 - i)
    return out


def case3_rule_update(r_o: RuleTable, mu: float, rng: np.random.Generator) -> RuleTable:
    if not 0.0 <= mu < 1.0:
        raise ValueError("mu must be in [0, 1)")
    return rule_from_number(case3_update_bits(r_o.number, mu, rng))


def execution_rng(master_seed: int, index: int = 0) -> np.random.Generator:
    """Counter-based stream keyed by (master seed, execution index)."""
    key = ((int(master_seed) & (2**64 - 1)) << 64) | (int(index) & (2**64 - 1))
    return np.random.Generator(np.random.Philox(key=key))


# --- coupled stepping -------------------------------------------------------

def system_step(config: VariantConfig, snap: SystemSnapshot,
                rng: np.random.Generator | None = None) -> SystemSnapshot:
    """Advance the coupled system one step (rule update first, then states)."""
    w_o = config.w_o
    variant = config.variant
    if variant is Variant.CASE_I:
        r_new = case1_update_bits(snap.s_o.bits, w_o, snap.r_o,
                                  snap.s_e.bits, snap.s_e.width)
    elif variant is Variant.CASE_II:
        r_new = snap.s_e.bits
    elif variant is Variant.CASE_III:
        r_new = case3_update_bits(snap.r_o, config.mu, rng)
    else:
        r_new = snap.r_o
    s_o_new = BitState(step_bits(r_new, snap.s_o.bits, w_o), w_o)
    s_e_new = None
    if variant.has_environment:
        w_e = snap.s_e.width
        s_e_new = BitState(step_bits(config.r_e, snap.s_e.bits, w_e), w_e)
    return SystemSnapshot(snap.t + 1, s_o_new, r_new, s_e_new)


def default_step_cap(config: VariantConfig) -> int:
    if config.variant is Variant.CASE_III:
        return 10**6
    w_e = config.w_e or 0
    return 256 * (1 << (config.w_o + w_e)) + 1


def run_trajectory(config: VariantConfig, cap: int | None = None) -> Trajectory:
    """Iterate system_step until the variant's stop condition or ``cap``.

    Deterministic variants stop at the first repeated full-system snapshot;
    Case III stops at the first homogeneous organism state.
    """
    if cap is None:
        cap = default_step_cap(config)
    if cap < 1:
        raise ValueError("cap must be >= 1")

    snap = SystemSnapshot(0, config.s_o, config.r_o, config.s_e)
    if config.variant is Variant.CASE_III:
        return _run_case3(config, snap, cap)
    return _run_deterministic(config, snap, cap)


def _run_deterministic(config: VariantConfig, snap: SystemSnapshot, cap: int) -> Trajectory:
    w_o = config.w_o
    variant = config.variant
    use_tables = (config.w_e or 0) <= 12 and w_o <= 12

    snapshots = [snap]
    seen = {snap.key(): 0}

    if use_tables:
        flip = (_case1_flip_table(w_o, config.w_e) if variant is Variant.CASE_I else None)
        o_tables = [step_table(r, w_o) for r in range(256)]
        e_table = (step_table(config.r_e, config.w_e) if variant.has_environment else None)
        so, ro = snap.s_o.bits, snap.r_o
        se = snap.s_e.bits if snap.s_e is not None else None
        w_e = config.w_e
        for t in range(1, cap + 1):
            if variant is Variant.CASE_I:
                ro ^= flip[so][se]
            elif variant is Variant.CASE_II:
                ro = se
            so = o_tables[ro][so]
            if e_table is not None:
                se = e_table[se]
            key = (so, ro, se)
            snapshots.append(SystemSnapshot(
                t, BitState(so, w_o), ro,
                None if se is None else BitState(se, w_e)))
            first = seen.get(key)
            if first is not None:
                return Trajectory(config, snapshots, first_seen=first, repeat_time=t)
            seen[key] = t
        return Trajectory(config, snapshots, cap_hit=True)

    for t in range(1, cap + 1):
        snap = system_step(config, snap)
        snapshots.append(snap)
        first = seen.get(snap.key())
        if first is not None:
            return Trajectory(config, snapshots, first_seen=first, repeat_time=t)
        seen[snap.key()] = t
    return Trajectory(config, snapshots, cap_hit=True)


def _run_case3(config: VariantConfig, snap: SystemSnapshot, cap: int) -> Trajectory:
    rng = execution_rng(config.seed)
    snapshots = [snap]
    if snap.s_o.is_homogeneous():
        return Trajectory(config, snapshots, convergence_time=0)
    for t in range(1, cap + 1):
        snap = system_step(config, snap, rng)
        snapshots.append(snap)
        if snap.s_o.is_homogeneous():
            return Trajectory(config, snapshots, convergence_time=t)
    return Trajectory(config, snapshots, cap_hit=True)
