"""The innovation predicate against counterfactual isolated-ECA trajectories.

A state window is reproducible by an isolated ECA iff a single fixed rule is
consistent with every consecutive transition: isolated trajectories are
deterministic, so contiguous containment in the counterfactual set reduces
to single-rule consistency.  The brute-force enumeration below is kept as an
independent oracle for that reduction.
"""

from __future__ import annotations

import os
import struct
from dataclasses import dataclass

from .eca import BitState, step_table

ORACLE_MAGIC = b"OEEC"
ORACLE_VERSION = 1


def is_eca_reproducible(states: list[BitState]) -> int | None:
    """Smallest rule number generating every consecutive transition, else None.

    Works by constraint propagation: each (neighborhood -> next cell) pair
    pins one bit of the rule table; a contradiction means no rule exists.
    Unconstrained bits resolve to 0, which yields the smallest witness.
    """
    if len(states) < 2:
        raise ValueError("need at least 2 states")
    width = states[0].width
    if any(s.width != width for s in states):
        raise ValueError("states must share one width")

    required: dict[int, int] = {}  # neighborhood value -> output bit
    for a, b in zip(states, states[1:]):
        for p in range(width):
            v = (a.cell(p - 1) << 2) | (a.cell(p) << 1) | a.cell(p + 1)
            out = b.cell(p)
            prev = required.get(v)
            if prev is None:
                required[v] = out
            elif prev != out:
                return None
    rule = 0
    for v, out in required.items():
        rule |= out << v
    return rule


def inn_flag(states: list[BitState]) -> bool:
    """Innovation: the window is inconsistent with every fixed ECA rule."""
    return is_eca_reproducible(states) is None


def innovation_metric(rules: list[int], w_o: int) -> float:
    """Number of rule transitions normalized by the Poincare bound 2**w_o."""
    n_r = sum(1 for a, b in zip(rules, rules[1:]) if a != b)
    return n_r / (1 << w_o)


@dataclass
class CounterfactualSet:
    """All isolated-ECA trajectories of one width, with containment queries."""

    width: int
    # trajectories[rule][init] = state sequence up to (and including) the
    # first repeated state
    trajectories: list[list[list[int]]]

    def contains(self, states: list[BitState]) -> bool:
        """Exact contiguous containment in some isolated trajectory.

        Any occurrence of the window's first state inside a rule-r trajectory
        continues deterministically, so it suffices to iterate each rule's
        transition map from states[0].
        """
        if any(s.width != self.width for s in states):
            raise ValueError("width mismatch with counterfactual set")
        packed = [s.bits for s in states]
        first, rest = packed[0], packed[1:]
        for rule in range(256):
            table = step_table(rule, self.width)
            cur = first
            for want in rest:
                cur = table[cur]
                if cur != want:
                    break
            else:
                return True
        return False


def brute_force_counterfactual(width: int, cache_path: str | None = None) -> CounterfactualSet:
    """Enumerate all 256 rules x 2**width initial states (test oracle only)."""
    if not 3 <= width <= 5:
        raise ValueError("counterfactual enumeration is bounded to widths 3..5")
    if cache_path and os.path.exists(cache_path):
        return load_oracle_cache(cache_path, expect_width=width)

    n_states = 1 << width
    trajectories = []
    for rule in range(256):
        table = step_table(rule, width)
        per_rule = []
        for init in range(n_states):
            seen = {init: 0}
            seq = [init]
            cur = init
            while True:
                cur = table[cur]
                seq.append(cur)
                if cur in seen:
                    break
                seen[cur] = len(seq) - 1
            per_rule.append(seq)
        trajectories.append(per_rule)
    result = CounterfactualSet(width, trajectories)
    if cache_path:
        save_oracle_cache(result, cache_path)
    return result


def save_oracle_cache(cf: CounterfactualSet, path: str) -> None:
    """Magic, version byte, width byte, then length-prefixed records of
    (rule, init, length, packed states)."""
    tmp = path + ".tmp"
    with open(tmp, "wb") as fh:
        fh.write(ORACLE_MAGIC)
        fh.write(struct.pack("BB", ORACLE_VERSION, cf.width))
        for rule in range(256):
            for init in range(1 << cf.width):
                seq = cf.trajectories[rule][init]
                fh.write(struct.pack("<BBH", rule, init, len(seq)))
                fh.write(struct.pack(f"<{len(seq)}B", *seq))
    os.replace(tmp, path)


def load_oracle_cache(path: str, expect_width: int | None = None) -> CounterfactualSet:
    with open(path, "rb") as fh:
        if fh.read(4) != ORACLE_MAGIC:
            raise ValueError(f"{path}: not an oracle cache file")
        version, width = struct.unpack("BB", fh.read(2))
        if version != ORACLE_VERSION:
            raise ValueError(f"{path}: unsupported cache version {version}")
        if expect_width is not None and width != expect_width:
            raise ValueError(f"{path}: cache width {width} != requested {expect_width}")
        n_states = 1 << width
        trajectories = [[None] * n_states for _ in range(256)]
        while True:
            head = fh.read(4)
            if not head:
                break
            rule, init, length = struct.unpack("<BBH", head)
            seq = list(struct.unpack(f"<{length}B", fh.read(length)))
            trajectories[rule][init] = seq
        if any(seq is None for per_rule in trajectories for seq in per_rule):
            raise ValueError(f"{path}: incomplete oracle cache")
    return CounterfactualSet(width, trajectories)
