"""LZW compressibility and Lyapunov exponents for organism trajectories.

Compressed size is counted in variable-width code bits: each emitted code
costs ceil(log2(dictionary size at emission time)).  The compressibility C
of a trajectory is its compressed bit count divided by an ensemble-maximum
normalization constant taken over random fixed-rule ECA of the full-system
width; large C means low complexity.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from statistics import linear_regression

import numpy as np

from .eca import BitState, step_bits
from .variants import (
    SystemSnapshot,
    Trajectory,
    Variant,
    VariantConfig,
    execution_rng,
    system_step,
)

EXTINCT = "extinct"


@dataclass(frozen=True)
class ComplexityReport:
    compressed_bits: int
    norm_bits: int
    C: float
    k: float | str  # per-step exponential rate, or the "extinct" sentinel


def serialize_trajectory(states: list[BitState]) -> str:
    """Row-major concatenation of cell bits, one row per time step."""
    if not states:
        raise ValueError("need at least one state")
    return "".join(s.to_string() for s in states)


def lzw_compress(symbols: str) -> list[tuple[int, int]]:
    """LZW over {0,1} with an unbounded dictionary; returns a list of
    (code, code_width_bits) pairs."""
    if not symbols:
        raise ValueError("empty input")
    dictionary = {"0": 0, "1": 1}
    out = []
    cur = ""
    for ch in symbols:
        nxt = cur + ch
        if nxt in dictionary:
            cur = nxt
            continue
        out.append((dictionary[cur], _code_width(len(dictionary))))
        dictionary[nxt] = len(dictionary)
        cur = ch
    out.append((dictionary[cur], _code_width(len(dictionary))))
    return out


def _code_width(dict_size: int) -> int:
    return max(1, math.ceil(math.log2(dict_size)))


def lzw_compress_bits(symbols: str) -> int:
    return sum(width for _, width in lzw_compress(symbols))


def lzw_decompress(codes: list[tuple[int, int]]) -> str:
    """Inverse of lzw_compress (round-trip check; sizes are what feed C)."""
    dictionary = {0: "0", 1: "1"}
    out = []
    prev = None
    for code, _ in codes:
        if code in dictionary:
            entry = dictionary[code]
        elif prev is not None and code == len(dictionary):
            entry = prev + prev[0]
        else:
            raise ValueError(f"bad LZW code {code}")
        out.append(entry)
        if prev is not None:
            dictionary[len(dictionary)] = prev + entry[0]
        prev = entry
    return "".join(out)


_NORM_MEMO: dict[tuple[int, int, int, int], int] = {}


def normalization_constant(w: int, samples: int = 10_000, steps: int = 65_536,
                           seed: int = 0, cache_path: str | None = None) -> int:
    """Maximum compressed size over random fixed-rule ECA of width ``w``.

    ``w`` is the full-system width (w_o + w_e).  The run length is capped at
    min(steps, 2**(2w)).  Memoized per parameter tuple, optionally backed by
    a text cache file of ``<w> <samples> <steps> <seed> <max_bits>`` lines.
    """
    key = (w, samples, steps, seed)
    if key in _NORM_MEMO:
        return _NORM_MEMO[key]
    if cache_path and os.path.exists(cache_path):
        with open(cache_path) as fh:
            for line in fh:
                parts = line.split()
                if len(parts) == 5 and tuple(map(int, parts[:4])) == key:
                    _NORM_MEMO[key] = int(parts[4])
                    return _NORM_MEMO[key]

    run_steps = min(steps, 1 << min(2 * w, 62))
    rng = execution_rng(seed)
    best = 0
    for _ in range(samples):
        rule = int(rng.integers(0, 256))
        bits = int(rng.integers(0, 1 << w))
        rows = [format(bits, f"0{w}b")]
        cur = bits
        for _ in range(run_steps):
            cur = step_bits(rule, cur, w)
            rows.append(format(cur, f"0{w}b"))
        best = max(best, lzw_compress_bits("".join(rows)))
    _NORM_MEMO[key] = best
    if cache_path:
        with open(cache_path, "a") as fh:
            fh.write(f"{w} {samples} {steps} {seed} {best}\n")
    return best


def compressibility(states: list[BitState], norm_bits: int) -> tuple[int, float]:
    """(compressed_bits, C) for a state trajectory."""
    if norm_bits <= 0:
        raise ValueError("norm_bits must be positive")
    bits = lzw_compress_bits(serialize_trajectory(states))
    return bits, bits / norm_bits


def lyapunov(config: VariantConfig, perturb_bit: int = 0, horizon: int = 16,
             rng_seed: int | None = None) -> float | str:
    """Exponential growth rate of the Hamming distance to a run perturbed in
    one initial organism bit, or "extinct" when the defect dies at t = 1.

    The perturbed organism shares the literal environment sequence (Case
    I/II) or the random stream (Case III, common random numbers) and
    re-derives its own rule wherever the update depends on s_o.
    """
    if horizon < 2:
        raise ValueError("horizon must be >= 2")
    w_o = config.w_o
    if not 0 <= perturb_bit < w_o:
        raise ValueError("perturb_bit out of range")

    base = SystemSnapshot(0, config.s_o, config.r_o, config.s_e)
    pert_s = BitState(config.s_o.bits ^ (1 << (w_o - 1 - perturb_bit)), w_o)
    pert = SystemSnapshot(0, pert_s, config.r_o, config.s_e)

    rng_a = rng_b = None
    if config.variant is Variant.CASE_III:
        seed = config.seed if rng_seed is None else rng_seed
        rng_a = execution_rng(seed)
        rng_b = execution_rng(seed)

    ys = []
    for _ in range(horizon):
        base = system_step(config, base, rng_a)
        pert = system_step(config, pert, rng_b)
        y = (base.s_o.bits ^ pert.s_o.bits).bit_count()
        ys.append(y)
        if y == 0 or y == w_o:
            break
    if ys[0] == 0:
        return EXTINCT
    return fit_exponent(ys)


def fit_exponent(ys: list[int]) -> float:
    """Least-squares slope of ln y(t) on t over {t >= 1 : y(t) > 0}."""
    pts = [(t, math.log(y)) for t, y in enumerate(ys, start=1) if y > 0]
    if len(pts) < 2:
        # a single usable point: slope of the line through (0, ln y(0)=0)
        t, ly = pts[0]
        return ly / t
    xs, lys = zip(*pts)
    return linear_regression(xs, lys).slope


def lyapunov_mean(config: VariantConfig, horizon: int = 16) -> float | str:
    """k averaged over all w_o perturbation positions (extinct ones skipped);
    "extinct" when every position is extinct."""
    vals = [lyapunov(config, b, horizon) for b in range(config.w_o)]
    finite = [v for v in vals if v != EXTINCT]
    if not finite:
        return EXTINCT
    return float(np.mean(finite))
