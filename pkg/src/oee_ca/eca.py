"""Elementary cellular automaton primitives.

Rules are numbered 0..255 in Wolfram's scheme: bit ``v`` of the rule number
is the output for the neighborhood whose (left, center, right) cells read as
the 3-bit value ``v``.  The ordered triplet list

    S3 = [111, 110, 101, 100, 011, 010, 001, 000]

indexes rule tables MSB-first, so ``outputs[0]`` answers triplet 111.
States are periodic rings of cells stored bit-packed, leftmost cell in the
most significant bit.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from importlib import resources

TRIPLETS = ((1, 1, 1), (1, 1, 0), (1, 0, 1), (1, 0, 0),
            (0, 1, 1), (0, 1, 0), (0, 0, 1), (0, 0, 0))

SIM_MIN_WIDTH = 3
SIM_MAX_WIDTH = 64


class ConfigurationError(Exception):
    """Raised when bundled static data is missing or malformed."""


@dataclass(frozen=True)
class RuleTable:
    """An ECA rule as the ordered 8-tuple of outputs over S3."""

    outputs: tuple[int, ...]

    def __post_init__(self):
        if len(self.outputs) != 8 or any(b not in (0, 1) for b in self.outputs):
            raise ValueError("rule table needs exactly 8 binary outputs")

    @property
    def number(self) -> int:
        return rule_to_number(self)


def rule_from_number(n: int) -> RuleTable:
    """Rule table for rule number ``n``; outputs ordered per S3 (MSB first)."""
    if not 0 <= n <= 255:
        raise ValueError(f"rule number out of range: {n}")
    return RuleTable(tuple((n >> (7 - i)) & 1 for i in range(8)))


def rule_to_number(table: RuleTable) -> int:
    n = 0
    for b in table.outputs:
        n = (n << 1) | b
    return n


@dataclass(frozen=True)
class BitState:
    """A fixed-width periodic row of cells, leftmost cell in the MSB."""

    bits: int
    width: int

    def __post_init__(self):
        if self.width < 1:
            raise ValueError("width must be >= 1")
        if not 0 <= self.bits < (1 << self.width):
            raise ValueError("packed bits exceed width")

    @classmethod
    def from_string(cls, s: str) -> "BitState":
        return cls(int(s, 2) if s else 0, len(s))

    @classmethod
    def from_cells(cls, cells) -> "BitState":
        cells = tuple(cells)
        bits = 0
        for c in cells:
            bits = (bits << 1) | (1 if c else 0)
        return cls(bits, len(cells))

    def to_string(self) -> str:
        return format(self.bits, f"0{self.width}b")

    def cell(self, p: int) -> int:
        return (self.bits >> (self.width - 1 - (p % self.width))) & 1

    @property
    def cells(self) -> tuple[int, ...]:
        return tuple((self.bits >> (self.width - 1 - p)) & 1 for p in range(self.width))

    def is_homogeneous(self) -> bool:
        return self.bits == 0 or self.bits == (1 << self.width) - 1


def _rotate_left_cells(bits: int, width: int) -> int:
    """Value whose cell p is the original cell p+1 (cells shift left)."""
    mask = (1 << width) - 1
    return ((bits << 1) & mask) | (bits >> (width - 1)) if width > 1 else bits


def _rotate_right_cells(bits: int, width: int) -> int:
    mask = (1 << width) - 1
    return (bits >> 1) | ((bits & 1) << (width - 1)) if width > 1 else bits


def step_bits(rule_number: int, bits: int, width: int) -> int:
    """One synchronous update of a packed state, periodic boundaries."""
    mask = (1 << width) - 1
    c = bits
    # cell p's left neighbor is cell p-1: every position takes the value one
    # step to its left, i.e. the cell array rotated right.
    left = _rotate_right_cells(bits, width)
    right = _rotate_left_cells(bits, width)
    out = 0
    for v in range(8):
        if (rule_number >> v) & 1:
            term = (left if v & 4 else ~left) & (c if v & 2 else ~c) & (right if v & 1 else ~right)
            out |= term
    return out & mask


@lru_cache(maxsize=None)
def _step_table(rule_number: int, width: int) -> tuple[int, ...]:
    return tuple(step_bits(rule_number, s, width) for s in range(1 << width))


def step_table(rule_number: int, width: int) -> tuple[int, ...]:
    """state -> next-state lookup table for narrow widths (hot-loop path)."""
    return _step_table(rule_number, width)


def step(rule: RuleTable, state: BitState) -> BitState:
    if state.width < SIM_MIN_WIDTH:
        raise ValueError(f"state width must be >= {SIM_MIN_WIDTH} for stepping")
    return BitState(step_bits(rule.number, state.bits, state.width), state.width)


def triplet_counts_bits(bits: int, width: int) -> tuple[int, ...]:
    """Counts of each S3 triplet over the ``width`` periodic windows."""
    counts = [0] * 8
    for p in range(width):
        l = (bits >> (width - 1 - ((p - 1) % width))) & 1
        c = (bits >> (width - 1 - p)) & 1
        r = (bits >> (width - 1 - ((p + 1) % width))) & 1
        v = (l << 2) | (c << 1) | r
        counts[7 - v] += 1
    return tuple(counts)


@lru_cache(maxsize=None)
def _count_table(width: int) -> tuple[tuple[int, ...], ...]:
    return tuple(triplet_counts_bits(s, width) for s in range(1 << width))


def count_table(width: int) -> tuple[tuple[int, ...], ...]:
    return _count_table(width)


def triplet_counts(state: BitState) -> tuple[int, ...]:
    return triplet_counts_bits(state.bits, state.width)


def triplet_frequencies(state: BitState) -> tuple[Fraction, ...]:
    """Exact normalized triplet frequencies; entries sum to 1."""
    if state.width < SIM_MIN_WIDTH:
        raise ValueError("width must be >= 3 for triplet frequencies")
    return tuple(Fraction(c, state.width) for c in triplet_counts(state))


# --- rule equivalence -------------------------------------------------------

def _mirror_number(n: int) -> int:
    out = 0
    for v in range(8):
        mv = ((v & 1) << 2) | (v & 2) | (v >> 2)
        out |= ((n >> mv) & 1) << v
    return out


def _complement_number(n: int) -> int:
    out = 0
    for v in range(8):
        out |= (1 - ((n >> (~v & 7)) & 1)) << v
    return out


def mirror_rule(table: RuleTable) -> RuleTable:
    """Swap each triplet's output with its left-right reversed triplet's."""
    return rule_from_number(_mirror_number(table.number))


def complement_rule(table: RuleTable) -> RuleTable:
    """Negate inputs and output of every table entry."""
    return rule_from_number(_complement_number(table.number))


def rule_orbit(n: int) -> frozenset[int]:
    m = _mirror_number(n)
    c = _complement_number(n)
    return frozenset((n, m, c, _complement_number(m)))


@lru_cache(maxsize=1)
def _canonical_map() -> tuple[int, ...]:
    return tuple(min(rule_orbit(n)) for n in range(256))


def canonical_rule(n: int) -> int:
    """Minimum rule number in the mirror/complement orbit of ``n``."""
    if not 0 <= n <= 255:
        raise ValueError(f"rule number out of range: {n}")
    return _canonical_map()[n]


@lru_cache(maxsize=1)
def canonical_rules() -> tuple[int, ...]:
    """The 88 orbit representatives, sorted ascending."""
    return tuple(sorted(set(_canonical_map())))


# --- Wolfram classes --------------------------------------------------------

class WolframClass(enum.IntEnum):
    I = 1
    II = 2
    III = 3
    IV = 4


def load_class_table(path=None) -> dict[int, WolframClass]:
    """Load the 256-line ``<rule> <class>`` table (bundled file by default)."""
    if path is None:
        text = resources.files("oee_ca").joinpath("data/wolfram_classes.txt").read_text()
    else:
        with open(path) as fh:
            text = fh.read()
    table: dict[int, WolframClass] = {}
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        try:
            rule_s, cls_s = line.split()
            table[int(rule_s)] = WolframClass(int(cls_s))
        except (ValueError, KeyError) as exc:
            raise ConfigurationError(f"bad class-table line: {line!r}") from exc
    missing = [n for n in range(256) if n not in table]
    if missing:
        raise ConfigurationError(f"class table missing rules: {missing[:8]}...")
    return table


@lru_cache(maxsize=1)
def _default_class_table() -> dict[int, WolframClass]:
    return load_class_table()


_class_table_override: dict[int, WolframClass] | None = None


def set_default_class_table(path: str | None) -> None:
    """Replace the bundled class table process-wide (None restores it)."""
    global _class_table_override
    _class_table_override = None if path is None else load_class_table(path)


def wolfram_class(n: int, table: dict[int, WolframClass] | None = None) -> WolframClass:
    if not 0 <= n <= 255:
        raise ValueError(f"rule number out of range: {n}")
    if table is None:
        table = _class_table_override
    tab = table if table is not None else _default_class_table()
    try:
        return tab[n]
    except KeyError as exc:
        raise ConfigurationError(f"no class entry for rule {n}") from exc
