"""8x8 unsigned multipliers built from partial products and compressor trees.

A multiplier is described by a MultiplierConfig (architecture family plus
the approximate-compressor truth table) and compiled into a ReductionPlan:
a static, value-independent schedule of 4:2 compressor / full-adder /
half-adder placements per column per stage.  Evaluation replays the plan,
either on scalar operands or vectorized over numpy arrays for exhaustive
sweeps.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .compressor import CompressorTruthTable, proposed_truth_table

N_BITS = 8
N_COLUMNS = 2 * N_BITS - 1  # columns 0..14 hold the initial partial products
PLAN_COLUMNS = 2 * N_BITS  # one extra column for carries out of column 14
MAX_PRODUCT = (2**N_BITS - 1) ** 2


class Family(enum.Enum):
    EXACT = "exact"
    DESIGN1_HYBRID = "design1"
    DESIGN2_TRUNCATED = "design2"
    PROPOSED_FULL_APPROX = "proposed"


# Every stage compresses straight toward the final two-row form; a column
# left at three bits takes a full adder, a pair passes through (two rows
# are accepted by the final adder, so a half adder is never required for
# this geometry, though plans may carry HALF_ADDER placements).
_STAGE_TARGET = 2


@dataclass(frozen=True)
class MultiplierConfig:
    family: Family
    approx_table: CompressorTruthTable = field(default_factory=proposed_truth_table)
    exact_column_threshold: int = 8  # DESIGN1 only
    truncation_width: int = 4  # DESIGN2 only
    compensation: int | None = None  # DESIGN2 only; None derives the constant

    def __post_init__(self) -> None:
        if not 0 <= self.exact_column_threshold <= 14:
            raise ValueError("exact_column_threshold must be in [0, 14]")
        if not 0 <= self.truncation_width <= 7:
            raise ValueError("truncation_width must be in [0, 7]")


@dataclass(frozen=True)
class Placement:
    kind: str  # APPROX_42 | EXACT_42 | FULL_ADDER | HALF_ADDER | PASS
    width: int  # bits consumed from the column


@dataclass(frozen=True)
class ReductionPlan:
    stages: tuple[tuple[tuple[Placement, ...], ...], ...]
    truncation_width: int = 0

    def dump(self) -> str:
        lines = []
        for s, stage in enumerate(self.stages):
            for col, placements in enumerate(stage):
                for pl in placements:
                    lines.append(f"stage={s} col={col} {pl.kind}(x{pl.width})")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class PartialProductMatrix:
    """Per-column lists of AND-array bits; column j carries weight 2^j."""

    columns: tuple[tuple[int, ...], ...]

    @property
    def value(self) -> int:
        return sum((1 << j) * sum(col) for j, col in enumerate(self.columns))


def column_height(j: int) -> int:
    """Height of column j of the un-reduced 8x8 partial-product matrix."""
    if not 0 <= j < N_COLUMNS:
        return 0
    return min(j, 2 * N_BITS - 2 - j) + 1


def generate_pp(a: int, b: int) -> PartialProductMatrix:
    if not (0 <= a <= 255 and 0 <= b <= 255):
        raise ValueError("operands must be 8-bit unsigned")
    cols = []
    for j in range(N_COLUMNS):
        bits = []
        for i in range(max(0, j - (N_BITS - 1)), min(j, N_BITS - 1) + 1):
            bits.append(((a >> i) & 1) & ((b >> (j - i)) & 1))
        cols.append(tuple(bits))
    return PartialProductMatrix(columns=tuple(cols))


def exact_oracle(a: int, b: int) -> int:
    return a * b


def _compressor_kind(cfg: MultiplierConfig, col: int) -> str:
    if cfg.family is Family.EXACT:
        return "EXACT_42"
    if cfg.family is Family.DESIGN1_HYBRID and col >= cfg.exact_column_threshold:
        return "EXACT_42"
    return "APPROX_42"


def build_plan(cfg: MultiplierConfig) -> ReductionPlan:
    """Compile the column-by-column reduction schedule for a configuration.

    Columns are scanned LSB to MSB each stage: while a column holds four or
    more unconsumed bits a 4:2 compressor is placed, a full adder when
    exactly three bits remain and the column would otherwise stay above the
    two-row target, and leftovers pass through.  Carries land in the next
    column of the next stage.  Stages repeat until every column is at most
    two bits tall, then the two rows are added exactly.
    """
    return _build_plan_cached(cfg)


@lru_cache(maxsize=64)
def _build_plan_cached(cfg: MultiplierConfig) -> ReductionPlan:
    heights = [0] * PLAN_COLUMNS
    for j in range(N_COLUMNS):
        heights[j] = column_height(j)
    trunc = 0
    if cfg.family is Family.DESIGN2_TRUNCATED:
        trunc = cfg.truncation_width
        for j in range(trunc):
            heights[j] = 0

    stages: list[tuple[tuple[Placement, ...], ...]] = []
    while max(heights) > 2:
        stage: list[tuple[Placement, ...]] = []
        next_heights = [0] * (PLAN_COLUMNS + 1)
        for j in range(PLAN_COLUMNS):
            n = heights[j]
            placements: list[Placement] = []
            while n >= 4:
                kind = _compressor_kind(cfg, j)
                placements.append(Placement(kind, 4))
                next_heights[j] += 1
                next_heights[j + 1] += 2 if kind == "EXACT_42" else 1
                n -= 4
            if n == 3 and next_heights[j] + n > _STAGE_TARGET:
                placements.append(Placement("FULL_ADDER", 3))
                next_heights[j] += 1
                next_heights[j + 1] += 1
                n = 0
            if n > 0:
                placements.append(Placement("PASS", n))
                next_heights[j] += n
            stage.append(tuple(placements))
        stages.append(tuple(stage))
        heights = next_heights[:PLAN_COLUMNS]
        if next_heights[PLAN_COLUMNS]:
            raise AssertionError("carry out of the top plan column")
    return ReductionPlan(stages=tuple(stages), truncation_width=trunc)


def _table_luts(table: CompressorTruthTable) -> tuple[np.ndarray, np.ndarray]:
    carry = np.array([table[i][0] for i in range(16)], dtype=np.int64)
    s = np.array([table[i][1] for i in range(16)], dtype=np.int64)
    return carry, s


def _initial_columns(
    a: np.ndarray, b: np.ndarray, trunc: int
) -> list[list[np.ndarray]]:
    cols: list[list[np.ndarray]] = [[] for _ in range(PLAN_COLUMNS)]
    for j in range(trunc, N_COLUMNS):
        for i in range(max(0, j - (N_BITS - 1)), min(j, N_BITS - 1) + 1):
            cols[j].append(((a >> i) & 1) * ((b >> (j - i)) & 1))
    return cols


def _run_plan(
    cfg: MultiplierConfig, plan: ReductionPlan, a: np.ndarray, b: np.ndarray
) -> np.ndarray:
    carry_lut, sum_lut = _table_luts(cfg.approx_table)
    cols = _initial_columns(a, b, plan.truncation_width)
    for stage in plan.stages:
        nxt: list[list[np.ndarray]] = [[] for _ in range(PLAN_COLUMNS + 1)]
        for j, placements in enumerate(stage):
            bits = cols[j]
            pos = 0
            for pl in placements:
                take = bits[pos : pos + pl.width]
                pos += pl.width
                if pl.kind == "APPROX_42":
                    idx = take[0] | (take[1] << 1) | (take[2] << 2) | (take[3] << 3)
                    nxt[j].append(sum_lut[idx])
                    nxt[j + 1].append(carry_lut[idx])
                elif pl.kind == "EXACT_42":
                    # value preserved as sum@j plus two carries@j+1
                    t = take[0] + take[1] + take[2] + take[3]
                    k = t >> 1
                    nxt[j].append(t & 1)
                    nxt[j + 1].append((k + 1) >> 1)
                    nxt[j + 1].append(k >> 1)
                elif pl.kind == "FULL_ADDER":
                    t = take[0] + take[1] + take[2]
                    nxt[j].append(t & 1)
                    nxt[j + 1].append(t >> 1)
                elif pl.kind == "HALF_ADDER":
                    t = take[0] + take[1]
                    nxt[j].append(t & 1)
                    nxt[j + 1].append(t >> 1)
                elif pl.kind == "PASS":
                    nxt[j].extend(take)
                else:
                    raise ValueError(f"unknown placement kind {pl.kind!r}")
            if pos != len(bits):
                raise ValueError(
                    f"plan/column mismatch at col {j}: {pos} consumed, {len(bits)} present"
                )
        if nxt[PLAN_COLUMNS]:
            raise ValueError("carry out of the top plan column")
        cols = nxt[:PLAN_COLUMNS]
    # final carry-propagate addition, done behaviorally on the two rows
    total = np.zeros_like(a, dtype=np.int64)
    for j, col in enumerate(cols):
        if len(col) > 2:
            raise ValueError(f"column {j} still {len(col)} tall after the plan")
        for bit in col:
            total += bit.astype(np.int64) << j
    if cfg.family is Family.DESIGN2_TRUNCATED:
        total += resolve_compensation(cfg)
    return total


def resolve_compensation(cfg: MultiplierConfig) -> int:
    if cfg.family is not Family.DESIGN2_TRUNCATED:
        return 0
    if cfg.compensation is not None:
        return cfg.compensation
    return derive_compensation(cfg)


@lru_cache(maxsize=16)
def _derived_compensation(width: int) -> int:
    if width == 0:
        return 0
    a, b = _full_operand_grid()
    dropped = np.zeros_like(a, dtype=np.int64)
    for j in range(width):
        count = np.zeros_like(a, dtype=np.int64)
        for i in range(max(0, j - (N_BITS - 1)), min(j, N_BITS - 1) + 1):
            count += ((a >> i) & 1) * ((b >> (j - i)) & 1)
        dropped += count << j
    return round(float(dropped.mean()))


def derive_compensation(cfg: MultiplierConfig) -> int:
    """Mean value truncated away, over all 65,536 operand pairs, rounded."""
    if cfg.family is not Family.DESIGN2_TRUNCATED:
        raise ValueError("compensation only applies to the truncated family")
    return _derived_compensation(cfg.truncation_width)


def _full_operand_grid() -> tuple[np.ndarray, np.ndarray]:
    idx = np.arange(1 << 16, dtype=np.int64)
    return idx >> 8, idx & 0xFF


def evaluate(cfg: MultiplierConfig, a: int, b: int) -> int:
    """Simulate the multiplier on one operand pair; returns the 16-bit result."""
    if not (0 <= a <= 255 and 0 <= b <= 255):
        raise ValueError("operands must be 8-bit unsigned")
    plan = build_plan(cfg)
    out = _run_plan(cfg, plan, np.array([a], dtype=np.int64), np.array([b], dtype=np.int64))
    return int(out[0])


def evaluate_many(cfg: MultiplierConfig, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Vectorized evaluate over matching arrays of 8-bit operands."""
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    if a.shape != b.shape:
        raise ValueError("operand arrays must have matching shapes")
    if a.size and (a.min() < 0 or a.max() > 255 or b.min() < 0 or b.max() > 255):
        raise ValueError("operands must be 8-bit unsigned")
    return _run_plan(cfg, build_plan(cfg), a, b)


def evaluate_all(cfg: MultiplierConfig) -> np.ndarray:
    """Results for every operand pair, indexed by (a << 8) | b."""
    a, b = _full_operand_grid()
    return evaluate_many(cfg, a, b)
