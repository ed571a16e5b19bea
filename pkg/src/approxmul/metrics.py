"""Error metrics and the exhaustive 2^16 sweep engine.

The metric definitions follow the usual approximate-arithmetic conventions:
ED is the absolute difference per case, ER the percentage of differing
cases, RED the error normalized by the exact output, MRED the mean RED,
and NMED the mean ED normalized by the maximum exact output (255^2 for
8x8 operands).
"""

from __future__ import annotations

import io
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .multiplier import (
    MAX_PRODUCT,
    MultiplierConfig,
    evaluate_all,
    _full_operand_grid,
)

N_CASES = 1 << 16


def error_distance(exact: int, approx: int) -> int:
    return abs(exact - approx)


def error_rate(cases: Sequence[tuple[int, int]]) -> float:
    """Percentage of cases where the approximate output differs."""
    if len(cases) == 0:
        raise ValueError("error_rate needs at least one case")
    wrong = sum(1 for e, a in cases if e != a)
    return 100.0 * wrong / len(cases)


def relative_error_distance(exact: int, approx: int) -> float:
    """ED normalized by |exact|; 0 when both are zero.

    A case with exact == 0 but approx != 0 has no finite RED and comes back
    as infinity; averaging callers exclude it (see mred).
    """
    ed = abs(exact - approx)
    if exact == 0:
        return 0.0 if ed == 0 else float("inf")
    return ed / abs(exact)


def mred(cases: Sequence[tuple[int, int]]) -> float:
    """Mean RED as a percentage, over cases with a defined RED.

    Cases with exact == 0 and approx != 0 are excluded from the average
    (they divide by zero); the sweep report tallies them separately.
    """
    if len(cases) == 0:
        raise ValueError("mred needs at least one case")
    total = 0.0
    included = 0
    for e, a in cases:
        red = relative_error_distance(e, a)
        if red == float("inf"):
            continue
        total += red
        included += 1
    if included == 0:
        raise ValueError("no cases with a defined RED")
    return 100.0 * total / included


def nmed(cases: Sequence[tuple[int, int]], max_exact: int = MAX_PRODUCT) -> float:
    """Mean ED normalized by the maximum exact output, as a percentage."""
    if max_exact <= 0:
        raise ValueError("max_exact must be positive")
    if len(cases) == 0:
        raise ValueError("nmed needs at least one case")
    mean_ed = sum(abs(e - a) for e, a in cases) / len(cases)
    return 100.0 * mean_ed / max_exact


@dataclass(frozen=True)
class ErrorReport:
    design_label: str
    n_cases: int
    er_percent: float
    nmed_percent: float
    mred_percent: float
    max_ed: int
    mean_ed: float
    ed_histogram: dict[int, int]
    zero_exact_nonzero_approx: int = 0

    def __post_init__(self) -> None:
        if sum(self.ed_histogram.values()) != self.n_cases:
            raise ValueError("histogram counts must sum to n_cases")

    @property
    def csv_header(self) -> str:
        return "design,er,nmed,mred,max_ed,mean_ed"

    def to_csv_row(self) -> str:
        return (
            f"{self.design_label},{self.er_percent:.3f},{self.nmed_percent:.3f},"
            f"{self.mred_percent:.3f},{self.max_ed},{self.mean_ed:.6f}"
        )

    def to_csv(self) -> str:
        return f"{self.csv_header}\n{self.to_csv_row()}\n"

    def histogram_csv(self) -> str:
        out = io.StringIO()
        out.write("ed,count\n")
        for ed in sorted(self.ed_histogram):
            out.write(f"{ed},{self.ed_histogram[ed]}\n")
        return out.getvalue()

    def pretty(self) -> str:
        return (
            f"{'Design':<24} {'ER (%)':>9} {'NMED (%)':>9} {'MRED (%)':>9} {'max ED':>8}\n"
            f"{self.design_label:<24} {self.er_percent:>9.3f} {self.nmed_percent:>9.3f} "
            f"{self.mred_percent:>9.3f} {self.max_ed:>8d}"
        )


def report_from_outputs(
    label: str, exact: np.ndarray, approx: np.ndarray
) -> ErrorReport:
    """Aggregate every metric from matched exact/approximate output arrays."""
    exact = np.asarray(exact, dtype=np.int64)
    approx = np.asarray(approx, dtype=np.int64)
    if exact.shape != approx.shape or exact.size == 0:
        raise ValueError("need matching non-empty output arrays")
    ed = np.abs(exact - approx)
    n = exact.size
    er = 100.0 * int(np.count_nonzero(ed)) / n
    mean_ed = float(ed.mean())
    nmed_pct = 100.0 * mean_ed / MAX_PRODUCT
    nz = exact != 0
    undefined = int(np.count_nonzero(~nz & (ed != 0)))
    included = int(np.count_nonzero(nz)) + int(np.count_nonzero(~nz & (ed == 0)))
    red_sum = float((ed[nz] / exact[nz]).sum())
    mred_pct = 100.0 * red_sum / included
    values, counts = np.unique(ed, return_counts=True)
    hist = {int(v): int(c) for v, c in zip(values, counts)}
    return ErrorReport(
        design_label=label,
        n_cases=n,
        er_percent=er,
        nmed_percent=nmed_pct,
        mred_percent=mred_pct,
        max_ed=int(ed.max()),
        mean_ed=mean_ed,
        ed_histogram=hist,
        zero_exact_nonzero_approx=undefined,
    )


def exhaustive_sweep(cfg: MultiplierConfig, label: str | None = None) -> ErrorReport:
    """Compare the configured multiplier against a*b over all 65,536 pairs."""
    a, b = _full_operand_grid()
    exact = a * b
    approx = evaluate_all(cfg)
    return report_from_outputs(label or cfg.family.value, exact, approx)


def build_product_lut(cfg: MultiplierConfig) -> np.ndarray:
    """65,536-entry uint16 product table indexed by (a << 8) | b."""
    return evaluate_all(cfg).astype(np.uint16)


def merge_histograms(parts: Iterable[dict[int, int]]) -> dict[int, int]:
    total: Counter[int] = Counter()
    for p in parts:
        total.update(p)
    return dict(total)
