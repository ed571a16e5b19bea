#!/usr/bin/env python3
"""Sweep the hybrid family's exact/approximate column boundary.

For each threshold k, columns below k use the approximate compressor and
columns at or above k use exact cells.  k=0 degenerates to a fully exact
reduction; larger k trades accuracy for (hardware) cost.

Usage:  python3 scripts/threshold_study.py [--out results/threshold_study.csv]
"""

import argparse
from pathlib import Path

from approxmul.metrics import exhaustive_sweep
from approxmul.multiplier import Family, MultiplierConfig


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", type=Path,
                        default=Path("results/threshold_study.csv"))
    args = parser.parse_args()
    args.out.parent.mkdir(parents=True, exist_ok=True)

    rows = ["threshold,er,nmed,mred,max_ed"]
    print(f"{'k':>3} {'ER (%)':>9} {'NMED (%)':>9} {'MRED (%)':>9} {'max ED':>8}")
    for k in range(0, 15):
        cfg = MultiplierConfig(Family.DESIGN1_HYBRID, exact_column_threshold=k)
        report = exhaustive_sweep(cfg)
        print(f"{k:>3} {report.er_percent:>9.4f} {report.nmed_percent:>9.4f} "
              f"{report.mred_percent:>9.4f} {report.max_ed:>8d}")
        rows.append(f"{k},{report.er_percent},{report.nmed_percent},"
                    f"{report.mred_percent},{report.max_ed}")
    args.out.write_text("\n".join(rows) + "\n")
    print(f"\nwrote {args.out}")


if __name__ == "__main__":
    main()
