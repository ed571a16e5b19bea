import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from approxmul.metrics import (
    ErrorReport,
    build_product_lut,
    error_distance,
    error_rate,
    exhaustive_sweep,
    merge_histograms,
    mred,
    nmed,
    relative_error_distance,
    report_from_outputs,
)
from approxmul.multiplier import Family, MultiplierConfig, evaluate

CFG_EXACT = MultiplierConfig(Family.EXACT)
CFG_PROPOSED = MultiplierConfig(Family.PROPOSED_FULL_APPROX)


def test_error_distance_examples():
    assert error_distance(100, 100) == 0
    assert error_distance(65025, 65024) == 1
    assert error_distance(0, 5) == 5


def test_error_rate_examples():
    assert error_rate([(1, 1), (2, 2), (3, 3)]) == 0.0
    assert error_rate([(1, 0), (2, 2)]) == 50.0
    with pytest.raises(ValueError):
        error_rate([])


def test_relative_error_distance_examples():
    assert relative_error_distance(200, 198) == pytest.approx(0.01)
    assert relative_error_distance(0, 0) == 0.0
    assert relative_error_distance(50, 45) == pytest.approx(0.1)
    assert relative_error_distance(0, 7) == math.inf


def test_mred_examples():
    assert mred([(100, 100), (200, 200)]) == 0.0
    assert mred([(200, 198), (50, 45)]) == pytest.approx(100 * (0.01 + 0.1) / 2)
    # undefined-RED cases are excluded from the average
    assert mred([(0, 5), (100, 90)]) == pytest.approx(10.0)
    with pytest.raises(ValueError):
        mred([])


def test_nmed_examples():
    assert nmed([(65025, 65024)], 65025) == pytest.approx(100 / 65025)
    assert nmed([(10, 10), (20, 20)]) == 0.0
    with pytest.raises(ValueError):
        nmed([(1, 1)], 0)


@given(st.lists(st.tuples(st.integers(0, 65025), st.integers(0, 65025)), min_size=1))
def test_metrics_order_independent(cases):
    rev = list(reversed(cases))
    assert error_rate(cases) == error_rate(rev)
    assert nmed(cases) == pytest.approx(nmed(rev))
    try:
        assert mred(cases) == pytest.approx(mred(rev))
    except ValueError:
        pass  # all cases can have undefined RED


def test_exhaustive_sweep_exact_all_zero():
    report = exhaustive_sweep(CFG_EXACT)
    assert report.n_cases == 65536
    assert report.er_percent == 0.0
    assert report.nmed_percent == 0.0
    assert report.mred_percent == 0.0
    assert report.max_ed == 0
    assert report.ed_histogram == {0: 65536}


def test_exhaustive_sweep_proposed_consistency():
    report = exhaustive_sweep(CFG_PROPOSED)
    # internal cross-checks between the aggregates
    assert report.nmed_percent == pytest.approx(100 * report.mean_ed / 65025)
    assert report.er_percent == pytest.approx(
        100 * (1 - report.ed_histogram[0] / report.n_cases)
    )
    assert sum(report.ed_histogram.values()) == report.n_cases
    assert report.zero_exact_nonzero_approx == 0
    assert report.max_ed == max(report.ed_histogram)


def test_report_validation():
    with pytest.raises(ValueError):
        ErrorReport("x", 10, 0, 0, 0, 0, 0.0, {0: 9})


def test_report_csv_and_pretty():
    report = exhaustive_sweep(CFG_EXACT)
    text = report.to_csv()
    assert text.splitlines()[0] == "design,er,nmed,mred,max_ed,mean_ed"
    assert text.splitlines()[1].startswith("exact,0.000,0.000,0.000,0,")
    hist = report.histogram_csv()
    assert hist == "ed,count\n0,65536\n"
    assert "ER (%)" in report.pretty()


def test_build_product_lut_matches_evaluate():
    lut = build_product_lut(CFG_PROPOSED)
    assert lut.dtype == np.uint16
    assert lut.shape == (65536,)
    rng = np.random.default_rng(7)
    for a, b in rng.integers(0, 256, size=(1000, 2)):
        assert int(lut[(a << 8) | b]) == evaluate(CFG_PROPOSED, int(a), int(b))


def test_build_product_lut_exact_is_plain_product():
    lut = build_product_lut(CFG_EXACT)
    idx = np.arange(1 << 16)
    assert np.array_equal(lut.astype(np.int64), (idx >> 8) * (idx & 0xFF))


def test_report_from_outputs_partitions_merge():
    # aggregation by halves must agree with the single-shot report
    idx = np.arange(1 << 16)
    exact = (idx >> 8) * (idx & 0xFF)
    from approxmul.multiplier import evaluate_all

    approx = evaluate_all(CFG_PROPOSED)
    full = report_from_outputs("p", exact, approx)
    lo = report_from_outputs("p", exact[:32768], approx[:32768])
    hi = report_from_outputs("p", exact[32768:], approx[32768:])
    merged = merge_histograms([lo.ed_histogram, hi.ed_histogram])
    assert merged == full.ed_histogram
    assert lo.n_cases + hi.n_cases == full.n_cases
    assert full.mean_ed == pytest.approx((lo.mean_ed + hi.mean_ed) / 2)


def test_zero_exact_nonzero_approx_tally():
    report = exhaustive_sweep(MultiplierConfig(Family.DESIGN2_TRUNCATED))
    # compensation constant fires on every zero-product pair except where
    # it happens to be zero
    assert report.zero_exact_nonzero_approx == 511
