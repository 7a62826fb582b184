"""Tests for the residual z-statistic and the window-vs-window drift pipeline."""

import json
from datetime import datetime, timedelta, timezone

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose, assert_array_equal

from utdd import (
    DegenerateInputError,
    FeatureSpec,
    InvalidArgumentError,
    SeasonalComponentConfig,
    SimConfig,
    TimeSeries,
    TrendConfig,
    compute_zscore,
    detect,
    load_report,
    run_utdd,
    save_report,
    simulate_series,
    utdd,
)
from utdd.drift import DEFAULT_THRESHOLD, write_fit_csv, write_residual_csv
from utdd.series import read_timestamp_table

UTC = timezone.utc
T0 = datetime(2020, 8, 1, tzinfo=UTC)
SEP = datetime(2020, 9, 1, tzinfo=UTC)
OCT = datetime(2020, 10, 1, tzinfo=UTC)
FEATS = (FeatureSpec("day_of_week"), FeatureSpec("hour_of_day"))


def two_month_series(seed=0):
    cfg = SimConfig(
        start=T0,
        step=3600.0,
        n=1464,
        components=(SeasonalComponentConfig(24, 0.003),),
        sigma_eps=0.3,
        weekend_scale=0.9,
        trend=TrendConfig(level=10.0),
        seed=seed,
    )
    return simulate_series(cfg)


# ---------------------------------------------------------------------------
# z-statistic
# ---------------------------------------------------------------------------

def test_zscore_hand_computed():
    # [1,2,3,4]: mean abs deviation 1.0, population std sqrt(1.25)
    assert_allclose(compute_zscore(np.array([1.0, 2.0, 3.0, 4.0])), 1.0 / np.sqrt(1.25))
    # symmetric two-point and alternating cases collapse to 1.0
    assert compute_zscore(np.array([0.0, 2.0])) == 1.0
    assert compute_zscore(np.array([1.0, -1.0] * 10)) == 1.0


def test_zscore_gaussian_limit():
    rng = np.random.default_rng(0)
    z = compute_zscore(rng.standard_normal(50_000))
    assert abs(z - np.sqrt(2.0 / np.pi)) < 0.01


@given(
    scale=st.floats(min_value=1e-3, max_value=1e6),
    shift_factor=st.floats(min_value=-1e4, max_value=1e4),
)
@settings(max_examples=50, deadline=None)
def test_zscore_scale_shift_invariant(scale, shift_factor):
    # the shift is expressed in units of the scaled data so the test stays
    # within float cancellation limits; the statistic itself is exactly
    # invariant in real arithmetic
    rng = np.random.default_rng(1)
    r = rng.standard_normal(500)
    assert abs(compute_zscore(scale * r + shift_factor * scale) - compute_zscore(r)) < 1e-10


def test_zscore_errors():
    with pytest.raises(InvalidArgumentError):
        compute_zscore(np.array([1.0]))
    with pytest.raises(DegenerateInputError):
        compute_zscore(np.full(10, 3.0))


def test_detect_threshold_boundary():
    # exactly representable values: delta == threshold counts as drift
    assert detect(0.5, 0.75, 0.25)
    assert detect(0.0, 0.1, 0.1)
    assert not detect(0.5, 0.74, 0.25)
    assert detect(0.75, 0.5, 0.25)        # direction does not matter


# ---------------------------------------------------------------------------
# two-window pipeline
# ---------------------------------------------------------------------------

def test_self_comparison_has_zero_delta():
    s = two_month_series()
    ref = s.window(T0, SEP)
    report = utdd(ref, ref, FEATS)
    assert report.delta == 0.0
    assert not report.drifted
    assert report.threshold == DEFAULT_THRESHOLD


def test_clean_windows_do_not_drift():
    s = two_month_series(seed=3)
    report = utdd(s.window(T0, SEP), s.window(SEP, OCT), FEATS)
    assert not report.drifted
    assert report.delta < 0.05


def test_run_utdd_exposes_window_fits():
    s = two_month_series(seed=4)
    res = run_utdd(s.window(T0, SEP), s.window(SEP, OCT), FEATS)
    for fit in (res.reference, res.current):
        assert len(fit.grid) == len(fit.seasonal) == len(fit.residual)
        assert_allclose(fit.grid.values - fit.seasonal, fit.residual, atol=0)
    assert res.report.z_ref == compute_zscore(res.reference.residual)
    assert res.report.z_curr == compute_zscore(res.current.residual)


def test_differencing_order_comes_from_reference():
    rng = np.random.default_rng(0)
    walk = np.cumsum(rng.standard_normal(800)) * 0.2
    noise = rng.standard_normal(800) * 0.2
    s = TimeSeries(T0, 3600.0, np.concatenate([walk, noise + walk[-1]]))
    ref = s.window(T0, T0 + timedelta(hours=800))
    cur = s.window(T0 + timedelta(hours=800), T0 + timedelta(hours=1600))
    res = run_utdd(ref, cur, FEATS)
    assert res.k_diffs == 1
    # both windows were differenced once
    assert len(res.reference.grid) == len(ref) - 1
    assert len(res.current.grid) == len(cur) - 1


def test_reuse_model_scores_current_with_reference_fit():
    s = two_month_series(seed=6)
    ref, cur = s.window(T0, SEP), s.window(SEP, OCT)
    shared = run_utdd(ref, cur, FEATS, reuse_model=True)
    assert shared.current.model is shared.reference.model
    separate = run_utdd(ref, cur, FEATS, reuse_model=False)
    assert separate.current.model is not separate.reference.model
    assert shared.report.z_ref == separate.report.z_ref


def test_run_utdd_validation():
    s = two_month_series(seed=7)
    ref, cur = s.window(T0, SEP), s.window(SEP, OCT)
    with pytest.raises(InvalidArgumentError):
        run_utdd(ref, cur, FEATS, threshold=0.0)
    with pytest.raises(InvalidArgumentError):
        run_utdd(ref, cur, FEATS, threshold=-0.1)
    flat = TimeSeries(T0, 3600.0, np.full(400, 5.0))
    with pytest.raises(DegenerateInputError):
        run_utdd(flat, flat, FEATS)


# ---------------------------------------------------------------------------
# report artifacts
# ---------------------------------------------------------------------------

def test_report_json_roundtrip(tmp_path):
    s = two_month_series(seed=8)
    res = run_utdd(s.window(T0, SEP), s.window(SEP, OCT), FEATS)
    path = tmp_path / "report.json"
    save_report(res.report, path, extra={"k_diffs": res.k_diffs})
    back = load_report(path)
    assert back.z_ref == res.report.z_ref
    assert back.z_curr == res.report.z_curr
    assert back.delta == res.report.delta
    assert back.threshold == res.report.threshold
    assert back.drifted == res.report.drifted
    assert_array_equal(back.residual_curr, res.report.residual_curr)
    doc = json.loads(path.read_text())
    assert doc["k_diffs"] == res.k_diffs


def test_fit_csv_and_residual_csv(tmp_path):
    s = two_month_series(seed=9)
    res = run_utdd(s.window(T0, SEP), s.window(SEP, OCT), FEATS)
    fit_path = tmp_path / "fit.csv"
    resid_path = tmp_path / "resid.csv"
    write_fit_csv(res.current, fit_path)
    write_residual_csv(res.current, resid_path)

    cols, ts, data = read_timestamp_table(fit_path)
    assert cols == ["observed", "seasonal", "residual"]
    assert len(ts) == len(res.current.grid)
    assert_array_equal(data[:, 0], res.current.grid.values)
    assert_array_equal(data[:, 1], res.current.seasonal)
    assert_array_equal(data[:, 2], res.current.residual)
    # the decomposition identity holds row by row
    assert_allclose(data[:, 0], data[:, 1] + data[:, 2], atol=0)

    cols, ts, data = read_timestamp_table(resid_path)
    assert cols == ["residual"]
    assert_array_equal(data[:, 0], res.current.residual)


def test_fit_csv_rewrite_is_byte_identical(tmp_path):
    s = two_month_series(seed=10)
    res = run_utdd(s.window(T0, SEP), s.window(SEP, OCT), FEATS)
    p1 = tmp_path / "fit1.csv"
    write_fit_csv(res.current, p1)
    cols, ts, data = read_timestamp_table(p1)
    from utdd.series import write_timestamp_table

    p2 = tmp_path / "fit2.csv"
    write_timestamp_table(p2, cols, ts, [data[:, i] for i in range(data.shape[1])])
    assert p1.read_bytes() == p2.read_bytes()
