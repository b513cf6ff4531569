"""
Tests for confidence distributions, their combination and missing-value reconstruction
"""
import os
import sys

import numpy as np
import pytest

# Add the project root to the path so modules can be imported properly
project_root = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
sys.path.insert(0, project_root)

from inference import confid  # noqa: E402
from inference.confid import ConfidenceDistribution  # noqa: E402
from inference.modelsel import FocusSpec  # noqa: E402
from tsmodel import argauss  # noqa: E402
from tsmodel.argauss import ArxFit, ArxSpec  # noqa: E402
from tsmodel.errors import DegenerateError, InsufficientDataError, NonStationaryError  # noqa: E402
from tsmodel.frame import Frame, Series  # noqa: E402

KOLA_INTERVALS = [(2.44, 5.06), (2.58, 5.16), (2.62, 5.29), (3.02, 5.64)]


def test_normal_cd_quantiles_and_intervals():
    cd = ConfidenceDistribution.normal("theta", 2.0, 0.5)
    assert float(cd.cdf(2.0)) == pytest.approx(0.5)
    lo, hi = confid.interval(cd, 0.90)
    assert lo == pytest.approx(2.0 - 1.6449 * 0.5, abs=1e-4)
    assert hi == pytest.approx(2.0 + 1.6449 * 0.5, abs=1e-4)
    lo, hi = confid.interval(cd, 0.95)
    assert hi - 2.0 == pytest.approx(1.95996 * 0.5, abs=1e-5)
    lo, hi = confid.interval(cd, 1e-9)
    assert lo == pytest.approx(2.0, abs=1e-8) and hi == pytest.approx(2.0, abs=1e-8)


@pytest.mark.parametrize("level", [0.0, 1.0, -0.1, 1.5])
def test_interval_rejects_bad_levels(level):
    with pytest.raises(ValueError):
        confid.interval(ConfidenceDistribution.normal("theta", 0.0, 1.0), level)


def test_zero_spread_is_degenerate():
    with pytest.raises(DegenerateError):
        ConfidenceDistribution.normal("theta", 0.0, 0.0)


def test_confidence_curve():
    cd = ConfidenceDistribution.normal("theta", 1.0, 2.0)
    cc = confid.confidence_curve(cd)
    assert float(cc(1.0)) == pytest.approx(0.0, abs=1e-15)
    assert float(cc(cd.quantile(0.975))) == pytest.approx(0.95, abs=1e-12)
    assert float(cc(1e6)) == pytest.approx(1.0)
    assert float(cc(-1e6)) == pytest.approx(1.0)
    np.testing.assert_allclose(cc.level_set(0.95), confid.interval(cd, 0.95), atol=1e-8)


def test_combine_identical_normals():
    cd = ConfidenceDistribution.normal("kola", 3.0, 0.4)
    combined = confid.combine([cd, cd])
    assert combined.center == pytest.approx(3.0)
    assert combined.spread == pytest.approx(0.4 / np.sqrt(2))


def test_combine_published_intervals():
    cds = [confid.normal_from_interval("kola", lo, hi, 0.95) for lo, hi in KOLA_INTERVALS]
    lo, hi = confid.interval(confid.combine(cds), 0.95)
    assert lo == pytest.approx(3.32, abs=0.05)
    assert hi == pytest.approx(4.63, abs=0.05)


def test_combine_dominant_precision():
    combined = confid.combine([ConfidenceDistribution.normal("t", 1.0, 1e-6),
                               ConfidenceDistribution.normal("t", 5.0, 1.0)])
    assert combined.center == pytest.approx(1.0, abs=1e-6)


def test_combine_input_checks():
    cd = ConfidenceDistribution.normal("a", 0.0, 1.0)
    with pytest.raises(ValueError):
        confid.combine([cd])
    with pytest.raises(ValueError):
        confid.combine([cd, ConfidenceDistribution.normal("b", 0.0, 1.0)])


def test_combine_grid_input_agrees_with_precision_weighting():
    theta = np.linspace(-8.0, 8.0, 4001)
    grid = ConfidenceDistribution.from_grid("t", theta, ConfidenceDistribution.normal("t", 0.0, 1.0).cdf(theta))
    combined = confid.combine([grid, ConfidenceDistribution.normal("t", 2.0, 1.0)])
    assert combined.family == "grid"
    assert combined.center == pytest.approx(1.0, abs=0.02)
    assert combined.spread == pytest.approx(1 / np.sqrt(2), abs=0.02)


def test_from_grid_validation():
    with pytest.raises(ValueError):
        ConfidenceDistribution.from_grid("t", [0.0, 1.0, 0.5], [0.1, 0.5, 0.9])
    with pytest.raises(ValueError):
        ConfidenceDistribution.from_grid("t", [0.0, 1.0, 2.0], [0.1, 0.9, 0.5])


def test_cd_dict_round_trip_and_grid_rows():
    cd = ConfidenceDistribution.normal("pred:3", 6.1, 0.7)
    assert ConfidenceDistribution.from_dict(cd.to_dict()).to_dict() == cd.to_dict()
    rows = cd.grid_rows(51)
    assert len(rows) == 51
    assert all(abs(cc - abs(1 - 2 * c)) < 1e-12 for _, c, cc in rows)


def test_normal_from_interval():
    cd = confid.normal_from_interval("t", 2.0, 6.0, 0.95)
    assert cd.center == pytest.approx(4.0)
    np.testing.assert_allclose(confid.interval(cd, 0.95), (2.0, 6.0), atol=1e-10)
    with pytest.raises(ValueError):
        confid.normal_from_interval("t", 6.0, 2.0)


def test_cd_from_fit_prediction():
    truth = ArxFit.from_params(ArxSpec(response="y", ar_order=1), [5.0], [0.5], 1.0)
    frame = Frame.of(argauss.simulate(truth, None, 120, seed=31, start_year=1900))
    fit = argauss.fit(ArxSpec(response="y", ar_order=1), frame)
    focus = FocusSpec.prediction(2)
    cd = confid.cd_from_fit(fit, frame, focus)
    assert cd.focus_label == "pred:2"
    assert cd.center == pytest.approx(argauss.forecast(fit, frame, 2)[-1].mean)
    assert cd.spread > argauss.forecast(fit, frame, 2)[-1].sd
    assert float(cd.cdf(cd.center)) == pytest.approx(0.5)


def test_reconstruct_without_gaps_is_identity():
    s = Series("y", 2000, [1.0, 2.0, 1.5, 0.5])
    fit = ArxFit.from_params(ArxSpec(response="y", ar_order=1), [1.0], [0.5], 1.0)
    rec = confid.reconstruct_missing(s, fit)
    np.testing.assert_array_equal(rec.series.values, s.values)
    assert rec.filled_years == []
    assert np.all(rec.cond_sd.values == 0)


def test_reconstruct_single_gap_closed_form():
    rho, mu = 0.6, 2.0
    rng = np.random.default_rng(3)
    values = mu + rng.standard_normal(30)
    values[15] = np.nan
    s = Series("y", 1950, values)
    fit = ArxFit.from_params(ArxSpec(response="y", ar_order=1), [mu], [rho], 1.0)
    rec = confid.reconstruct_missing(s, fit)
    a, b = values[14], values[16]
    expected = mu + rho * ((a - mu) + (b - mu)) / (1 + rho ** 2)
    assert rec.series.value_at(1965) == pytest.approx(expected, abs=1e-8)
    assert rec.cond_sd.value_at(1965) == pytest.approx(1 / np.sqrt(1 + rho ** 2), abs=1e-8)
    assert rec.filled_years == [1965]
    observed = ~s.mask
    np.testing.assert_array_equal(rec.series.values[observed], values[observed])


def test_reconstruct_beats_linear_interpolation_on_long_gap():
    fit = ArxFit.from_params(ArxSpec(response="y", ar_order=1), [0.0], [0.7], 1.0)
    gap = np.arange(40, 47)
    rec_err, lin_err = [], []
    for seed in range(100):
        truth = argauss.simulate(fit, None, 90, seed=seed, start_year=1).values
        values = np.array(truth)
        values[gap] = np.nan
        rec = confid.reconstruct_missing(Series("y", 1, values), fit)
        linear = np.interp(gap, [gap[0] - 1, gap[-1] + 1], [truth[gap[0] - 1], truth[gap[-1] + 1]])
        rec_err.append(np.mean((rec.series.values[gap] - truth[gap]) ** 2))
        lin_err.append(np.mean((linear - truth[gap]) ** 2))
    assert np.mean(rec_err) < np.mean(lin_err)


def test_reconstruct_errors():
    fit = ArxFit.from_params(ArxSpec(response="y", ar_order=1), [0.0], [0.5], 1.0)
    with pytest.raises(InsufficientDataError):
        confid.reconstruct_missing(Series("y", 2000, [np.nan, np.nan]), fit)
    unit_root = ArxFit.from_params(ArxSpec(response="y", ar_order=1), [0.0], [1.0], 1.0)
    with pytest.raises(NonStationaryError):
        confid.reconstruct_missing(Series("y", 2000, [1.0, np.nan, 2.0]), unit_root)


def test_combine_ignores_order_and_grouping():
    a = ConfidenceDistribution.normal("kola", 3.1, 0.6)
    b = ConfidenceDistribution.normal("kola", 4.2, 0.9)
    c = ConfidenceDistribution.normal("kola", 3.7, 0.4)
    together = confid.combine([a, b, c])
    shuffled = confid.combine([c, a, b])
    grouped = confid.combine([confid.combine([a, b]), c])
    for other in (shuffled, grouped):
        assert other.center == pytest.approx(together.center, abs=1e-12)
        assert other.spread == pytest.approx(together.spread, abs=1e-12)


def test_prediction_intervals_cover_next_value():
    truth = ArxFit.from_params(ArxSpec(response="y", ar_order=1), [5.0], [0.5], 1.0)
    spec = ArxSpec(response="y", ar_order=1)
    focus = FocusSpec.prediction(1)
    hits = 0
    n_reps = 300
    for seed in range(n_reps):
        values = argauss.simulate(truth, None, 81, seed=2000 + seed, start_year=1).values
        frame = Frame.of(Series("y", 1, values[:80]))
        lo, hi = confid.interval(confid.cd_from_fit(argauss.fit(spec, frame), frame, focus), 0.9)
        hits += lo <= values[80] <= hi
    # about three binomial standard errors around 90%
    assert abs(hits / n_reps - 0.9) <= 0.05


def test_reconstruct_with_lagged_covariate():
    rho = 0.5
    rng = np.random.default_rng(9)
    x = rng.standard_normal(30)
    mu = np.full(30, np.nan)
    mu[1:] = 1.0 + 2.0 * x[:-1]
    y = mu + rng.standard_normal(30)
    y[0] = 0.3
    y[[1, 20]] = np.nan
    frame = Frame.from_arrays(2000, x=x)
    fit = ArxFit.from_params(ArxSpec(response="y", regressors=(("x", 1),), ar_order=1), [1.0, 2.0], [rho], 1.0)
    rec = confid.reconstruct_missing(Series("y", 2000, y), fit, frame)
    interior = mu[20] + rho * ((y[19] - mu[19]) + (y[21] - mu[21])) / (1 + rho ** 2)
    assert rec.series.value_at(2020) == pytest.approx(interior, abs=1e-8)
    # the first year has no lagged covariate, so only later years condition the early gap
    assert rec.series.value_at(2001) == pytest.approx(mu[1] + rho * (y[2] - mu[2]), abs=1e-8)
    assert rec.filled_years == [2001, 2020]
