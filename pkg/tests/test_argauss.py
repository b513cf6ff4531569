"""
Tests for the AR-with-covariates engine
"""
import os
import sys

import numpy as np
import pytest

# Add the project root to the path so modules can be imported properly
project_root = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
sys.path.insert(0, project_root)

from tsmodel import argauss  # noqa: E402
from tsmodel.argauss import ArxFit, ArxSpec  # noqa: E402
from tsmodel.errors import InsufficientDataError, NonStationaryError, SingularDesignError  # noqa: E402
from tsmodel.frame import Frame, Series  # noqa: E402


def _ar_frame(rho, n, seed, intercept=0.0, sigma=1.0, name="y"):
    spec = ArxSpec(response=name, ar_order=len(rho))
    truth = ArxFit.from_params(spec, [intercept], rho, sigma)
    return Frame.of(argauss.simulate(truth, None, n, seed, start_year=1))


def test_spec_validation_and_label():
    with pytest.raises(ValueError):
        ArxSpec(response="y", ar_order=7)
    with pytest.raises(ValueError):
        ArxSpec(response="y", regressors=(("x", -1),))
    with pytest.raises(ValueError):
        ArxSpec(response="y", regressors=(("x", 1), ("x", 1)))
    spec = ArxSpec(response="hsi", regressors=(("kola", 1), ("length", 0)),
                   include_linear_trend=True, ar_order=2)
    assert spec.label == "hsi ~ 1 + trend + kola[-1] + length | AR(2)"
    assert spec.param_names == ["intercept", "trend", "kola[-1]", "length", "rho1", "rho2", "sigma"]
    assert spec.n_params == 7
    assert ArxSpec.from_dict(spec.to_dict()) == spec


def test_nesting_and_union():
    small = ArxSpec(response="y", regressors=(("x", 1),), ar_order=1)
    wide = ArxSpec(response="y", regressors=(("x", 1), ("w", 0)), include_linear_trend=True, ar_order=2)
    assert small.is_nested_in(wide)
    assert not wide.is_nested_in(small)
    union = argauss.union_spec([small, ArxSpec(response="y", regressors=(("w", 0),), ar_order=2)])
    assert set(union.regressors) == {("x", 1), ("w", 0)}
    assert union.ar_order == 2


@pytest.mark.parametrize("rho,expected", [
    ([0.5], True),
    ([1.0], False),
    ([0.26, -0.54], True),
    ([], True),
    ([1.2, -0.1], False),
])
def test_is_stationary(rho, expected):
    assert argauss.is_stationary(rho) is expected


def test_fit_recovers_ar1():
    frame = _ar_frame([0.5], 5000, seed=3)
    fit = argauss.fit(ArxSpec(response="y", ar_order=1), frame)
    assert abs(fit.rho[0] - 0.5) < 0.05
    assert abs(fit.sigma - 1.0) < 0.05
    assert np.all(fit.std_errors > 0)


def test_fit_error_shrinks_with_n():
    spec = ArxSpec(response="y", ar_order=1)
    small = [abs(argauss.fit(spec, _ar_frame([0.6], 500, seed=s), with_vcov=False).rho[0] - 0.6)
             for s in range(10)]
    large = [abs(argauss.fit(spec, _ar_frame([0.6], 5000, seed=s), with_vcov=False).rho[0] - 0.6)
             for s in range(10)]
    assert np.mean(large) < np.mean(small)


def test_intercept_only_is_sample_mean():
    rng = np.random.default_rng(5)
    z = 4.0 + rng.standard_normal(50)
    fit = argauss.fit(ArxSpec(response="y"), Frame.from_arrays(1900, y=z))
    assert fit.rho.size == 0
    assert fit.beta[0] == pytest.approx(z.mean(), abs=1e-8)
    assert fit.sigma == pytest.approx(np.sqrt(np.mean((z - z.mean()) ** 2)), rel=1e-10)


def test_fit_matches_grid_search_on_short_series():
    z = np.array([0.3, -0.5, 1.2, 0.8, -0.1, 0.4, 1.0, -0.7])
    spec = ArxSpec(response="y", ar_order=1)
    fit = argauss.fit(spec, Frame.from_arrays(2000, y=z), with_vcov=False)

    best = -np.inf
    y, ylag = z[1:], z[:-1]
    for rho in np.arange(-0.999, 0.999, 1e-3):
        target = y - rho * ylag
        b0 = target.mean() / (1 - rho)
        resid = target - b0 * (1 - rho)
        s2 = np.mean(resid ** 2)
        best = max(best, -0.5 * y.size * (np.log(2 * np.pi * s2) + 1))
    assert fit.loglik_max >= best - 1e-9
    assert fit.loglik_max == pytest.approx(best, abs=1e-3)


def test_loglik_at_fit_and_perturbations():
    frame = _ar_frame([0.4, 0.2], 300, seed=8, intercept=2.0)
    spec = ArxSpec(response="y", ar_order=2)
    fit = argauss.fit(spec, frame)
    assert argauss.loglik(fit.theta, spec, frame) == fit.loglik_max
    for i in range(spec.n_params):
        for step in (-1e-3, 1e-3):
            theta = fit.theta.copy()
            theta[i] += step
            assert argauss.loglik(theta, spec, frame) < fit.loglik_max


def test_loglik_standard_normal_zeros():
    spec = ArxSpec(response="y")
    frame = Frame.from_arrays(2000, y=np.zeros(5))
    assert argauss.loglik([0.0, 1.0], spec, frame) == pytest.approx(-2.5 * np.log(2 * np.pi), abs=1e-12)
    with pytest.raises(ValueError):
        argauss.loglik([0.0, 0.0], spec, frame)


def test_fit_needs_enough_rows():
    with pytest.raises(InsufficientDataError):
        argauss.fit(ArxSpec(response="y", ar_order=2), Frame.from_arrays(2000, y=[1.0, 2.0, 0.5, 1.5]))


def test_fit_rejects_collinear_design():
    x = np.arange(20, dtype=float)
    rng = np.random.default_rng(1)
    frame = Frame.from_arrays(2000, y=rng.standard_normal(20), x=x, x2=2 * x)
    spec = ArxSpec(response="y", regressors=(("x", 0), ("x2", 0)))
    with pytest.raises(SingularDesignError):
        argauss.fit(spec, frame)


def test_simulate_degenerate_noise_and_determinism():
    spec = ArxSpec(response="y")
    flat = argauss.simulate(ArxFit.from_params(spec, [3.0], [], 1e-12), None, 20, seed=1)
    np.testing.assert_allclose(flat.values, 3.0, atol=1e-9)

    ar = ArxFit.from_params(ArxSpec(response="y", ar_order=1), [0.0], [0.5], 1.0)
    a = argauss.simulate(ar, None, 50, seed=9)
    b = argauss.simulate(ar, None, 50, seed=9)
    np.testing.assert_array_equal(a.values, b.values)


def test_simulate_rejects_non_stationary():
    ar = ArxFit.from_params(ArxSpec(response="y", ar_order=1), [0.0], [1.0], 1.0)
    with pytest.raises(NonStationaryError):
        argauss.simulate(ar, None, 10, seed=0)


def test_forecast_white_noise_with_trend():
    spec = ArxSpec(response="y", include_linear_trend=True)
    fit = ArxFit.from_params(spec, [1.0, 0.1], [], 2.0)
    frame = Frame.from_arrays(2000, y=[1.0, 2.0, 3.0])
    points = argauss.forecast(fit, frame, 3)
    for j, p in enumerate(points, start=1):
        assert p.mean == pytest.approx(1.0 + 0.1 * (2002 + j - 1980))
        assert p.sd == pytest.approx(2.0)


def test_forecast_ar1_two_step_sd():
    fit = ArxFit.from_params(ArxSpec(response="y", ar_order=1), [0.0], [0.6], 1.5)
    frame = Frame.from_arrays(2000, y=[0.2, -0.4, 1.0])
    points = argauss.forecast(fit, frame, 2)
    assert points[0].mean == pytest.approx(0.6)
    assert points[1].mean == pytest.approx(0.36)
    assert points[1].sd == pytest.approx(1.5 * np.sqrt(1 + 0.36), abs=1e-10)
    cov = argauss.forecast_error_cov([0.6], 1.5, 2)
    np.testing.assert_allclose(np.sqrt(np.diag(cov)), [p.sd for p in points], atol=1e-12)


def test_forecast_covariates_hold_last_value_and_future():
    spec = ArxSpec(response="y", regressors=(("x", 0),))
    fit = ArxFit.from_params(spec, [1.0, 2.0], [], 1.0)
    frame = Frame.from_arrays(2000, y=[3.0, 5.0, 7.0], x=[1.0, 2.0, 3.0])
    held = argauss.forecast(fit, frame, 2)
    assert [p.mean for p in held] == pytest.approx([7.0, 7.0])
    future = Frame.from_arrays(2003, x=[5.0, 5.0])
    explicit = argauss.forecast(fit, frame, 2, future=future)
    assert [p.mean for p in explicit] == pytest.approx([11.0, 11.0])


def test_residuals_white_noise_definition():
    z = np.array([1.0, 3.0, 2.0, 6.0, 4.0, 5.0, 2.5, 3.5])
    fit = argauss.fit(ArxSpec(response="y"), Frame.from_arrays(2000, y=z))
    resid = argauss.residuals(fit, Frame.from_arrays(2000, y=z))
    np.testing.assert_allclose(resid.values, (z - fit.beta[0]) / fit.sigma, rtol=1e-10)


def test_residuals_are_white_under_correct_model():
    frame = _ar_frame([0.5, -0.3], 5000, seed=21, intercept=1.0)
    fit = argauss.fit(ArxSpec(response="y", ar_order=2), frame, with_vcov=False)
    _, r = argauss.residuals(fit, frame).observed()
    assert abs(r.mean()) < 3 / np.sqrt(r.size)
    lag1 = np.corrcoef(r[1:], r[:-1])[0, 1]
    assert abs(lag1) < 0.05


def test_fit_dict_round_trip():
    frame = _ar_frame([0.3], 120, seed=2, intercept=5.0)
    fit = argauss.fit(ArxSpec(response="y", ar_order=1), frame)
    back = ArxFit.from_dict(fit.to_dict())
    np.testing.assert_allclose(back.theta, fit.theta)
    np.testing.assert_allclose(back.vcov, fit.vcov)
    assert back.spec == fit.spec
    assert [row["name"] for row in fit.summary()] == ["intercept", "rho1", "sigma"]


def test_fit_counts_rows_after_lag_alignment():
    # six complete rows, but only three have their predecessor
    frame = Frame.from_arrays(2000, y=[1.0, 2.0, np.nan, 3.0, 4.0, np.nan, 5.0, 6.0])
    with pytest.raises(InsufficientDataError, match="after lag alignment"):
        argauss.fit(ArxSpec(response="y", ar_order=1), frame)


def test_one_step_forecast_matches_monitor_prediction():
    from inference.monitor import one_step_predictions

    frame = _ar_frame([0.5], 60, seed=14, intercept=2.0)
    spec = ArxSpec(response="y", ar_order=1)
    pred = one_step_predictions(spec, frame, start_year=50, warm_start=False)
    i = list(pred.years).index(55)
    fit = argauss.fit(spec, frame.truncate(54))
    point = argauss.forecast(fit, frame, 1, origin=54)[0]
    assert point.mean == pytest.approx(pred.predicted[i], rel=1e-12)
    assert point.sd == pytest.approx(pred.pred_sd[i], rel=1e-12)


def test_simulated_autocorrelation_is_recovered():
    frame = _ar_frame([0.6], 5000, seed=25, intercept=1.0)
    z = frame["y"].values
    acf1 = np.corrcoef(z[1:], z[:-1])[0, 1]
    assert acf1 == pytest.approx(0.6, abs=0.03)
    fit = argauss.fit(ArxSpec(response="y", ar_order=1), frame, with_vcov=False)
    assert fit.rho[0] == pytest.approx(acf1, abs=0.01)
