"""
Tests for time-varying autoregressive processes
"""
import os
import sys

import numpy as np
import pytest
from scipy import stats

# Add the project root to the path so modules can be imported properly
project_root = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
sys.path.insert(0, project_root)

from tsmodel import argauss, tvar  # noqa: E402
from tsmodel.argauss import ArxFit, ArxSpec  # noqa: E402
from tsmodel.errors import InsufficientDataError, NonStationaryError  # noqa: E402
from tsmodel.frame import Frame, Series  # noqa: E402
from tsmodel.tvar import TvarSpec  # noqa: E402


def test_spec_validation():
    with pytest.raises(ValueError):
        TvarSpec(order=0, alpha_fns=(), sigma_fn=lambda u: 1.0)
    with pytest.raises(ValueError):
        TvarSpec(order=2, alpha_fns=(lambda u: 0.1,), sigma_fn=lambda u: 1.0)
    with pytest.raises(ValueError):
        TvarSpec(order=1, alpha_fns=(lambda u: 0.1,), sigma_fn=lambda u: u - 0.5)
    with pytest.raises(NonStationaryError):
        TvarSpec(order=1, alpha_fns=(lambda u: -1.2 * u,), sigma_fn=lambda u: 1.0)


def test_constant_spec_uses_opposite_sign():
    spec = TvarSpec.constant([0.5, 0.2], 2.0)
    np.testing.assert_allclose(spec.alpha(0.3), [-0.5, -0.2])
    assert spec.sigma(0.9) == 2.0


def test_simulation_is_deterministic():
    spec = TvarSpec.constant([0.5], 1.0)
    a = tvar.simulate_tvar(spec, 200, seed=4)
    b = tvar.simulate_tvar(spec, 200, seed=4)
    np.testing.assert_array_equal(a.values, b.values)
    assert a.length == 200
    with pytest.raises(ValueError):
        tvar.simulate_tvar(spec, 5, seed=4)


def test_local_fit_follows_growing_scale():
    spec = TvarSpec(order=1, alpha_fns=(lambda u: -0.5,), sigma_fn=lambda u: 1.0 + u)
    s = tvar.simulate_tvar(spec, 2000, seed=11)
    fit = tvar.fit_tvar_local(s, 1, bandwidth=0.05)
    first = fit.sigma[fit.u <= 0.1 + 1e-12].mean()
    last = fit.sigma[fit.u >= 0.9].mean()
    # the scale is 1.05 on the first tenth and 1.95 on the last
    assert last / first == pytest.approx(1.95 / 1.05, rel=0.15)
    assert np.median(fit.alpha[:, 0]) == pytest.approx(-0.5, abs=0.1)


def test_local_fit_sees_scale_step():
    spec = TvarSpec(order=1, alpha_fns=(lambda u: -0.3,), sigma_fn=lambda u: 2.0 if u < 0.6 else 1.0)
    s = tvar.simulate_tvar(spec, 1000, seed=6)
    fit = tvar.fit_tvar_local(s, 1, bandwidth=0.05)
    early = fit.sigma[(fit.u > 0.2) & (fit.u < 0.4)]
    late = fit.sigma[fit.u > 0.8]
    assert np.all(early > 1.5)
    assert np.all(late < 1.4)
    after = fit.u > 0.4
    crossing = fit.u[after][np.argmax(fit.sigma[after] < 1.5)]
    assert crossing == pytest.approx(0.6, abs=0.08)


def test_local_fit_window_and_order_checks():
    s = Series("y", 1, np.random.default_rng(0).standard_normal(50))
    with pytest.raises(InsufficientDataError):
        tvar.fit_tvar_local(s, 2, bandwidth=0.1)
    with pytest.raises(ValueError):
        tvar.fit_tvar_local(s, 0)
    with pytest.raises(ValueError):
        tvar.fit_tvar_local(s, 1, bandwidth=1.5)


def test_local_fit_rows_and_header():
    s = tvar.simulate_tvar(TvarSpec.constant([0.4, -0.2], 1.0), 200, seed=2, start_year=1801)
    fit = tvar.fit_tvar_local(s, 2, bandwidth=0.2)
    assert fit.header() == ["year", "alpha_1", "alpha_2", "sigma", "se_alpha_1", "se_alpha_2", "se_sigma"]
    rows = fit.to_rows()
    assert len(rows) == 198
    assert rows[0][0] == 1803
    assert all(len(row) == len(fit.header()) for row in rows)
    assert np.all(fit.alpha_se > 0) and np.all(fit.sigma_se > 0)
    assert fit.summary()["order"] == 2


def _lag1_acf(z):
    z = z - z.mean()
    return float(z[1:] @ z[:-1] / (z @ z))


def test_constant_process_matches_ordinary_ar():
    spec = TvarSpec.constant([0.5], 1.0)
    truth = ArxFit.from_params(ArxSpec(response="y", ar_order=1), [0.0], [0.5], 1.0)
    tv = [_lag1_acf(tvar.simulate_tvar(spec, 200, seed=seed).values) for seed in range(100)]
    ar = [_lag1_acf(argauss.simulate(truth, None, 200, seed=5000 + seed).values) for seed in range(100)]
    assert stats.ks_2samp(tv, ar).pvalue > 0.01


def test_constant_process_gives_flat_curves():
    s = tvar.simulate_tvar(TvarSpec.constant([0.5, -0.3], 1.0), 1000, seed=15)
    local = tvar.fit_tvar_local(s, 2, bandwidth=0.15)
    fit = argauss.fit(ArxSpec(response="tvar", ar_order=2), Frame.of(s))
    for j in range(2):
        deviation = np.abs(local.alpha[:, j] + fit.rho[j])
        assert np.mean(deviation < 3 * local.alpha_se[:, j]) >= 0.9


def test_year_averaged_estimates_agree_with_global_fit():
    s = tvar.simulate_tvar(TvarSpec.constant([0.5], 1.0), 500, seed=16)
    local = tvar.fit_tvar_local(s, 1, bandwidth=0.15)
    fit = argauss.fit(ArxSpec(response="tvar", ar_order=1), Frame.of(s))
    rho_se, sigma_se = fit.std_errors[1], fit.std_errors[2]
    assert abs(local.alpha[:, 0].mean() + fit.rho[0]) <= 2 * rho_se
    assert abs(local.sigma.mean() - fit.sigma) <= 2 * sigma_se
    assert np.all(local.sigma > 0)


def test_local_fit_ignores_year_labels():
    spec = TvarSpec.constant([0.4], 1.0)
    early = tvar.fit_tvar_local(tvar.simulate_tvar(spec, 300, seed=3, start_year=1), 1)
    late = tvar.fit_tvar_local(tvar.simulate_tvar(spec, 300, seed=3, start_year=1901), 1)
    np.testing.assert_array_equal(late.alpha, early.alpha)
    np.testing.assert_array_equal(late.sigma, early.sigma)
    assert late.years[0] - early.years[0] == 1900


def test_local_error_shrinks_with_length():
    spec = TvarSpec(order=2, alpha_fns=(lambda u: -0.6 + 0.4 * u, lambda u: 0.2), sigma_fn=lambda u: 1.0)
    mse = []
    for n in (500, 5000):
        local = tvar.fit_tvar_local(tvar.simulate_tvar(spec, n, seed=23), 2, bandwidth=0.15)
        truth = -0.6 + 0.4 * local.u
        mse.append(np.mean((local.alpha[:, 0] - truth) ** 2))
    assert mse[1] < mse[0]
