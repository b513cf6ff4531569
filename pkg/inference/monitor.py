"""
Dynamic goodness-of-fit and structural-change diagnostics: prediction
monitoring, the likelihood monitoring bridge, break location, rolling
variability and the augmented Dickey-Fuller unit-root test.
"""
import logging
from dataclasses import dataclass
from typing import Dict, List, NamedTuple, Optional, Tuple

import numpy as np
import statsmodels.api as sm
from scipy import special, stats

from tsmodel import argauss
from tsmodel.argauss import ArxSpec
from tsmodel.errors import BridgeFitError, DegenerateError, HjorticError, InsufficientDataError
from tsmodel.frame import Frame, Series, longest_unmasked_block

BRIDGE_BAND_95 = 1.358
MIN_EXTRA_OBS = 5
DEFAULT_BANDWIDTH = 10.0
ADF_MIN_LENGTH = 20

# Intercept-only Dickey-Fuller asymptotic critical values
ADF_CRITICAL_VALUES = {"1%": -3.43, "5%": -2.86, "10%": -2.57}


def first_monitor_year(spec: ArxSpec, frame: Frame) -> int:
    """First year t with at least p + 5 complete observations before t."""
    complete = frame.complete_rows(spec.columns)
    counts = np.cumsum(complete)
    need = spec.n_params + MIN_EXTRA_OBS
    hits = np.flatnonzero(counts >= need)
    if hits.size == 0 or hits[0] + 1 >= frame.length:
        raise InsufficientDataError(
            f"'{spec.label}' needs {need} observations before the first monitored year")
    return int(frame.years[hits[0] + 1])


@dataclass
class OneStepPredictions:
    """Sequential one-step predictions; NaN where the response is masked or a refit failed."""
    years: np.ndarray
    observed: np.ndarray
    predicted: np.ndarray
    pred_sd: np.ndarray

    @property
    def standardized_errors(self) -> np.ndarray:
        return (self.observed - self.predicted) / self.pred_sd

    @property
    def available(self) -> np.ndarray:
        return np.isfinite(self.observed) & np.isfinite(self.predicted)


def one_step_predictions(spec: ArxSpec, frame: Frame, start_year: int,
                         warm_start: bool = True) -> OneStepPredictions:
    """
    Refit on data before each year t and predict z_t one step ahead.

    Args:
        spec: Model specification
        frame: Data
        start_year: First predicted year (moved forward to the minimum fit index if needed)
        warm_start: Start each refit from the previous year's AR estimates

    Returns:
        OneStepPredictions over start_year..frame end
    """
    first = first_monitor_year(spec, frame)
    if start_year < first:
        logging.warning(f"start_year {start_year} moved to {first} (needs p + {MIN_EXTRA_OBS} observations)")
        start_year = first
    if start_year > frame.end_year:
        raise InsufficientDataError(f"start_year {start_year} is after the last year {frame.end_year}")

    years = np.arange(start_year, frame.end_year + 1)
    observed = np.array([frame[spec.response].value_at(t) for t in years])
    predicted = np.full(years.size, np.nan)
    pred_sd = np.full(years.size, np.nan)
    rho = None
    for i, t in enumerate(years):
        if not np.isfinite(observed[i]):
            continue
        try:
            f = argauss.fit(spec, frame.truncate(t - 1), initial_rho=rho if warm_start else None,
                            with_vcov=False)
            point = argauss.forecast(f, frame, 1, origin=int(t - 1))[0]
        except HjorticError as e:
            logging.warning(f"One-step prediction for {t} skipped: {e}")
            continue
        rho = f.rho
        predicted[i], pred_sd[i] = point.mean, point.sd
        logging.debug(f"Year {t}: observed {observed[i]:.4g}, predicted {point.mean:.4g} (sd {point.sd:.4g})")
    return OneStepPredictions(years=years, observed=observed, predicted=predicted, pred_sd=pred_sd)


def monitoring_values(d: np.ndarray) -> np.ndarray:
    """m = chi-squared(1) CDF of d^2."""
    return stats.chi2.cdf(np.square(d), df=1)


def prediction_monitor(spec: ArxSpec, frame: Frame, start_year: int, warm_start: bool = True) -> Series:
    """Prediction monitoring values m_t in [0, 1]; masked where no prediction was possible."""
    pred = one_step_predictions(spec, frame, start_year, warm_start=warm_start)
    m = monitoring_values(pred.standardized_errors)
    m[~pred.available] = np.nan
    logging.info(f"Prediction monitor for '{spec.label}': {int(pred.available.sum())} years from {pred.years[0]}")
    return Series(f"{spec.response}_m", int(pred.years[0]), m)


def _naive_prediction(z: Series, year: int, window: int) -> float:
    """Mean of the observed values among the previous `window` years."""
    past = np.array([z.value_at(year - i) for i in range(1, window + 1)])
    past = past[np.isfinite(past)]
    return float(past.mean()) if past.size else float("nan")


def mean_abs_error_compare(spec: ArxSpec, frame: Frame, start_year: int, naive_window: int,
                           warm_start: bool = True) -> Tuple[float, float]:
    """
    Mean absolute one-step error of the model against the naive
    mean-of-previous-w-years predictor, over years where both exist.
    """
    if naive_window < 1:
        raise ValueError(f"naive_window must be >= 1, got {naive_window}")
    pred = one_step_predictions(spec, frame, start_year, warm_start=warm_start)
    z = frame[spec.response]
    naive = np.array([_naive_prediction(z, int(t), naive_window) for t in pred.years])
    both = pred.available & np.isfinite(naive)
    if not np.any(both):
        raise InsufficientDataError("No year has both a model and a naive prediction")
    model_mae = float(np.mean(np.abs(pred.observed[both] - pred.predicted[both])))
    naive_mae = float(np.mean(np.abs(pred.observed[both] - naive[both])))
    logging.info(f"MAE over {int(both.sum())} years: model {model_mae:.4g}, naive(w={naive_window}) {naive_mae:.4g}")
    return model_mae, naive_mae


@dataclass
class BridgePath:
    """Monitoring bridge B_{n,j} = sqrt(n) (l_j / n - (j / n) a_hat) / kappa_hat."""
    years: np.ndarray
    values: np.ndarray
    loglik_path: np.ndarray
    a_hat: float
    kappa_hat: float
    n: int
    band_95: float = BRIDGE_BAND_95
    centred: bool = True

    def to_rows(self) -> List[Tuple[int, float]]:
        return [(int(y), float(v)) for y, v in zip(self.years, self.values)]

    def to_summary(self) -> Dict:
        scan = break_scan(self, self.band_95)
        return {
            "band": self.band_95,
            "max_abs": scan.max_abs,
            "argmax_year": scan.year_at_max,
            "exceeded": scan.exceeded,
            "a_hat": self.a_hat,
            "kappa_hat": self.kappa_hat,
            "n": self.n,
            "centred": self.centred,
        }


def null_excess(m: int, q: int) -> float:
    """
    Expected excess of the maximised over the true log-likelihood for a
    Gaussian regression with q mean coefficients and a free scale on m rows.

    Equals -(m/2) (psi((m - q)/2) + log(2/m)), which tends to (q + 1)/2.
    """
    if m <= q:
        raise InsufficientDataError(f"Centring needs more than {q} rows, got {m}")
    return float(-0.5 * m * (special.digamma(0.5 * (m - q)) + np.log(2.0 / m)))


def bridge(spec: ArxSpec, frame: Frame, warm_start: bool = True, centre: bool = True) -> BridgePath:
    """
    Likelihood monitoring bridge.

    a_hat and kappa_hat come from the full-data fit; kappa_hat is the
    standard deviation of the per-year log-likelihood contributions, i.e.
    n^(-1/2) times the standard deviation of the total log-likelihood.

    With centre=True every maximum l_max,j is reduced by null_excess(j, q),
    q being the mean plus AR coefficient count, before the bridge is formed.

    Args:
        spec: Model specification
        frame: Data
        warm_start: Start each refit from the previous one's AR estimates
        centre: Subtract the small-sample overfit excess from each maximum

    Returns:
        BridgePath over the usable years from index p + 5 to n; the last value is 0
    """
    full = argauss.fit(spec, frame, with_vcov=False)
    years_used, contrib = argauss.loglik_contributions(full.theta, spec, frame)
    n = years_used.size
    p = spec.n_params
    if n <= p:
        raise InsufficientDataError(f"Bridge needs more than {p} usable years, got {n}")
    kappa_hat = float(np.std(contrib))
    if not kappa_hat > 0:
        raise DegenerateError("Log-likelihood contributions have zero spread")

    j0 = min(p + MIN_EXTRA_OBS, n)
    js = np.arange(j0, n + 1)
    path = np.empty(js.size)
    rho = None
    for i, j in enumerate(js):
        year = int(years_used[j - 1])
        if j == n:
            path[i] = full.loglik_max
            continue
        try:
            f = argauss.fit(spec, frame.truncate(year), initial_rho=rho if warm_start else None,
                            with_vcov=False, require_stationary=False)
        except HjorticError as e:
            raise BridgeFitError(year, e) from e
        rho = f.rho
        path[i] = f.loglik_max
        logging.debug(f"Bridge refit through {year}: loglik={f.loglik_max:.4f}")

    q = spec.n_beta + spec.ar_order
    excess = np.array([null_excess(int(j), q) for j in js]) if centre else np.zeros(js.size)
    centred = path - excess
    a_hat = centred[-1] / n
    values = np.sqrt(n) * (centred / n - (js / n) * a_hat) / kappa_hat
    values[-1] = 0.0
    result = BridgePath(years=years_used[js - 1], values=values, loglik_path=path,
                        a_hat=float(a_hat), kappa_hat=kappa_hat, n=int(n), centred=centre)
    logging.info(f"Bridge for '{spec.label}': n={n}, max|B|={np.max(np.abs(values)):.3f}")
    return result


class BreakScan(NamedTuple):
    exceeded: bool
    year_at_max: int
    max_abs: float


def break_scan(path: BridgePath, level_band: float = BRIDGE_BAND_95) -> BreakScan:
    """Where |B| peaks and whether it leaves the band (earliest year on ties)."""
    if path.values.size == 0:
        raise ValueError("Empty bridge path")
    abs_values = np.abs(path.values)
    i = int(np.argmax(abs_values))
    max_abs = float(abs_values[i])
    return BreakScan(exceeded=bool(max_abs > level_band), year_at_max=int(path.years[i]), max_abs=max_abs)


def rolling_sd(s: Series, bandwidth: float = DEFAULT_BANDWIDTH) -> Series:
    """
    Gaussian-kernel local standard deviation at every year of s.

    The kernel sd is the bandwidth in years; weights are renormalized over
    observed years, so edges use one-sided weights.
    """
    if bandwidth < 3:
        raise ValueError(f"bandwidth must be >= 3 years, got {bandwidth}")
    obs_years, obs_values = s.observed()
    if obs_values.size < 3:
        raise InsufficientDataError(f"Series '{s.name}' has too few observed values for a rolling sd")
    out = np.empty(s.length)
    for i, year in enumerate(s.years):
        w = stats.norm.pdf((obs_years - year) / bandwidth)
        w /= w.sum()
        mean = w @ obs_values
        denom = 1.0 - w @ w
        var = w @ (obs_values - mean) ** 2 / denom if denom > 0 else 0.0
        out[i] = np.sqrt(max(var, 0.0))
    return Series(f"{s.name}_sd", s.start_year, out)


@dataclass
class AdfResult:
    statistic: float
    p_interval: str
    reject_unit_root_at_1pct: bool
    lag: int
    nobs: int
    critical_values: Dict[str, float]

    def to_dict(self) -> Dict:
        return {
            "statistic": self.statistic,
            "p_interval": self.p_interval,
            "reject_unit_root_at_1pct": self.reject_unit_root_at_1pct,
            "lag": self.lag,
            "nobs": self.nobs,
            "critical_values": dict(self.critical_values),
        }


def _adf_design(x: np.ndarray, lags: int, first: int) -> Tuple[np.ndarray, np.ndarray]:
    """Regression of dx_t on [1, x_{t-1}, dx_{t-1..t-lags}] for dx indices t >= first."""
    dx = np.diff(x)
    rows = np.arange(first, dx.size)
    cols = [np.ones(rows.size), x[rows]]
    cols.extend(dx[rows - i] for i in range(1, lags + 1))
    return dx[rows], np.column_stack(cols)


def adf_p_interval(statistic: float) -> str:
    if statistic < ADF_CRITICAL_VALUES["1%"]:
        return "p < 0.01"
    if statistic < ADF_CRITICAL_VALUES["5%"]:
        return "0.01 < p < 0.05"
    if statistic < ADF_CRITICAL_VALUES["10%"]:
        return "0.05 < p < 0.10"
    return "p > 0.10"


def adf_test(s: Series, max_lag: Optional[int] = None) -> AdfResult:
    """
    Augmented Dickey-Fuller test with intercept.

    Uses the longest unmasked block of s. The lag order up to max_lag is
    chosen by AIC on a common sample, then the chosen regression is refitted
    on its maximal sample.
    """
    block = longest_unmasked_block(s)
    if block.length < ADF_MIN_LENGTH:
        raise InsufficientDataError(
            f"ADF needs {ADF_MIN_LENGTH} consecutive observed values, longest block has {block.length}")
    if block.length < s.observed_count:
        logging.warning(f"ADF on '{s.name}' uses the longest unmasked block "
                        f"{block.start_year}-{block.end_year}")
    x = block.values
    if max_lag is None:
        max_lag = int(12 * (x.size / 100.0) ** 0.25)
    max_lag = max(0, min(max_lag, (x.size - 1) // 2 - 2))

    aics = []
    for lags in range(max_lag + 1):
        dy, X = _adf_design(x, lags, max_lag)
        aics.append(sm.OLS(dy, X).fit().aic)
    lag = int(np.argmin(aics))

    dy, X = _adf_design(x, lag, lag)
    res = sm.OLS(dy, X).fit()
    statistic = float(res.tvalues[1])
    result = AdfResult(statistic=statistic, p_interval=adf_p_interval(statistic),
                       reject_unit_root_at_1pct=bool(statistic < ADF_CRITICAL_VALUES["1%"]),
                       lag=lag, nobs=int(dy.size), critical_values=dict(ADF_CRITICAL_VALUES))
    logging.info(f"ADF on '{s.name}': statistic {statistic:.3f} (lag {lag}), {result.p_interval}")
    return result
