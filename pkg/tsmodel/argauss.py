"""
Gaussian autoregressive regression engine.

Model: z_t = x_t' beta + e_t with e_t = rho_1 e_{t-1} + ... + rho_k e_{t-k} + sigma eps_t,
fitted by conditional maximum likelihood (conditioning on the first k residuals).
Parameter vector layout is theta = [beta..., rho_1..rho_k, sigma].
"""
import logging
from dataclasses import dataclass, field, replace
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from scipy import optimize, signal, stats
from statsmodels.regression.linear_model import yule_walker

from .errors import (
    ConvergenceError,
    DataFormatError,
    InsufficientDataError,
    NonStationaryError,
    SingularDesignError,
)
from .frame import Frame, Series, lag

MAX_AR_ORDER = 6
TREND_ORIGIN = 1980
STATIONARITY_MARGIN = 1e-10
SIGMA_FLOOR = 1e-12
HESSIAN_REL_STEP = 1e-5
MIN_EXTRA_ROWS = 2


@dataclass(frozen=True)
class ArxSpec:
    """
    Specification of an AR-with-covariates model.

    Regressors are (series name, lag) pairs; the trend regressor is
    calendar year minus TREND_ORIGIN.
    """
    response: str
    regressors: Tuple[Tuple[str, int], ...] = ()
    include_intercept: bool = True
    include_linear_trend: bool = False
    ar_order: int = 0

    def __post_init__(self):
        regs = tuple((str(name), int(k)) for name, k in self.regressors)
        object.__setattr__(self, "regressors", regs)
        if not 0 <= self.ar_order <= MAX_AR_ORDER:
            raise ValueError(f"ar_order must be in 0..{MAX_AR_ORDER}, got {self.ar_order}")
        for name, k in regs:
            if k < 0:
                raise ValueError(f"Regressor '{name}' has negative lag {k}")
        if len(set(regs)) != len(regs):
            raise ValueError(f"Duplicate regressors in {regs}")

    @property
    def beta_names(self) -> List[str]:
        names = []
        if self.include_intercept:
            names.append("intercept")
        if self.include_linear_trend:
            names.append("trend")
        names.extend(f"{name}[-{k}]" if k else name for name, k in self.regressors)
        return names

    @property
    def n_beta(self) -> int:
        return len(self.beta_names)

    @property
    def n_params(self) -> int:
        return self.n_beta + self.ar_order + 1

    @property
    def param_names(self) -> List[str]:
        return self.beta_names + [f"rho{i}" for i in range(1, self.ar_order + 1)] + ["sigma"]

    @property
    def columns(self) -> List[str]:
        """Series names the spec reads from a frame."""
        names = [self.response]
        for name, _ in self.regressors:
            if name not in names:
                names.append(name)
        return names

    @property
    def label(self) -> str:
        parts = []
        if self.include_intercept:
            parts.append("1")
        if self.include_linear_trend:
            parts.append("trend")
        parts.extend(self.beta_names[len(parts):])
        rhs = " + ".join(parts) if parts else "0"
        return f"{self.response} ~ {rhs} | AR({self.ar_order})"

    def is_nested_in(self, wide: "ArxSpec") -> bool:
        return (self.response == wide.response
                and set(self.regressors) <= set(wide.regressors)
                and self.ar_order <= wide.ar_order
                and (not self.include_intercept or wide.include_intercept)
                and (not self.include_linear_trend or wide.include_linear_trend))

    def to_dict(self) -> Dict:
        return {
            "response": self.response,
            "regressors": [[name, k] for name, k in self.regressors],
            "include_intercept": self.include_intercept,
            "include_linear_trend": self.include_linear_trend,
            "ar_order": self.ar_order,
        }

    @classmethod
    def from_dict(cls, data: Dict) -> "ArxSpec":
        return cls(
            response=data["response"],
            regressors=tuple((name, int(k)) for name, k in data.get("regressors", [])),
            include_intercept=bool(data.get("include_intercept", True)),
            include_linear_trend=bool(data.get("include_linear_trend", False)),
            ar_order=int(data.get("ar_order", 0)),
        )


def union_spec(specs: Sequence[ArxSpec]) -> ArxSpec:
    """Smallest spec containing every given spec (common-sample reference)."""
    if not specs:
        raise ValueError("union_spec needs at least one spec")
    responses = {s.response for s in specs}
    if len(responses) != 1:
        raise ValueError(f"Specs disagree on the response: {sorted(responses)}")
    regressors: List[Tuple[str, int]] = []
    for s in specs:
        for reg in s.regressors:
            if reg not in regressors:
                regressors.append(reg)
    return ArxSpec(
        response=specs[0].response,
        regressors=tuple(regressors),
        include_intercept=any(s.include_intercept for s in specs),
        include_linear_trend=any(s.include_linear_trend for s in specs),
        ar_order=max(s.ar_order for s in specs),
    )


@dataclass(frozen=True, eq=False)
class ArxFit:
    """Fitted ArxSpec: point estimates, observed-information covariance and fit statistics."""
    spec: ArxSpec
    beta: np.ndarray
    rho: np.ndarray
    sigma: float
    loglik_max: float
    vcov: np.ndarray
    n_effective: int
    sample_spec: Optional[ArxSpec] = None
    first_year: Optional[int] = None
    last_year: Optional[int] = None
    r_squared: float = float("nan")
    r_squared_adj: float = float("nan")

    def __post_init__(self):
        beta = np.array(self.beta, dtype=float).reshape(-1)
        rho = np.array(self.rho, dtype=float).reshape(-1)
        if beta.size != self.spec.n_beta or rho.size != self.spec.ar_order:
            raise ValueError(
                f"Parameter sizes ({beta.size}, {rho.size}) do not match spec "
                f"({self.spec.n_beta}, {self.spec.ar_order})")
        if not self.sigma > 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")
        p = self.spec.n_params
        vcov = np.zeros((p, p)) if self.vcov is None else np.array(self.vcov, dtype=float)
        if vcov.shape != (p, p):
            raise ValueError(f"vcov must be {p}x{p}, got {vcov.shape}")
        for arr in (beta, rho, vcov):
            arr.setflags(write=False)
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "sigma", float(self.sigma))
        object.__setattr__(self, "vcov", vcov)

    @classmethod
    def from_params(cls, spec: ArxSpec, beta: Sequence[float], rho: Sequence[float],
                    sigma: float) -> "ArxFit":
        """Fit-shaped container for known parameters (simulation and testing)."""
        return cls(spec=spec, beta=beta, rho=rho, sigma=sigma, loglik_max=float("nan"),
                   vcov=None, n_effective=0)

    @property
    def theta(self) -> np.ndarray:
        return np.concatenate([self.beta, self.rho, [self.sigma]])

    @property
    def n_params(self) -> int:
        return self.spec.n_params

    @property
    def std_errors(self) -> np.ndarray:
        return np.sqrt(np.clip(np.diag(self.vcov), 0.0, None))

    def with_params(self, theta: Sequence[float]) -> "ArxFit":
        """Same fit with a replaced parameter vector (for finite differences)."""
        theta = np.asarray(theta, dtype=float)
        nb, k = self.spec.n_beta, self.spec.ar_order
        return replace(self, beta=theta[:nb], rho=theta[nb:nb + k], sigma=float(theta[nb + k]))

    def summary(self) -> List[Dict]:
        """
        Parameter table.

        Returns:
            One dict per parameter: name, estimate, se, z, p_value (two-sided normal)
        """
        rows = []
        for name, est, se in zip(self.spec.param_names, self.theta, self.std_errors):
            z = est / se if se > 0 else float("nan")
            p = float(2 * stats.norm.sf(abs(z))) if se > 0 else float("nan")
            rows.append({"name": name, "estimate": float(est), "se": float(se), "z": float(z), "p_value": p})
        return rows

    def to_dict(self) -> Dict:
        return {
            "spec": self.spec.to_dict(),
            "sample_spec": self.sample_spec.to_dict() if self.sample_spec else None,
            "param_names": self.spec.param_names,
            "beta": self.beta.tolist(),
            "rho": self.rho.tolist(),
            "sigma": self.sigma,
            "loglik_max": self.loglik_max,
            "vcov": self.vcov.tolist(),
            "n_effective": self.n_effective,
            "first_year": self.first_year,
            "last_year": self.last_year,
            "r_squared": self.r_squared,
            "r_squared_adj": self.r_squared_adj,
        }

    @classmethod
    def from_dict(cls, data: Dict) -> "ArxFit":
        sample = data.get("sample_spec")
        return cls(
            spec=ArxSpec.from_dict(data["spec"]),
            beta=data["beta"],
            rho=data["rho"],
            sigma=float(data["sigma"]),
            loglik_max=float(data["loglik_max"]),
            vcov=np.asarray(data["vcov"], dtype=float),
            n_effective=int(data["n_effective"]),
            sample_spec=ArxSpec.from_dict(sample) if sample else None,
            first_year=data.get("first_year"),
            last_year=data.get("last_year"),
            r_squared=float(data.get("r_squared", float("nan"))),
            r_squared_adj=float(data.get("r_squared_adj", float("nan"))),
        )


class ForecastPoint(NamedTuple):
    mean: float
    sd: float


@dataclass
class _Layout:
    """Response vector and design matrix on the frame's year grid (NaN where unavailable)."""
    years: np.ndarray
    y: np.ndarray
    X: np.ndarray
    base_ok: np.ndarray = field(init=False)

    def __post_init__(self):
        self.base_ok = np.isfinite(self.y) & np.all(np.isfinite(self.X), axis=1)

    def usable(self, k: int) -> np.ndarray:
        """Rows t whose own row and k predecessors are all complete."""
        ok = self.base_ok.copy()
        for i in range(1, k + 1):
            ok[i:] &= self.base_ok[:-i]
        ok[:min(k, ok.size)] = False
        return ok


def _regressor_column(frame: Frame, name: str, k: int) -> np.ndarray:
    s = frame[name]
    if k >= s.length:
        return np.full(s.length, np.nan)
    return lag(s, k).values


def _layout(spec: ArxSpec, frame: Frame) -> _Layout:
    for name in spec.columns:
        if name not in frame:
            raise DataFormatError(f"Frame lacks series required by '{spec.label}'", column=name)
    years = frame.years
    cols = []
    if spec.include_intercept:
        cols.append(np.ones(years.size))
    if spec.include_linear_trend:
        cols.append((years - TREND_ORIGIN).astype(float))
    for name, k in spec.regressors:
        cols.append(_regressor_column(frame, name, k))
    X = np.column_stack(cols) if cols else np.empty((years.size, 0))
    return _Layout(years=years, y=np.array(frame.values(spec.response), dtype=float), X=X)


def _sample_rows(spec: ArxSpec, frame: Frame, sample_spec: Optional[ArxSpec]) -> Tuple[_Layout, np.ndarray]:
    lay = _layout(spec, frame)
    rows = lay.usable(spec.ar_order)
    if sample_spec is not None and sample_spec != spec:
        if sample_spec.response != spec.response:
            raise ValueError("sample_spec must share the response of spec")
        rows &= _layout(sample_spec, frame).usable(sample_spec.ar_order)
    return lay, np.flatnonzero(rows)


def _quasi_difference(lay: _Layout, idx: np.ndarray, rho: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    y = lay.y[idx].copy()
    X = lay.X[idx].copy()
    for i, r in enumerate(rho, start=1):
        y -= r * lay.y[idx - i]
        X -= r * lay.X[idx - i]
    return y, X


def _innovations(theta: np.ndarray, spec: ArxSpec, lay: _Layout, idx: np.ndarray) -> np.ndarray:
    nb, k = spec.n_beta, spec.ar_order
    beta, rho = theta[:nb], theta[nb:nb + k]
    y, X = _quasi_difference(lay, idx, rho)
    return y - X @ beta


def loglik_contributions(theta: Sequence[float], spec: ArxSpec, frame: Frame,
                         sample_spec: Optional[ArxSpec] = None) -> Tuple[np.ndarray, np.ndarray]:
    """
    Per-year conditional log-likelihood terms.

    Returns:
        (years, contributions) over the rows entering the likelihood
    """
    theta = np.asarray(theta, dtype=float)
    if theta.size != spec.n_params:
        raise ValueError(f"Expected {spec.n_params} parameters, got {theta.size}")
    sigma = theta[-1]
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    lay, idx = _sample_rows(spec, frame, sample_spec)
    u = _innovations(theta, spec, lay, idx)
    terms = -0.5 * np.log(2 * np.pi) - np.log(sigma) - 0.5 * (u / sigma) ** 2
    return lay.years[idx], terms


def loglik(theta: Sequence[float], spec: ArxSpec, frame: Frame,
           sample_spec: Optional[ArxSpec] = None) -> float:
    """Conditional Gaussian log-likelihood at theta = [beta, rho, sigma]."""
    _, terms = loglik_contributions(theta, spec, frame, sample_spec)
    return float(np.sum(terms))


def is_stationary(rho: Sequence[float]) -> bool:
    """True iff every root of 1 - rho_1 z - ... - rho_k z^k has modulus > 1 + 1e-10."""
    rho = np.asarray(rho, dtype=float).reshape(-1)
    if rho.size == 0 or not np.any(rho):
        return True
    coeffs = np.concatenate([-rho[::-1], [1.0]])
    roots = np.roots(coeffs)
    return bool(np.all(np.abs(roots) > 1.0 + STATIONARITY_MARGIN))


def _profile(rho: np.ndarray, lay: _Layout, idx: np.ndarray) -> Tuple[float, np.ndarray, float]:
    """Concentrated log-likelihood in rho with closed-form beta and sigma."""
    y, X = _quasi_difference(lay, idx, rho)
    if X.shape[1]:
        beta = np.linalg.lstsq(X, y, rcond=None)[0]
        resid = y - X @ beta
    else:
        beta = np.empty(0)
        resid = y
    n = y.size
    sigma = max(np.sqrt(resid @ resid / n), SIGMA_FLOOR)
    value = -0.5 * n * np.log(2 * np.pi * sigma ** 2) - 0.5 * (resid @ resid) / sigma ** 2
    return float(value), beta, float(sigma)


def _rho_starts(lay: _Layout, idx: np.ndarray, k: int, initial_rho: Optional[Sequence[float]]) -> List[np.ndarray]:
    starts = []
    if initial_rho is not None:
        starts.append(np.asarray(initial_rho, dtype=float).reshape(k))
    _, beta, _ = _profile(np.zeros(k), lay, idx)
    resid = lay.y[idx] - lay.X[idx] @ beta
    if resid.size > k + 1 and np.std(resid) > 0:
        rho_yw, _ = yule_walker(resid, order=k, method="mle")
        starts.append(np.asarray(rho_yw, dtype=float))
    starts.append(np.zeros(k))
    return starts


def _maximize_rho(lay: _Layout, idx: np.ndarray, k: int,
                  initial_rho: Optional[Sequence[float]]) -> np.ndarray:
    def objective(rho):
        return -_profile(rho, lay, idx)[0]

    options = {"xatol": 1e-9, "fatol": 1e-10, "maxiter": 4000 * k, "maxfev": 8000 * k}
    best = None
    for start in _rho_starts(lay, idx, k, initial_rho):
        res = optimize.minimize(objective, start, method="Nelder-Mead", options=options)
        if not res.success:
            res = optimize.minimize(objective, res.x, method="Nelder-Mead", options=options)
        if not res.success:
            logging.debug(f"Nelder-Mead did not converge from start {start}: {res.message}")
            continue
        if best is None or res.fun < best.fun:
            best = res
    if best is None:
        raise ConvergenceError(f"AR coefficient optimization failed to converge (order {k})")
    return np.asarray(best.x, dtype=float)


def _numerical_hessian(f, x: np.ndarray, rel_step: float = HESSIAN_REL_STEP) -> np.ndarray:
    """Central-difference Hessian with step rel_step * max(|x_i|, 1)."""
    x = np.asarray(x, dtype=float)
    p = x.size
    h = rel_step * np.maximum(np.abs(x), 1.0)
    H = np.empty((p, p))
    f0 = f(x)
    for i in range(p):
        ei = np.zeros(p)
        ei[i] = h[i]
        H[i, i] = (f(x + ei) - 2 * f0 + f(x - ei)) / h[i] ** 2
        for j in range(i):
            ej = np.zeros(p)
            ej[j] = h[j]
            H[i, j] = H[j, i] = (f(x + ei + ej) - f(x + ei - ej) - f(x - ei + ej) + f(x - ei - ej)) \
                / (4 * h[i] * h[j])
    return H


def _observed_vcov(theta: np.ndarray, spec: ArxSpec, lay: _Layout, idx: np.ndarray) -> np.ndarray:
    def ll(t):
        if t[-1] <= 0:
            return -np.inf
        u = _innovations(t, spec, lay, idx)
        return -idx.size * (0.5 * np.log(2 * np.pi) + np.log(t[-1])) - 0.5 * np.sum((u / t[-1]) ** 2)

    info = -_numerical_hessian(ll, theta)
    info = 0.5 * (info + info.T)
    try:
        vcov = np.linalg.inv(info)
    except np.linalg.LinAlgError:
        logging.warning("Observed information is singular; using pseudo-inverse")
        vcov = np.linalg.pinv(info)
    vcov = 0.5 * (vcov + vcov.T)
    w, V = np.linalg.eigh(vcov)
    if np.any(w < 0):
        logging.warning(f"Clipping {int(np.sum(w < 0))} negative vcov eigenvalue(s)")
        vcov = (V * np.clip(w, 0.0, None)) @ V.T
    return vcov


def fit(spec: ArxSpec, frame: Frame, sample_spec: Optional[ArxSpec] = None,
        initial_rho: Optional[Sequence[float]] = None, with_vcov: bool = True,
        require_stationary: bool = True) -> ArxFit:
    """
    Conditional maximum-likelihood fit.

    Args:
        spec: Model specification
        frame: Data frame holding the response and regressors
        sample_spec: Restrict the likelihood to rows usable by this (wider) spec too
        initial_rho: Warm start for the AR coefficients
        with_vcov: Compute the observed-information covariance
        require_stationary: Reject fits outside the stationary region

    Returns:
        ArxFit at the maximum
    """
    k = spec.ar_order
    lay, idx = _sample_rows(spec, frame, sample_spec)
    n = idx.size
    complete = int(lay.base_ok.sum())
    if n < spec.n_params + MIN_EXTRA_ROWS:
        raise InsufficientDataError(
            f"'{spec.label}' needs at least {spec.n_params + MIN_EXTRA_ROWS} rows after lag alignment, "
            f"got {n} ({complete} complete)")
    if spec.n_beta and np.linalg.matrix_rank(lay.X[idx]) < spec.n_beta:
        raise SingularDesignError(f"Design matrix of '{spec.label}' is rank deficient")

    rho = _maximize_rho(lay, idx, k, initial_rho) if k else np.empty(0)
    _, beta, sigma = _profile(rho, lay, idx)
    if sigma <= SIGMA_FLOOR:
        logging.warning(f"Residual scale of '{spec.label}' floored at {SIGMA_FLOOR}")
    if require_stationary and not is_stationary(rho):
        raise NonStationaryError(f"Fitted AR coefficients {np.round(rho, 4).tolist()} are not stationary")

    theta = np.concatenate([beta, rho, [sigma]])
    loglik_max = loglik(theta, spec, frame, sample_spec)
    vcov = _observed_vcov(theta, spec, lay, idx) if with_vcov else None

    u = _innovations(theta, spec, lay, idx)
    y = lay.y[idx]
    tss = np.sum((y - y.mean()) ** 2)
    r2 = 1.0 - np.sum(u ** 2) / tss if tss > 0 else float("nan")
    dof = n - (spec.n_beta + k)
    r2_adj = 1.0 - (1.0 - r2) * (n - 1) / dof if dof > 0 else float("nan")

    result = ArxFit(spec=spec, beta=beta, rho=rho, sigma=sigma, loglik_max=loglik_max,
                    vcov=vcov, n_effective=n, sample_spec=sample_spec,
                    first_year=int(lay.years[idx[0]]), last_year=int(lay.years[idx[-1]]),
                    r_squared=float(r2), r_squared_adj=float(r2_adj))
    logging.debug(f"Fitted '{spec.label}' on {n} rows "
                  f"({result.first_year}-{result.last_year}): loglik={loglik_max:.4f}")
    return result


def simulate(fit: ArxFit, frame: Optional[Frame], n: int, seed: int,
             start_year: Optional[int] = None, name: Optional[str] = None) -> Series:
    """
    Simulate the fitted model.

    Args:
        fit: Fitted (or from_params) model; AR part must be stationary
        frame: Covariate source (required when the spec has regressors)
        n: Number of years to emit
        seed: Random seed
        start_year: First simulated year (default frame start, else TREND_ORIGIN)
        name: Name of the returned series (default the response name)

    Returns:
        Simulated Series; an AR burn-in of 10*k steps is discarded
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    spec = fit.spec
    if not is_stationary(fit.rho):
        raise NonStationaryError(f"Cannot simulate non-stationary AR coefficients {fit.rho.tolist()}")
    if start_year is None:
        start_year = frame.start_year if frame is not None else TREND_ORIGIN
    years = np.arange(start_year, start_year + n)

    mean = np.zeros(n)
    col = 0
    if spec.include_intercept:
        mean += fit.beta[col]
        col += 1
    if spec.include_linear_trend:
        mean += fit.beta[col] * (years - TREND_ORIGIN)
        col += 1
    for name_k, k_lag in spec.regressors:
        if frame is None:
            raise InsufficientDataError(f"Regressor '{name_k}' needs a covariate frame to simulate")
        x = np.array([frame[name_k].value_at(y - k_lag) for y in years])
        if not np.all(np.isfinite(x)):
            missing = years[~np.isfinite(x)]
            raise InsufficientDataError(
                f"Covariate '{name_k}' (lag {k_lag}) unavailable for simulated years {missing.tolist()}")
        mean += fit.beta[col] * x
        col += 1

    burn = 10 * spec.ar_order
    rng = np.random.default_rng(seed)
    eps = fit.sigma * rng.standard_normal(n + burn)
    noise = signal.lfilter([1.0], np.concatenate([[1.0], -fit.rho]), eps)[burn:]
    return Series(name or spec.response, int(start_year), mean + noise)


def _design_value(spec: ArxSpec, year: int, covariate) -> np.ndarray:
    row = []
    if spec.include_intercept:
        row.append(1.0)
    if spec.include_linear_trend:
        row.append(float(year - TREND_ORIGIN))
    for name, k in spec.regressors:
        row.append(covariate(name, year - k))
    return np.asarray(row, dtype=float)


def _covariate_lookup(frame: Frame, future: Optional[Frame]):
    """Covariate value at a year: explicit future values, then the frame, then hold-last-value."""
    def covariate(name: str, year: int) -> float:
        if future is not None and name in future:
            value = future[name].value_at(year)
            if np.isfinite(value):
                return value
        value = frame[name].value_at(year)
        if np.isfinite(value):
            return value
        years, values = frame[name].observed()
        before = years <= year
        if not np.any(before):
            raise InsufficientDataError(f"No value of covariate '{name}' available for year {year}")
        return float(values[before][-1])

    return covariate


def expected_level(fit: ArxFit, frame: Frame, year: int, future: Optional[Frame] = None) -> float:
    """Model mean x_year' beta at a year (the AR noise has mean zero)."""
    covariate = _covariate_lookup(frame, future)
    return float(_design_value(fit.spec, year, covariate) @ fit.beta)


def forecast_error_cov(rho: Sequence[float], sigma: float, horizon: int) -> np.ndarray:
    """Joint covariance of the 1..horizon step forecast errors."""
    psi = psi_weights(rho, horizon)
    L = np.zeros((horizon, horizon))
    for i in range(horizon):
        L[i, :i + 1] = psi[i::-1]
    return sigma ** 2 * (L @ L.T)


def psi_weights(rho: Sequence[float], h: int) -> np.ndarray:
    """MA(infinity) weights psi_0..psi_{h-1} of the AR polynomial."""
    rho = np.asarray(rho, dtype=float)
    psi = np.zeros(h)
    psi[0] = 1.0
    for i in range(1, h):
        for j in range(1, min(i, rho.size) + 1):
            psi[i] += rho[j - 1] * psi[i - j]
    return psi


def _last_observed_year(s: Series) -> int:
    years, _ = s.observed()
    if years.size == 0:
        raise InsufficientDataError(f"Series '{s.name}' has no observed values")
    return int(years[-1])


def forecast(fit: ArxFit, frame: Frame, horizon: int, origin: Optional[int] = None,
             future: Optional[Frame] = None) -> List[ForecastPoint]:
    """
    Plug-in h-step forecasts.

    Args:
        fit: Fitted model
        frame: Data up to (at least) the origin
        horizon: Number of steps h >= 1
        origin: Last conditioning year (default: last observed response year)
        future: Explicit future covariate values; otherwise hold-last-value

    Returns:
        One ForecastPoint(mean, sd) per step; sd excludes parameter uncertainty
    """
    if horizon < 1:
        raise ValueError(f"horizon must be >= 1, got {horizon}")
    spec = fit.spec
    for name in spec.columns:
        if name not in frame:
            raise DataFormatError(f"Frame lacks series required by '{spec.label}'", column=name)
    if origin is None:
        origin = _last_observed_year(frame[spec.response])

    covariate = _covariate_lookup(frame, future)

    k = spec.ar_order
    errors = []
    for i in range(k, 0, -1):
        year = origin - i + 1
        z = frame[spec.response].value_at(year)
        if not np.isfinite(z):
            raise InsufficientDataError(f"Response '{spec.response}' missing at conditioning year {year}")
        errors.append(z - _design_value(spec, year, covariate) @ fit.beta)

    psi = psi_weights(fit.rho, horizon)
    sd = fit.sigma * np.sqrt(np.cumsum(psi ** 2))
    out = []
    for j in range(1, horizon + 1):
        year = origin + j
        e_hat = sum(fit.rho[i] * errors[-1 - i] for i in range(k)) if k else 0.0
        errors.append(e_hat)
        mean = float(_design_value(spec, year, covariate) @ fit.beta + e_hat)
        out.append(ForecastPoint(mean=mean, sd=float(sd[j - 1])))
    return out


def residuals(fit: ArxFit, frame: Frame) -> Series:
    """Standardized one-step innovations on the frame's year grid; unusable rows masked."""
    spec = fit.spec
    lay, idx = _sample_rows(spec, frame, fit.sample_spec)
    values = np.full(frame.length, np.nan)
    values[idx] = _innovations(fit.theta, spec, lay, idx) / fit.sigma
    return Series(f"{spec.response}_resid", frame.start_year, values)
