"""
Time-varying autoregressive (tvAR) processes.

Y_i + alpha_1(u) Y_{i-1} + ... + alpha_p(u) Y_{i-p} = sigma(u) eps_i with
rescaled time u = i / n. Note the sign: alpha_j = -rho_j of the ordinary
AR parameterization used in argauss.
"""
import logging
from dataclasses import dataclass
from typing import Callable, Dict, List, Sequence, Tuple

import numpy as np
from scipy import stats

from .argauss import is_stationary
from .errors import InsufficientDataError, NonStationaryError
from .frame import Series
from .parallel import parallel_map

DEFAULT_BANDWIDTH = 0.15
CHECK_GRID = 101

CoefficientFn = Callable[[float], float]


def _constant(value: float) -> CoefficientFn:
    return lambda u: value


@dataclass(frozen=True)
class TvarSpec:
    """Order p, coefficient functions alpha_1..alpha_p and scale function sigma on [0, 1]."""
    order: int
    alpha_fns: Tuple[CoefficientFn, ...]
    sigma_fn: CoefficientFn

    def __post_init__(self):
        object.__setattr__(self, "alpha_fns", tuple(self.alpha_fns))
        if self.order < 1:
            raise ValueError(f"tvAR order must be >= 1, got {self.order}")
        if len(self.alpha_fns) != self.order:
            raise ValueError(f"Expected {self.order} coefficient functions, got {len(self.alpha_fns)}")
        for u in np.linspace(0.0, 1.0, CHECK_GRID):
            self.check(u)

    @classmethod
    def constant(cls, rho: Sequence[float], sigma: float) -> "TvarSpec":
        """Constant-coefficient tvAR equal to an ordinary AR(p) with coefficients rho."""
        rho = [float(r) for r in rho]
        return cls(order=len(rho), alpha_fns=tuple(_constant(-r) for r in rho), sigma_fn=_constant(float(sigma)))

    def alpha(self, u: float) -> np.ndarray:
        return np.array([f(u) for f in self.alpha_fns], dtype=float)

    def sigma(self, u: float) -> float:
        return float(self.sigma_fn(u))

    def check(self, u: float):
        """Raise if sigma(u) <= 0 or the frozen AR polynomial at u is not stationary."""
        if not self.sigma(u) > 0:
            raise ValueError(f"sigma({u:.3f}) = {self.sigma(u)} is not positive")
        if not is_stationary(-self.alpha(u)):
            raise NonStationaryError(f"Frozen tvAR coefficients at u={u:.3f} are not stationary")


def simulate_tvar(spec: TvarSpec, n: int, seed: int, start_year: int = 1, name: str = "tvar") -> Series:
    """
    Simulate n steps; a burn-in of 10 p steps at the frozen u = 0 coefficients is discarded.

    Args:
        spec: Process specification
        n: Number of emitted values (>= 10 p)
        seed: Random seed
        start_year: Year label of the first value
        name: Series name

    Returns:
        Simulated Series
    """
    p = spec.order
    if n < 10 * p:
        raise ValueError(f"n must be >= {10 * p} for order {p}, got {n}")
    burn = 10 * p
    rng = np.random.default_rng(seed)
    eps = rng.standard_normal(burn + n)
    y = np.zeros(burn + n + p)
    alpha0, sigma0 = spec.alpha(0.0), spec.sigma(0.0)
    for i in range(burn + n):
        if i < burn:
            alpha, sigma = alpha0, sigma0
        else:
            u = (i - burn + 1) / n
            alpha, sigma = spec.alpha(u), spec.sigma(u)
            if not is_stationary(-alpha):
                raise NonStationaryError(f"Frozen tvAR coefficients at u={u:.3f} are not stationary")
        past = y[i + p - 1::-1][:p]
        y[i + p] = -alpha @ past + sigma * eps[i]
    return Series(name, start_year, y[p + burn:])


@dataclass
class TvarLocalFit:
    """Local kernel-weighted estimates per year with pointwise standard errors."""
    years: np.ndarray
    u: np.ndarray
    alpha: np.ndarray
    sigma: np.ndarray
    alpha_se: np.ndarray
    sigma_se: np.ndarray
    intercept: np.ndarray
    n_eff: np.ndarray
    bandwidth: float

    @property
    def order(self) -> int:
        return int(self.alpha.shape[1])

    def header(self) -> List[str]:
        p = self.order
        return (["year"] + [f"alpha_{j}" for j in range(1, p + 1)] + ["sigma"]
                + [f"se_alpha_{j}" for j in range(1, p + 1)] + ["se_sigma"])

    def to_rows(self) -> List[List[float]]:
        return [[int(y)] + self.alpha[i].tolist() + [float(self.sigma[i])]
                + self.alpha_se[i].tolist() + [float(self.sigma_se[i])]
                for i, y in enumerate(self.years)]

    def summary(self) -> Dict:
        return {
            "order": self.order,
            "bandwidth": self.bandwidth,
            "n_years": int(self.years.size),
            "mean_alpha": self.alpha.mean(axis=0).tolist(),
            "sigma_range": [float(self.sigma.min()), float(self.sigma.max())],
        }


def fit_tvar_local(s: Series, order: int, bandwidth: float = DEFAULT_BANDWIDTH) -> TvarLocalFit:
    """
    Local Gaussian-kernel weighted conditional MLE of (alpha, sigma) at every usable year.

    The kernel sd is bandwidth on the rescaled-time axis u = i / n; a local
    intercept absorbs a non-zero mean. Coefficient errors are sandwich
    standard errors; sigma's is sigma / sqrt(2 n_eff).
    """
    if order < 1:
        raise ValueError(f"order must be >= 1, got {order}")
    if not 0 < bandwidth <= 1:
        raise ValueError(f"bandwidth must be a fraction of the span in (0, 1], got {bandwidth}")
    n = s.length
    if bandwidth * n < 5 * (order + 2):
        raise InsufficientDataError(
            f"Local window too small: bandwidth * n = {bandwidth * n:.1f} < {5 * (order + 2)}")

    y = s.values
    ok = ~s.mask
    usable = ok.copy()
    for j in range(1, order + 1):
        usable[j:] &= ok[:-j]
    usable[:order] = False
    rows = np.flatnonzero(usable)
    if rows.size < order + 3:
        raise InsufficientDataError(f"Series '{s.name}' has only {rows.size} usable rows for order {order}")
    u_all = (np.arange(n) + 1) / n
    X = np.column_stack([np.ones(rows.size)] + [y[rows - j] for j in range(1, order + 1)])
    target = y[rows]
    u_rows = u_all[rows]

    def local(i: int):
        w = stats.norm.pdf((u_rows - u_all[i]) / bandwidth)
        w /= w.sum()
        Xw = X * w[:, None]
        bread = np.linalg.inv(X.T @ Xw)
        b = bread @ (Xw.T @ target)
        r = target - X @ b
        sigma2 = w @ r ** 2
        meat = (Xw * r[:, None] ** 2).T @ Xw
        cov = bread @ meat @ bread
        n_eff = 1.0 / (w @ w)
        sigma = np.sqrt(sigma2)
        return b, np.sqrt(np.clip(np.diag(cov), 0.0, None)), sigma, sigma / np.sqrt(2 * n_eff), n_eff

    results = parallel_map(local, rows.tolist())
    coef = np.vstack([r[0] for r in results])
    se = np.vstack([r[1] for r in results])
    fit = TvarLocalFit(
        years=s.years[rows],
        u=u_all[rows],
        alpha=-coef[:, 1:],
        sigma=np.array([r[2] for r in results]),
        alpha_se=se[:, 1:],
        sigma_se=np.array([r[3] for r in results]),
        intercept=coef[:, 0],
        n_eff=np.array([r[4] for r in results]),
        bandwidth=bandwidth,
    )
    logging.info(f"Local tvAR({order}) fit of '{s.name}' at {rows.size} years, bandwidth {bandwidth}")
    return fit
