"""
Confidence distributions and confidence curves for scalar foci, their
combination across data sources, and conditional-Gaussian reconstruction
of missing values.
"""
import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import linalg, special
from statsmodels.tsa.arima_process import arma_acovf

from tsmodel import argauss
from tsmodel.argauss import ArxFit
from tsmodel.errors import DegenerateError, InsufficientDataError, NonStationaryError
from tsmodel.frame import Frame, Series

from .modelsel import FocusSpec, focus_estimate, focus_variance

GRID_POINTS = 2001
GRID_TAIL = 1e-6
C_CLIP = 1e-15


@dataclass(frozen=True, eq=False)
class ConfidenceDistribution:
    """
    Confidence distribution C(theta) for a scalar focus.

    family 'normal' is C = Phi((theta - center) / spread); family 'grid'
    interpolates a monotone grid of (theta, C) pairs.
    """
    focus_label: str
    center: float
    spread: float
    family: str = "normal"
    grid_theta: Optional[np.ndarray] = None
    grid_c: Optional[np.ndarray] = None

    def __post_init__(self):
        if not self.spread > 0 or not np.isfinite(self.spread):
            raise DegenerateError(f"Confidence distribution '{self.focus_label}' has spread {self.spread}")
        if self.family not in ("normal", "grid"):
            raise ValueError(f"Unknown confidence family '{self.family}'")
        if self.family == "grid":
            if self.grid_theta is None or self.grid_c is None:
                raise ValueError("Grid confidence distribution needs theta and C arrays")
            theta = np.array(self.grid_theta, dtype=float)
            c = np.array(self.grid_c, dtype=float)
            theta.setflags(write=False)
            c.setflags(write=False)
            object.__setattr__(self, "grid_theta", theta)
            object.__setattr__(self, "grid_c", c)

    @classmethod
    def normal(cls, focus_label: str, center: float, spread: float) -> "ConfidenceDistribution":
        return cls(focus_label=focus_label, center=float(center), spread=float(spread))

    @classmethod
    def from_grid(cls, focus_label: str, theta: Sequence[float], c: Sequence[float]) -> "ConfidenceDistribution":
        """Grid CD; theta strictly increasing, C non-decreasing in [0, 1]."""
        theta = np.asarray(theta, dtype=float)
        c = np.asarray(c, dtype=float)
        if theta.size < 3 or theta.shape != c.shape:
            raise ValueError("Grid needs at least 3 matching (theta, C) pairs")
        if np.any(np.diff(theta) <= 0):
            raise ValueError("Grid theta must be strictly increasing")
        if np.any(np.diff(c) < 0) or c[0] < 0 or c[-1] > 1:
            raise ValueError("Grid C must be non-decreasing within [0, 1]")
        center = float(np.interp(0.5, c, theta))
        lo, hi = np.interp([special.ndtr(-1.0), special.ndtr(1.0)], c, theta)
        return cls(focus_label=focus_label, center=center, spread=float((hi - lo) / 2),
                   family="grid", grid_theta=theta, grid_c=c)

    def cdf(self, theta) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        if self.family == "normal":
            return special.ndtr((theta - self.center) / self.spread)
        return np.interp(theta, self.grid_theta, self.grid_c, left=0.0, right=1.0)

    def quantile(self, p) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        if self.family == "normal":
            return self.center + self.spread * special.ndtri(p)
        return np.interp(p, self.grid_c, self.grid_theta)

    def support(self, tail: float = GRID_TAIL) -> Tuple[float, float]:
        lo, hi = self.quantile([tail, 1 - tail])
        return float(lo), float(hi)

    def grid_rows(self, n_points: int = 201) -> List[Tuple[float, float, float]]:
        """(theta, C, cc) rows for plotting."""
        lo, hi = self.support(1e-4)
        theta = np.linspace(lo, hi, n_points)
        c = self.cdf(theta)
        return [(float(t), float(v), float(abs(1 - 2 * v))) for t, v in zip(theta, c)]

    def to_dict(self) -> Dict:
        data = {"focus_label": self.focus_label, "family": self.family,
                "center": self.center, "spread": self.spread}
        if self.family == "grid":
            data["theta"] = self.grid_theta.tolist()
            data["C"] = self.grid_c.tolist()
        return data

    @classmethod
    def from_dict(cls, data: Dict) -> "ConfidenceDistribution":
        label = data.get("focus_label", "")
        if data.get("family", "normal") == "grid":
            return cls.from_grid(label, data["theta"], data["C"])
        return cls.normal(label, data["center"], data["spread"])


@dataclass(frozen=True)
class ConfidenceCurve:
    """cc(theta) = |1 - 2 C(theta)|."""
    distribution: ConfidenceDistribution

    def __call__(self, theta) -> np.ndarray:
        return np.abs(1.0 - 2.0 * self.distribution.cdf(theta))

    def level_set(self, level: float) -> Tuple[float, float]:
        """Endpoints of {theta: cc(theta) <= level}."""
        return interval(self.distribution, level)


def confidence_curve(cd: ConfidenceDistribution) -> ConfidenceCurve:
    return ConfidenceCurve(cd)


def interval(cd: ConfidenceDistribution, level: float) -> Tuple[float, float]:
    """Equal-tailed interval [C^-1((1 - level) / 2), C^-1((1 + level) / 2)]."""
    if not 0 < level < 1:
        raise ValueError(f"level must be in (0, 1), got {level}")
    lo, hi = cd.quantile([(1 - level) / 2, (1 + level) / 2])
    return float(lo), float(hi)


def normal_from_interval(focus_label: str, lo: float, hi: float, level: float = 0.95) -> ConfidenceDistribution:
    """Normal CD whose equal-tailed `level` interval is [lo, hi]."""
    if not 0 < level < 1:
        raise ValueError(f"level must be in (0, 1), got {level}")
    if not hi > lo:
        raise ValueError(f"Interval [{lo}, {hi}] is empty")
    z = special.ndtri((1 + level) / 2)
    return ConfidenceDistribution.normal(focus_label, (lo + hi) / 2, (hi - lo) / (2 * z))


def cd_from_fit(fit: ArxFit, frame: Frame, focus: FocusSpec, origin: Optional[int] = None,
                future: Optional[Frame] = None) -> ConfidenceDistribution:
    """
    Normal CD for a focus: center the focus estimate, spread the delta-method
    standard error (prediction foci add the forecast innovation variance).
    """
    center = focus_estimate(fit, frame, focus, origin, future)
    variance = focus_variance(fit, frame, focus, origin, future)
    if focus.kind == "prediction":
        sd = argauss.forecast(fit, frame, focus.horizon, origin=origin, future=future)[-1].sd
        variance += sd ** 2
    if not variance > 0:
        raise DegenerateError(f"Focus '{focus.label}' has zero estimated spread")
    return ConfidenceDistribution.normal(focus.label, center, float(np.sqrt(variance)))


def combine(cds: Sequence[ConfidenceDistribution]) -> ConfidenceDistribution:
    """
    Combine independent CDs for one focus by adding their implied
    log-likelihoods -Phi^-1(C)^2 / 2 and converting back by the signed root.

    Normal inputs reduce to precision weighting.
    """
    cds = list(cds)
    if len(cds) < 2:
        raise ValueError(f"combine needs at least 2 confidence distributions, got {len(cds)}")
    labels = {cd.focus_label for cd in cds}
    if len(labels) != 1:
        raise ValueError(f"Cannot combine different foci: {sorted(labels)}")
    label = cds[0].focus_label

    if all(cd.family == "normal" for cd in cds):
        precision = np.array([1.0 / cd.spread ** 2 for cd in cds])
        centers = np.array([cd.center for cd in cds])
        center = float(precision @ centers / precision.sum())
        spread = float(precision.sum() ** -0.5)
        logging.info(f"Combined {len(cds)} normal CDs for '{label}': center {center:.4g}, spread {spread:.4g}")
        return ConfidenceDistribution.normal(label, center, spread)

    lo = min(cd.support()[0] for cd in cds)
    hi = max(cd.support()[1] for cd in cds)
    theta = np.linspace(lo, hi, GRID_POINTS)
    total = np.zeros(theta.size)
    for cd in cds:
        c = np.clip(cd.cdf(theta), C_CLIP, 1 - C_CLIP)
        total += -0.5 * special.ndtri(c) ** 2
    i_max = int(np.argmax(total))
    deviance = np.clip(2.0 * (total[i_max] - total), 0.0, None)
    c_comb = special.ndtr(np.sign(theta - theta[i_max]) * np.sqrt(deviance))
    c_comb = np.maximum.accumulate(c_comb)
    logging.info(f"Combined {len(cds)} CDs for '{label}' on a {GRID_POINTS}-point grid")
    return ConfidenceDistribution.from_grid(label, theta, c_comb)


@dataclass
class Reconstruction:
    """Series with masked entries filled by conditional means, plus conditional sds."""
    series: Series
    cond_sd: Series
    filled_years: List[int]


def _gaps(mask: np.ndarray) -> List[Tuple[int, int]]:
    """Inclusive index ranges of consecutive masked runs."""
    runs = []
    start = None
    for i, missing in enumerate(np.append(mask, False)):
        if missing and start is None:
            start = i
        elif not missing and start is not None:
            runs.append((start, i - 1))
            start = None
    return runs


def _level_lookup(fit: ArxFit, source: Frame, years: np.ndarray):
    """Model level by series index, NaN where a lagged covariate is not yet available."""
    cache: Dict[int, float] = {}

    def level(i: int) -> float:
        if i not in cache:
            try:
                cache[i] = argauss.expected_level(fit, source, int(years[i]))
            except InsufficientDataError:
                cache[i] = float("nan")
        return cache[i]

    return level


def reconstruct_missing(s: Series, fit: ArxFit, frame: Optional[Frame] = None) -> Reconstruction:
    """
    Fill masked entries of s with their conditional Gaussian mean given the
    observed entries within 3k + 10 years of each gap, under the fitted model.

    Observed years whose model level is undefined (a lagged covariate before
    its first value) are left out of the conditioning set.

    Args:
        s: Series with gaps (the fitted model's response)
        fit: Stationary fitted model
        frame: Covariate source when the model has regressors

    Returns:
        Reconstruction; observed entries are unchanged and have conditional sd 0
    """
    if s.observed_count == 0:
        raise InsufficientDataError(f"Series '{s.name}' is entirely masked")
    if not argauss.is_stationary(fit.rho):
        raise NonStationaryError(f"Cannot reconstruct under non-stationary AR coefficients {fit.rho.tolist()}")
    source = frame.with_series(s.renamed(fit.spec.response)) if frame is not None \
        else Frame.of(s.renamed(fit.spec.response))

    values = np.array(s.values, dtype=float)
    sd = np.zeros(s.length)
    gaps = _gaps(s.mask)
    if not gaps:
        return Reconstruction(series=s, cond_sd=Series(f"{s.name}_sd", s.start_year, sd), filled_years=[])

    level = _level_lookup(fit, source, s.years)
    window = 3 * fit.spec.ar_order + 10
    acov = arma_acovf(np.concatenate([[1.0], -fit.rho]), np.array([1.0]),
                      nobs=s.length, sigma2=fit.sigma ** 2)
    observed = ~s.mask
    for g0, g1 in gaps:
        lo, hi = max(0, g0 - window), min(s.length - 1, g1 + window)
        miss = np.arange(g0, g1 + 1)
        mu_miss = np.array([level(i) for i in miss])
        if not np.all(np.isfinite(mu_miss)):
            year = int(s.years[miss[~np.isfinite(mu_miss)][0]])
            raise InsufficientDataError(f"No model level for missing year {year} (covariate unavailable)")
        obs = np.flatnonzero(observed[lo:hi + 1]) + lo
        mu_obs = np.array([level(i) for i in obs])
        obs, mu_obs = obs[np.isfinite(mu_obs)], mu_obs[np.isfinite(mu_obs)]
        s_mm = acov[np.abs(miss[:, None] - miss[None, :])]
        if obs.size == 0:
            values[miss] = mu_miss
            sd[miss] = np.sqrt(np.diag(s_mm))
            continue
        s_mo = acov[np.abs(miss[:, None] - obs[None, :])]
        s_oo = acov[np.abs(obs[:, None] - obs[None, :])]
        factor = linalg.cho_factor(s_oo)
        values[miss] = mu_miss + s_mo @ linalg.cho_solve(factor, s.values[obs] - mu_obs)
        cond = s_mm - s_mo @ linalg.cho_solve(factor, s_mo.T)
        sd[miss] = np.sqrt(np.clip(np.diag(cond), 0.0, None))

    filled = [int(y) for y in s.years[s.mask]]
    logging.info(f"Reconstructed {len(filled)} missing value(s) of '{s.name}' in {len(gaps)} gap(s)")
    return Reconstruction(series=Series(s.name, s.start_year, values),
                          cond_sd=Series(f"{s.name}_sd", s.start_year, sd), filled_years=filled)
