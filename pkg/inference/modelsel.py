"""
Model scoring and selection: AIC, BIC, sequential score races and the
focused information criterion (FIC) with pluggable focus functionals.
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import integrate, special

from tsmodel import argauss
from tsmodel.argauss import ArxFit, ArxSpec
from tsmodel.errors import HjorticError, InsufficientDataError, NonStationaryError, NotNestedError
from tsmodel.frame import Frame
from tsmodel.parallel import parallel_map

FOCUS_REL_STEP = 1e-5
MC_DRAWS = 100_000
MC_SEED = 20140101
QUADRATURE_MAX_DIM = 3


def aic(fit: ArxFit) -> float:
    """2 * loglik_max - 2 * p (larger is better)."""
    return 2.0 * fit.loglik_max - 2.0 * fit.n_params


def bic(fit: ArxFit, n: Optional[int] = None) -> float:
    """2 * loglik_max - p * log(n); n defaults to the rows entering the likelihood."""
    n = fit.n_effective if n is None else n
    if n <= 0:
        raise ValueError(f"BIC needs a positive sample size, got {n}")
    return 2.0 * fit.loglik_max - fit.n_params * np.log(n)


@dataclass
class ScoreRow:
    label: str
    spec: ArxSpec
    n_params: int
    n_effective: int
    loglik_max: float
    aic: float
    bic: float
    best_aic: bool = False
    best_bic: bool = False

    def to_dict(self) -> Dict:
        return {
            "label": self.label,
            "spec": self.spec.to_dict(),
            "n_params": self.n_params,
            "n_effective": self.n_effective,
            "loglik_max": self.loglik_max,
            "aic": self.aic,
            "bic": self.bic,
            "best_aic": self.best_aic,
            "best_bic": self.best_bic,
        }


def score_table(candidates: Sequence[ArxSpec], frame: Frame, common_sample: bool = True) -> List[ScoreRow]:
    """
    AIC/BIC table over a candidate list, best row per criterion flagged.

    Args:
        candidates: Specifications to compare
        frame: Data
        common_sample: Fit every candidate on the rows usable by all of them

    Returns:
        One ScoreRow per candidate, in input order
    """
    sample = argauss.union_spec(candidates) if common_sample else None
    fits = parallel_map(lambda s: argauss.fit(s, frame, sample_spec=sample, with_vcov=False), candidates)
    rows = [ScoreRow(label=f.spec.label, spec=f.spec, n_params=f.n_params, n_effective=f.n_effective,
                     loglik_max=f.loglik_max, aic=aic(f), bic=bic(f)) for f in fits]
    rows[int(np.argmax([r.aic for r in rows]))].best_aic = True
    rows[int(np.argmax([r.bic for r in rows]))].best_bic = True
    logging.info(f"Scored {len(rows)} candidates on {fits[0].n_effective} rows")
    return rows


@dataclass
class ScoreRace:
    """AIC(candidate) - AIC(baseline) per year; NaN marks a failed fit."""
    years: np.ndarray
    labels: List[str]
    differences: np.ndarray
    baseline: str

    def to_rows(self) -> List[List]:
        return [[int(y)] + self.differences[i].tolist() for i, y in enumerate(self.years)]


def sequential_scores(candidates: Sequence[ArxSpec], frame: Frame, baseline: ArxSpec,
                      start_year: int, end_year: Optional[int] = None) -> ScoreRace:
    """
    Refit every candidate on data up to each year j and record AIC differences
    against the baseline.

    Single-year fit failures are masked cells, not errors.
    """
    candidates = list(candidates)
    sample = argauss.union_spec(candidates + [baseline])
    end_year = frame.end_year if end_year is None else min(end_year, frame.end_year)
    if start_year > end_year:
        raise ValueError(f"start_year {start_year} is after the last year {end_year}")

    largest = max(candidates + [baseline], key=lambda s: s.n_params)
    head = frame.truncate(start_year)
    complete = int(head.complete_rows(sample.columns).sum())
    if complete < largest.n_params + largest.ar_order + 2:
        raise InsufficientDataError(
            f"start_year {start_year} leaves {complete} complete rows; "
            f"'{largest.label}' needs {largest.n_params + largest.ar_order + 2}")

    def one_year(year: int) -> np.ndarray:
        data = frame.truncate(year)
        scores: Dict[ArxSpec, float] = {}
        for spec in [baseline] + candidates:
            if spec in scores:
                continue
            try:
                scores[spec] = aic(argauss.fit(spec, data, sample_spec=sample, with_vcov=False))
            except HjorticError as e:
                logging.warning(f"Score race: '{spec.label}' failed at {year}: {e}")
                scores[spec] = float("nan")
        return np.array([scores[c] - scores[baseline] for c in candidates])

    years = np.arange(start_year, end_year + 1)
    diffs = np.vstack(parallel_map(one_year, years.tolist()))
    logging.info(f"Score race over {years.size} years for {len(candidates)} candidates")
    return ScoreRace(years=years, labels=[c.label for c in candidates], differences=diffs,
                     baseline=baseline.label)


FOCUS_KINDS = ("prediction", "slope_contrast", "threshold_probability")


@dataclass(frozen=True)
class FocusSpec:
    """
    Scalar focus functional of a fitted model.

    prediction: mean of the h-step forecast;
    slope_contrast: (xi_a - xi_b), divided by sigma when scaled;
    threshold_probability: P(response < threshold in all listed horizons).
    """
    kind: str
    horizon: int = 1
    years: Optional[Tuple[int, int]] = None
    scaled: bool = True
    threshold: Optional[float] = None
    horizons: Tuple[int, ...] = ()

    def __post_init__(self):
        if self.kind not in FOCUS_KINDS:
            raise ValueError(f"Unknown focus kind '{self.kind}' (expected one of {FOCUS_KINDS})")
        if self.kind == "prediction" and self.horizon < 1:
            raise ValueError(f"Prediction horizon must be >= 1, got {self.horizon}")
        if self.kind == "slope_contrast":
            if self.years is None or len(self.years) != 2 or self.years[0] == self.years[1]:
                raise ValueError(f"Slope contrast needs two distinct years, got {self.years}")
            object.__setattr__(self, "years", (int(self.years[0]), int(self.years[1])))
        if self.kind == "threshold_probability":
            horizons = tuple(sorted({int(h) for h in self.horizons}))
            if not horizons or horizons[0] < 1:
                raise ValueError(f"Threshold focus needs positive horizons, got {self.horizons}")
            if self.threshold is None or np.isnan(self.threshold):
                raise ValueError("Threshold focus needs a threshold level")
            object.__setattr__(self, "horizons", horizons)

    @classmethod
    def prediction(cls, horizon: int) -> "FocusSpec":
        return cls(kind="prediction", horizon=horizon)

    @classmethod
    def slope_contrast(cls, year_a: int, year_b: int, scaled: bool = True) -> "FocusSpec":
        return cls(kind="slope_contrast", years=(year_a, year_b), scaled=scaled)

    @classmethod
    def threshold_probability(cls, threshold: float, horizons: Sequence[int]) -> "FocusSpec":
        return cls(kind="threshold_probability", threshold=float(threshold), horizons=tuple(horizons))

    @classmethod
    def parse(cls, descriptor: str, data_mean: Optional[float] = None) -> "FocusSpec":
        """
        Parse 'pred:h', 'slope:y1,y2[,raw]' or 'thresh:level,h1,h2,...'.

        A threshold level of 'mean' uses data_mean.
        """
        try:
            kind, _, body = descriptor.partition(":")
            parts = [p.strip() for p in body.split(",") if p.strip()]
            if kind == "pred":
                return cls.prediction(int(parts[0]))
            if kind == "slope":
                scaled = not (len(parts) > 2 and parts[2] == "raw")
                return cls.slope_contrast(int(parts[0]), int(parts[1]), scaled=scaled)
            if kind == "thresh":
                if parts[0] == "mean":
                    if data_mean is None:
                        raise ValueError("threshold 'mean' needs the data mean")
                    level = data_mean
                else:
                    level = float(parts[0])
                return cls.threshold_probability(level, [int(h) for h in parts[1:]])
        except (IndexError, ValueError) as e:
            raise ValueError(f"Malformed focus '{descriptor}': {e}") from None
        raise ValueError(f"Malformed focus '{descriptor}': unknown kind '{kind}'")

    @property
    def label(self) -> str:
        if self.kind == "prediction":
            return f"pred:{self.horizon}"
        if self.kind == "slope_contrast":
            return f"slope:{self.years[0]},{self.years[1]}" + ("" if self.scaled else ",raw")
        return f"thresh:{self.threshold:.6g}," + ",".join(str(h) for h in self.horizons)

    def to_dict(self) -> Dict:
        return {"kind": self.kind, "label": self.label, "horizon": self.horizon,
                "years": list(self.years) if self.years else None, "scaled": self.scaled,
                "threshold": self.threshold, "horizons": list(self.horizons)}


def _orthant_probability(a: np.ndarray, R: np.ndarray) -> float:
    """P(Z_i <= a_i for all i) for Z ~ N(0, R) with unit diagonal, by nested quadrature."""
    if a.size == 1:
        return float(special.ndtr(a[0]))
    r = R[1:, 0]
    cond = R[1:, 1:] - np.outer(r, r)
    sd = np.sqrt(np.clip(np.diag(cond), 0.0, None))
    # near-deterministic components given Z_0
    sd = np.maximum(sd, 1e-12)
    corr = cond / np.outer(sd, sd)
    np.fill_diagonal(corr, 1.0)

    def integrand(u: float) -> float:
        z = special.ndtri(u)
        return _orthant_probability((a[1:] - r * z) / sd, corr)

    upper = float(special.ndtr(a[0]))
    if upper <= 0.0:
        return 0.0
    value, _ = integrate.quad(integrand, 0.0, upper, epsabs=1e-11, epsrel=1e-9, limit=200)
    return float(np.clip(value, 0.0, 1.0))


def joint_below_probability(means: np.ndarray, cov: np.ndarray, threshold: float) -> float:
    """P(Y_i < threshold for all i) for Y ~ N(means, cov)."""
    if threshold == np.inf:
        return 1.0
    if threshold == -np.inf:
        return 0.0
    sd = np.sqrt(np.diag(cov))
    a = (threshold - means) / sd
    if means.size <= QUADRATURE_MAX_DIM:
        R = cov / np.outer(sd, sd)
        return _orthant_probability(a, R)
    rng = np.random.default_rng(MC_SEED)
    draws = rng.multivariate_normal(means, cov, size=MC_DRAWS, method="cholesky")
    return float(np.mean(np.all(draws < threshold, axis=1)))


def focus_estimate(fit: ArxFit, frame: Frame, focus: FocusSpec, origin: Optional[int] = None,
                   future: Optional[Frame] = None) -> float:
    """
    Evaluate a focus functional at a fitted model.

    Args:
        fit: Fitted model
        frame: Data used for conditioning and covariates
        focus: Focus functional
        origin: Forecast origin (default: last observed response year)
        future: Explicit future covariates

    Returns:
        Scalar focus value
    """
    if focus.kind == "slope_contrast":
        a, b = focus.years
        diff = argauss.expected_level(fit, frame, a, future) - argauss.expected_level(fit, frame, b, future)
        return diff / fit.sigma if focus.scaled else diff
    if not argauss.is_stationary(fit.rho):
        raise NonStationaryError(f"Focus '{focus.label}' needs a stationary fit")
    if focus.kind == "prediction":
        return argauss.forecast(fit, frame, focus.horizon, origin=origin, future=future)[-1].mean
    h_max = max(focus.horizons)
    points = argauss.forecast(fit, frame, h_max, origin=origin, future=future)
    idx = np.asarray(focus.horizons) - 1
    means = np.array([p.mean for p in points])[idx]
    cov = argauss.forecast_error_cov(fit.rho, fit.sigma, h_max)[np.ix_(idx, idx)]
    return joint_below_probability(means, cov, focus.threshold)


def focus_gradient(fit: ArxFit, frame: Frame, focus: FocusSpec, origin: Optional[int] = None,
                   future: Optional[Frame] = None, rel_step: float = FOCUS_REL_STEP) -> np.ndarray:
    """Central-difference gradient of the focus with respect to theta = [beta, rho, sigma]."""
    theta = fit.theta
    grad = np.zeros(theta.size)
    for i in range(theta.size):
        h = rel_step * max(abs(theta[i]), 1.0)
        up, down = theta.copy(), theta.copy()
        up[i] += h
        down[i] -= h
        grad[i] = (focus_estimate(fit.with_params(up), frame, focus, origin, future)
                   - focus_estimate(fit.with_params(down), frame, focus, origin, future)) / (2 * h)
    return grad


def focus_variance(fit: ArxFit, frame: Frame, focus: FocusSpec, origin: Optional[int] = None,
                   future: Optional[Frame] = None) -> float:
    """Delta-method variance grad' vcov grad."""
    g = focus_gradient(fit, frame, focus, origin, future)
    return float(max(g @ fit.vcov @ g, 0.0))


@dataclass
class FicEntry:
    label: str
    spec: ArxSpec
    n_params: int
    focus_estimate: float
    variance: float
    bias: float
    sq_bias: float
    fic_score: float

    def to_dict(self) -> Dict:
        return {
            "label": self.label,
            "spec": self.spec.to_dict(),
            "n_params": self.n_params,
            "focus_estimate": self.focus_estimate,
            "variance": self.variance,
            "bias": self.bias,
            "sq_bias": self.sq_bias,
            "fic_score": self.fic_score,
        }


@dataclass
class FicReport:
    """FIC scores per candidate, sorted ascending (best first)."""
    focus: FocusSpec
    wide: ArxSpec
    wide_estimate: float
    wide_variance: float
    entries: List[FicEntry]
    failed: List[str] = field(default_factory=list)

    @property
    def best(self) -> FicEntry:
        return self.entries[0]

    def entry(self, spec: ArxSpec) -> FicEntry:
        for e in self.entries:
            if e.spec == spec:
                return e
        raise KeyError(f"No FIC entry for '{spec.label}'")

    def plot_rows(self) -> List[Tuple[float, float]]:
        """(fic_score, focus_estimate) pairs for FIC plots."""
        return [(e.fic_score, e.focus_estimate) for e in self.entries]

    def to_dict(self) -> Dict:
        return {
            "focus": self.focus.to_dict(),
            "wide": self.wide.to_dict(),
            "wide_label": self.wide.label,
            "wide_estimate": self.wide_estimate,
            "wide_variance": self.wide_variance,
            "candidates": [e.to_dict() for e in self.entries],
            "failed": self.failed,
        }


def fic(candidates: Sequence[ArxSpec], wide: ArxSpec, frame: Frame, focus: FocusSpec,
        origin: Optional[int] = None, future: Optional[Frame] = None) -> FicReport:
    """
    Focused information criterion over nested candidates.

    Every model is fitted on the wide model's sample. For candidate j the
    squared bias estimate is max(0, (mu_wide - mu_j)^2 - (var_wide - var_j)+),
    and the score is sqrt(var_j + sq_bias_j).

    Args:
        candidates: Specifications, each nested in wide
        wide: Bias reference model
        frame: Data
        focus: Focus functional
        origin: Forecast origin for prediction/threshold foci
        future: Explicit future covariates

    Returns:
        FicReport sorted ascending by fic_score
    """
    candidates = list(dict.fromkeys(candidates))
    for spec in candidates:
        if not spec.is_nested_in(wide):
            raise NotNestedError(f"'{spec.label}' is not nested in wide model '{wide.label}'")

    wide_fit = argauss.fit(wide, frame, sample_spec=wide)
    wide_estimate = focus_estimate(wide_fit, frame, focus, origin, future)
    wide_variance = focus_variance(wide_fit, frame, focus, origin, future)

    def evaluate(spec: ArxSpec):
        try:
            f = wide_fit if spec == wide else argauss.fit(spec, frame, sample_spec=wide)
            est = wide_estimate if spec == wide else focus_estimate(f, frame, focus, origin, future)
            var = wide_variance if spec == wide else focus_variance(f, frame, focus, origin, future)
        except HjorticError as e:
            logging.warning(f"FIC: candidate '{spec.label}' failed: {e}")
            return spec, None
        bias = wide_estimate - est
        correction = max(0.0, wide_variance - var)
        sq_bias = max(0.0, bias ** 2 - correction)
        return spec, FicEntry(label=spec.label, spec=spec, n_params=spec.n_params, focus_estimate=est,
                              variance=var, bias=bias, sq_bias=sq_bias, fic_score=float(np.sqrt(var + sq_bias)))

    results = parallel_map(evaluate, candidates)
    entries = [e for _, e in results if e is not None]
    failed = [s.label for s, e in results if e is None]
    if not entries:
        raise InsufficientDataError("No FIC candidate could be fitted")
    entries.sort(key=lambda e: (e.fic_score, e.label))
    logging.info(f"FIC for focus {focus.label}: best '{entries[0].label}' "
                 f"(score {entries[0].fic_score:.4g}) among {len(entries)} candidates")
    return FicReport(focus=focus, wide=wide, wide_estimate=wide_estimate, wide_variance=wide_variance,
                     entries=entries, failed=failed)
