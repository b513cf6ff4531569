"""
Liver-index (HSI) computations and the bivariate gamma-copula model.

Margin 1 is liver weight, margin 2 is total fish weight; both gamma with
shape a and RATE b (mean a / b), coupled through a Gaussian copula with
normal-scores correlation rho.
"""
import logging
import os
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy import special, stats

from tsmodel.errors import ConvergenceError, DataFormatError, DegenerateError, InsufficientDataError
from tsmodel.parallel import parallel_map

MIN_COPULA_PAIRS = 30
NEWTON_MAX_ITER = 100
NEWTON_TOL = 1e-12
SCORE_CLIP = 1e-15
REPLICATE_BLOCK = 500


@dataclass(frozen=True, eq=False)
class FishPairs:
    """Liver and total weights (kg), paired by specimen."""
    liver_kg: np.ndarray
    fish_kg: np.ndarray
    check_order: bool = True

    def __post_init__(self):
        liver = np.array(self.liver_kg, dtype=float).reshape(-1)
        fish = np.array(self.fish_kg, dtype=float).reshape(-1)
        if liver.shape != fish.shape:
            raise ValueError(f"liver_kg and fish_kg lengths differ ({liver.size} vs {fish.size})")
        if liver.size == 0:
            raise InsufficientDataError("No fish pairs")
        if np.any(~np.isfinite(liver)) or np.any(~np.isfinite(fish)) or np.any(liver <= 0) or np.any(fish <= 0):
            raise ValueError("Fish weights must be finite and positive")
        if self.check_order and np.any(liver >= fish):
            bad = int(np.argmax(liver >= fish))
            raise ValueError(f"Specimen {bad}: liver weight {liver[bad]} is not below fish weight {fish[bad]}")
        liver.setflags(write=False)
        fish.setflags(write=False)
        object.__setattr__(self, "liver_kg", liver)
        object.__setattr__(self, "fish_kg", fish)

    def __len__(self):
        return int(self.liver_kg.size)

    @classmethod
    def from_csv(cls, path: str, liver_column: str = "liver_kg", fish_column: str = "fish_kg") -> "FishPairs":
        """Load pairs from a two-column CSV."""
        if not os.path.exists(path):
            raise FileNotFoundError(f"Input file not found: {path}")
        table = pd.read_csv(path, encoding="utf-8")
        for column in (liver_column, fish_column):
            if column not in table.columns:
                raise DataFormatError(f"Missing pair column in {path}", column=column)
        try:
            liver = pd.to_numeric(table[liver_column], errors="raise").to_numpy(dtype=float)
            fish = pd.to_numeric(table[fish_column], errors="raise").to_numpy(dtype=float)
        except ValueError as e:
            raise DataFormatError(f"Unparseable weight in {path}: {e}") from None
        logging.info(f"Loaded {liver.size} fish pairs from {path}")
        return cls(liver, fish)


def _bulk_index(liver: np.ndarray, fish: np.ndarray) -> np.ndarray:
    return 100.0 * liver.mean(axis=-1) / fish.mean(axis=-1)


def _ind_index(liver: np.ndarray, fish: np.ndarray) -> np.ndarray:
    return 100.0 * (liver / fish).mean(axis=-1)


def hsi_bulk(pairs: FishPairs) -> float:
    """100 * total liver / total weight."""
    return float(_bulk_index(pairs.liver_kg, pairs.fish_kg))


def hsi_ind(pairs: FishPairs) -> float:
    """100 * mean per-fish liver/weight ratio."""
    return float(_ind_index(pairs.liver_kg, pairs.fish_kg))


def hsi_stratified(weights: Sequence[float], indices: Sequence[float]) -> float:
    """Mixture index sum_u w(u) HSI(u); weights are stratum frequencies summing to 1."""
    w = np.asarray(weights, dtype=float)
    idx = np.asarray(indices, dtype=float)
    if w.shape != idx.shape or w.size == 0:
        raise ValueError(f"Need matching nonempty weights and indices, got {w.size} and {idx.size}")
    if np.any(w < 0):
        raise ValueError("Stratum weights must be nonnegative")
    if abs(w.sum() - 1.0) > 1e-10:
        raise ValueError(f"Stratum weights sum to {w.sum()}, not 1")
    return float(w @ idx)


@dataclass(frozen=True)
class CopulaModel:
    """Gamma(a1, rate b1) liver margin, Gamma(a2, rate b2) weight margin, normal-scores correlation rho."""
    a1: float
    b1: float
    a2: float
    b2: float
    rho: float

    def __post_init__(self):
        for name in ("a1", "b1", "a2", "b2"):
            value = getattr(self, name)
            if not value > 0 or not np.isfinite(value):
                raise ValueError(f"Copula parameter {name} must be positive, got {value}")
        if not -1 < self.rho < 1:
            raise ValueError(f"Copula correlation must be in (-1, 1), got {self.rho}")

    @property
    def margin_means(self) -> Tuple[float, float]:
        return self.a1 / self.b1, self.a2 / self.b2

    def to_dict(self) -> Dict:
        return {"a1": self.a1, "b1": self.b1, "a2": self.a2, "b2": self.b2, "rho": self.rho}

    @classmethod
    def from_dict(cls, data: Dict) -> "CopulaModel":
        return cls(*(float(data[k]) for k in ("a1", "b1", "a2", "b2", "rho")))


def _draw(model: CopulaModel, shape, rng: np.random.Generator) -> Tuple[np.ndarray, np.ndarray]:
    u = rng.standard_normal(shape)
    v = model.rho * u + np.sqrt(1.0 - model.rho ** 2) * rng.standard_normal(shape)
    liver = stats.gamma.ppf(special.ndtr(u), model.a1, scale=1.0 / model.b1)
    fish = stats.gamma.ppf(special.ndtr(v), model.a2, scale=1.0 / model.b2)
    return liver, fish


def sample_pairs(model: CopulaModel, n: int, seed: int) -> FishPairs:
    """Draw n specimens; ordering of liver below weight is not enforced on draws."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    liver, fish = _draw(model, n, np.random.default_rng(seed))
    return FishPairs(liver, fish, check_order=False)


def fit_gamma_margin(x: np.ndarray) -> Tuple[float, float]:
    """
    Gamma maximum likelihood (shape, rate).

    Newton iteration on log a - digamma(a) = log(mean) - mean(log x),
    started from the method of moments; rate = a / mean.
    """
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise ValueError("Gamma margin needs positive data")
    mean = x.mean()
    var = x.var()
    if not var > 0:
        raise DegenerateError("Gamma margin data have zero variance")
    target = np.log(mean) - np.mean(np.log(x))
    a = mean ** 2 / var
    for _ in range(NEWTON_MAX_ITER):
        f = np.log(a) - special.digamma(a) - target
        df = 1.0 / a - special.polygamma(1, a)
        step = f / df
        new_a = a - step
        while new_a <= 0:
            step /= 2
            new_a = a - step
        if abs(new_a - a) <= NEWTON_TOL * a:
            a = new_a
            break
        a = new_a
    else:
        raise ConvergenceError(f"Gamma shape Newton iteration did not converge (last a={a})")
    return float(a), float(a / mean)


def _normal_scores(x: np.ndarray, shape: float, rate: float) -> np.ndarray:
    p = np.clip(stats.gamma.cdf(x, shape, scale=1.0 / rate), SCORE_CLIP, 1 - SCORE_CLIP)
    return special.ndtri(p)


def fit_copula(pairs: FishPairs) -> CopulaModel:
    """Per-margin gamma MLE, then rho as the correlation of fitted normal scores."""
    if len(pairs) < MIN_COPULA_PAIRS:
        raise InsufficientDataError(f"Copula fit needs at least {MIN_COPULA_PAIRS} pairs, got {len(pairs)}")
    a1, b1 = fit_gamma_margin(pairs.liver_kg)
    a2, b2 = fit_gamma_margin(pairs.fish_kg)
    u = _normal_scores(pairs.liver_kg, a1, b1)
    v = _normal_scores(pairs.fish_kg, a2, b2)
    rho = float(np.corrcoef(u, v)[0, 1])
    model = CopulaModel(a1, b1, a2, b2, rho)
    logging.info(f"Copula fit on {len(pairs)} pairs: {model.to_dict()}")
    return model


@dataclass
class CopulaSimulation:
    """Replicated (hsi_ind, hsi_bulk) pairs."""
    hsi_ind: np.ndarray
    hsi_bulk: np.ndarray
    n_fish: int
    seed: int

    @property
    def n_reps(self) -> int:
        return int(self.hsi_ind.size)

    def to_rows(self) -> List[Tuple[int, float, float]]:
        return [(r, float(i), float(b)) for r, (i, b) in enumerate(zip(self.hsi_ind, self.hsi_bulk))]

    def summary(self) -> Dict:
        return {
            "n_fish": self.n_fish,
            "n_reps": self.n_reps,
            "seed": self.seed,
            "mean_ind": float(self.hsi_ind.mean()),
            "sd_ind": float(self.hsi_ind.std(ddof=1)) if self.n_reps > 1 else float("nan"),
            "mean_bulk": float(self.hsi_bulk.mean()),
            "sd_bulk": float(self.hsi_bulk.std(ddof=1)) if self.n_reps > 1 else float("nan"),
            "index_correlation": index_correlation(self) if self.n_reps > 2 else float("nan"),
        }


def simulate_copula(model: CopulaModel, n_fish: int, n_reps: int, seed: int) -> CopulaSimulation:
    """
    Sampling distribution of both indices.

    Replicate r draws its n_fish specimens from default_rng(seed + r), so the
    output does not depend on how replicate blocks are scheduled.
    """
    if n_fish < 1 or n_reps < 1:
        raise ValueError(f"n_fish and n_reps must be >= 1, got {n_fish} and {n_reps}")

    def block(start: int) -> Tuple[np.ndarray, np.ndarray]:
        stop = min(start + REPLICATE_BLOCK, n_reps)
        u = np.empty((stop - start, n_fish))
        w = np.empty((stop - start, n_fish))
        for i, r in enumerate(range(start, stop)):
            rng = np.random.default_rng(seed + r)
            u[i] = rng.standard_normal(n_fish)
            w[i] = rng.standard_normal(n_fish)
        v = model.rho * u + np.sqrt(1.0 - model.rho ** 2) * w
        liver = stats.gamma.ppf(special.ndtr(u), model.a1, scale=1.0 / model.b1)
        fish = stats.gamma.ppf(special.ndtr(v), model.a2, scale=1.0 / model.b2)
        return _ind_index(liver, fish), _bulk_index(liver, fish)

    parts = parallel_map(block, range(0, n_reps, REPLICATE_BLOCK))
    sim = CopulaSimulation(hsi_ind=np.concatenate([p[0] for p in parts]),
                           hsi_bulk=np.concatenate([p[1] for p in parts]),
                           n_fish=n_fish, seed=seed)
    logging.info(f"Simulated {n_reps} replicates of {n_fish} fish")
    return sim


def index_correlation(sim: CopulaSimulation) -> float:
    return float(stats.pearsonr(sim.hsi_ind, sim.hsi_bulk)[0])


@dataclass(frozen=True)
class TranslationLine:
    """hsi_bulk ~ intercept + slope * hsi_ind."""
    intercept: float
    slope: float
    r_value: float

    def to_dict(self) -> Dict:
        return {"intercept": self.intercept, "slope": self.slope, "r_value": self.r_value}


def translation_from_simulation(sim: CopulaSimulation) -> TranslationLine:
    if sim.n_reps < 3 or not np.std(sim.hsi_ind) > 0:
        raise DegenerateError("Simulated per-fish index has no variance")
    fit = stats.linregress(sim.hsi_ind, sim.hsi_bulk)
    return TranslationLine(intercept=float(fit.intercept), slope=float(fit.slope), r_value=float(fit.rvalue))


def translation(model: CopulaModel, n_fish: int = 1000, n_reps: int = 5000, seed: int = 0) -> TranslationLine:
    """Least-squares line of simulated bulk index on simulated per-fish index across replicates."""
    if n_reps < 100:
        raise ValueError(f"translation needs at least 100 replicates, got {n_reps}")
    line = translation_from_simulation(simulate_copula(model, n_fish, n_reps, seed))
    logging.info(f"Translation line: bulk = {line.intercept:.4f} + {line.slope:.4f} * ind")
    return line


def apply_translation(line: TranslationLine, hsi_ind_values) -> np.ndarray:
    """Convert per-fish indices to bulk-scale estimates."""
    return line.intercept + line.slope * np.asarray(hsi_ind_values, dtype=float)
