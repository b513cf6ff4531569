"""
Synthetic data for demos and tests, and the Kola winter-average aggregation.
"""
import logging
from typing import Callable, Dict, Optional

import numpy as np
import pandas as pd

from liver.hsicopula import CopulaModel, sample_pairs
from tsmodel import argauss
from tsmodel.argauss import ArxFit, ArxSpec
from tsmodel.errors import DataFormatError, InsufficientDataError
from tsmodel.frame import Frame, Series
from tsmodel.tvar import TvarSpec, simulate_tvar

WINTER_MONTHS = (10, 11, 12, 1, 2, 3)
# liver (margin 1) and fish weight (margin 2), gamma shape/rate, copula correlation
SKREI_COPULA = CopulaModel(a1=2.51, b1=6.52, a2=3.99, b2=0.63, rho=0.83)

DEFAULT_LENGTHS = {
    "ar1": 154, "ar2": 154, "trend-ar2": 154, "joint": 35, "break": 100,
    "tvar": 200, "pairs": 1000, "kola-monthly": 60,
}
DEFAULT_STARTS = {
    "ar1": 1859, "ar2": 1859, "trend-ar2": 1859, "joint": 1980, "break": 1900,
    "tvar": 1801, "kola-monthly": 1951,
}


def _frame_table(frame: Frame) -> pd.DataFrame:
    table = pd.DataFrame({"year": frame.years})
    for name in frame.names:
        table[name] = frame.values(name)
    return table


def _ar(n: int, seed: int, start: int, intercept: float, rho, sigma: float,
        trend: float = 0.0, name: str = "hsi") -> Series:
    spec = ArxSpec(response=name, include_linear_trend=bool(trend), ar_order=len(rho))
    beta = [intercept, trend] if trend else [intercept]
    return argauss.simulate(ArxFit.from_params(spec, beta, rho, sigma), None, n, seed, start_year=start)


def synth_ar1(n: int, seed: int, start: int) -> pd.DataFrame:
    return _frame_table(Frame.of(_ar(n, seed, start, 5.9, [0.6], 1.0)))


def synth_ar2(n: int, seed: int, start: int) -> pd.DataFrame:
    return _frame_table(Frame.of(_ar(n, seed, start, 5.9, [0.5, 0.2], 1.0)))


def synth_trend_ar2(n: int, seed: int, start: int) -> pd.DataFrame:
    return _frame_table(Frame.of(_ar(n, seed, start, 5.9, [0.5, 0.2], 1.0, trend=-0.02)))


def synth_joint(n: int, seed: int, start: int) -> pd.DataFrame:
    """Response hsi driven by lagged kola temperature, length, mortality and capelin."""
    rng = np.random.default_rng(seed)
    seeds = rng.integers(0, 2 ** 31 - 1, size=5)
    first = start - 1
    covariates = Frame.of(
        _ar(n + 1, int(seeds[0]), first, 3.9, [0.5], 0.5, name="kola"),
        _ar(n + 1, int(seeds[1]), first, 60.0, [0.7], 2.0, trend=0.2, name="length"),
        _ar(n + 1, int(seeds[2]), first, 0.6, [0.8], 0.1, name="mortality"),
        _ar(n + 1, int(seeds[3]), first, 2.0, [0.4], 0.8, name="capelin"),
    )
    spec = ArxSpec(response="hsi", regressors=(("kola", 1), ("length", 0), ("mortality", 0), ("capelin", 0)),
                   ar_order=1)
    truth = ArxFit.from_params(spec, [1.5, 0.6, 0.03, -1.0, 0.1], [0.4], 0.6)
    hsi = argauss.simulate(truth, covariates, n, int(seeds[4]), start_year=start)
    return _frame_table(covariates.with_series(hsi))


def synth_break(n: int, seed: int, start: int) -> pd.DataFrame:
    """AR(1) with a level shift of three innovation sds after 60% of the span."""
    s = _ar(n, seed, start, 5.9, [0.5], 1.0)
    values = np.array(s.values)
    values[int(0.6 * n):] += 3.0
    return _frame_table(Frame.of(Series(s.name, s.start_year, values)))


def synth_tvar(n: int, seed: int, start: int) -> pd.DataFrame:
    """tvAR(1) with constant coefficient 0.5 and scale rising from 1 to 2."""
    spec = TvarSpec(order=1, alpha_fns=(lambda u: -0.5,), sigma_fn=lambda u: 1.0 + u)
    return _frame_table(Frame.of(simulate_tvar(spec, n, seed, start_year=start, name="tvar")))


def synth_pairs(n: int, seed: int, start: int) -> pd.DataFrame:
    pairs = sample_pairs(SKREI_COPULA, n, seed)
    return pd.DataFrame({"liver_kg": pairs.liver_kg, "fish_kg": pairs.fish_kg})


def synth_kola_monthly(n: int, seed: int, start: int) -> pd.DataFrame:
    """Monthly sea temperatures: seasonal cycle plus an AR(1) annual anomaly."""
    rng = np.random.default_rng(seed)
    anomaly = _ar(n, int(rng.integers(0, 2 ** 31 - 1)), start, 0.0, [0.6], 0.5).values
    months = np.tile(np.arange(1, 13), n)
    years = np.repeat(np.arange(start, start + n), 12)
    seasonal = 3.9 + 2.5 * np.cos(2 * np.pi * (months - 8) / 12)
    temp = seasonal + np.repeat(anomaly, 12) + 0.3 * rng.standard_normal(12 * n)
    return pd.DataFrame({"year": years, "month": months, "temp": temp})


SYNTH_MODELS: Dict[str, Callable[[int, int, int], pd.DataFrame]] = {
    "ar1": synth_ar1,
    "ar2": synth_ar2,
    "trend-ar2": synth_trend_ar2,
    "joint": synth_joint,
    "break": synth_break,
    "tvar": synth_tvar,
    "pairs": synth_pairs,
    "kola-monthly": synth_kola_monthly,
}


def synthesize(model: str, n: Optional[int] = None, seed: int = 0,
               start_year: Optional[int] = None) -> pd.DataFrame:
    """
    Generate a synthetic table.

    Args:
        model: One of SYNTH_MODELS
        n: Number of years (pairs for 'pairs'); model default when None
        seed: Random seed
        start_year: First year; model default when None

    Returns:
        DataFrame ready for CSV output
    """
    if model not in SYNTH_MODELS:
        raise ValueError(f"Unknown synth model '{model}' (expected one of {sorted(SYNTH_MODELS)})")
    n = DEFAULT_LENGTHS[model] if n is None else int(n)
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    start = DEFAULT_STARTS.get(model, 0) if start_year is None else int(start_year)
    table = SYNTH_MODELS[model](n, seed, start)
    logging.info(f"Synthesized '{model}': {len(table)} rows, seed {seed}")
    return table


def load_monthly(path: str, year_column: str = "year", month_column: str = "month",
                 value_column: str = "temp") -> pd.DataFrame:
    """Read a monthly CSV with year, month and value columns."""
    try:
        table = pd.read_csv(path, encoding="utf-8")
    except FileNotFoundError:
        raise FileNotFoundError(f"Input file not found: {path}") from None
    for column in (year_column, month_column, value_column):
        if column not in table.columns:
            raise DataFormatError(f"Monthly file {path} lacks column '{column}'", column=column)
    table = table[[year_column, month_column, value_column]].rename(
        columns={year_column: "year", month_column: "month", value_column: "value"})
    for column in ("year", "month", "value"):
        table[column] = pd.to_numeric(table[column], errors="coerce")
    bad = table[["year", "month"]].isna().any(axis=1) | ~table["month"].isin(range(1, 13))
    if bad.any():
        row = int(np.flatnonzero(bad.to_numpy())[0])
        raise DataFormatError(f"Invalid year/month in {path}", row=row + 2, column=month_column)
    dup = table.duplicated(["year", "month"])
    if dup.any():
        row = int(np.flatnonzero(dup.to_numpy())[0])
        raise DataFormatError(f"Duplicate year/month in {path}", row=row + 2, column=month_column)
    return table.astype({"year": int, "month": int})


def kola_winter(monthly: pd.DataFrame, name: str = "kola") -> Series:
    """
    Winter averages: for year y, the mean of October-December of y - 1 and
    January-March of y. Winters missing any of the six months are masked.

    Args:
        monthly: Table with integer year, month and float value columns
        name: Name of the returned series

    Returns:
        Annual Series spanning the first to last winter touched by the data
    """
    table = monthly[monthly["month"].isin(WINTER_MONTHS)].dropna(subset=["value"])
    if table.empty:
        raise InsufficientDataError("No winter months observed")
    winter = table["year"] + (table["month"] >= 10).astype(int)
    grouped = table.groupby(winter)["value"].agg(["mean", "count"])
    start, end = int(grouped.index.min()), int(grouped.index.max())
    years = np.arange(start, end + 1)
    values = np.full(years.size, np.nan)
    complete = grouped[grouped["count"] == len(WINTER_MONTHS)]
    values[complete.index.to_numpy() - start] = complete["mean"].to_numpy()
    incomplete = sorted(set(grouped.index) - set(complete.index))
    if incomplete:
        logging.warning(f"Winters with fewer than six months masked: {incomplete}")
    return Series(name, start, values)
