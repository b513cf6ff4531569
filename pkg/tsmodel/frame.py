"""
Frame module for the hjortic engine.
Annual time-series data model: ingestion, alignment, lagging,
standardization, correlation and missing-value bookkeeping.
"""
import logging
import os
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from .errors import DataFormatError, DegenerateError, InsufficientDataError

# Cells treated as missing (compared case-insensitively after stripping)
MISSING_SENTINELS = {"", "na", "nan"}

CSV_DIGITS = 12


def _readonly(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class Series:
    """
    One annual series. Years are consecutive; gaps are masked entries.

    Masked entries always hold NaN in `values`.
    """
    name: str
    start_year: int
    values: np.ndarray
    mask: Optional[np.ndarray] = None

    def __post_init__(self):
        values = np.array(self.values, dtype=float).reshape(-1)
        if self.mask is None:
            mask = np.isnan(values)
        else:
            mask = np.array(self.mask, dtype=bool).reshape(-1)
            if mask.shape != values.shape:
                raise ValueError(
                    f"Series '{self.name}': values and mask lengths differ "
                    f"({values.size} vs {mask.size})")
            mask = mask | np.isnan(values)
        if values.size < 1:
            raise ValueError(f"Series '{self.name}' must have at least one entry")
        values[mask] = np.nan
        object.__setattr__(self, "start_year", int(self.start_year))
        object.__setattr__(self, "values", _readonly(values))
        object.__setattr__(self, "mask", _readonly(mask))

    @property
    def length(self) -> int:
        return int(self.values.size)

    def __len__(self):
        return self.length

    @property
    def end_year(self) -> int:
        return self.start_year + self.length - 1

    @property
    def years(self) -> np.ndarray:
        return np.arange(self.start_year, self.end_year + 1)

    @property
    def observed_count(self) -> int:
        return int((~self.mask).sum())

    def observed(self) -> Tuple[np.ndarray, np.ndarray]:
        """Return (years, values) of the unmasked entries."""
        keep = ~self.mask
        return self.years[keep], self.values[keep]

    def value_at(self, year: int) -> float:
        """Value at a year, NaN when masked or outside the series."""
        i = int(year) - self.start_year
        if 0 <= i < self.length:
            return float(self.values[i])
        return float("nan")

    def reindex(self, start_year: int, end_year: int) -> "Series":
        """Return the series on [start_year, end_year], padding with masked entries."""
        if end_year < start_year:
            raise ValueError(f"Empty year range {start_year}..{end_year}")
        out = np.full(end_year - start_year + 1, np.nan)
        lo = max(start_year, self.start_year)
        hi = min(end_year, self.end_year)
        if lo <= hi:
            out[lo - start_year:hi - start_year + 1] = \
                self.values[lo - self.start_year:hi - self.start_year + 1]
        return Series(self.name, start_year, out)

    def renamed(self, name: str) -> "Series":
        return Series(name, self.start_year, self.values, self.mask)


@dataclass(frozen=True, eq=False)
class Frame:
    """
    Aligned collection of annual series sharing one year span.

    Construction pads every member to the union span.
    """
    series: Mapping[str, Series]
    span: Tuple[int, int] = field(init=False)

    def __post_init__(self):
        members = dict(self.series)
        if not members:
            raise ValueError("Frame needs at least one series")
        start = min(s.start_year for s in members.values())
        end = max(s.end_year for s in members.values())
        aligned = {}
        for name, s in members.items():
            if s.name != name:
                s = s.renamed(name)
            aligned[name] = s.reindex(start, end)
        object.__setattr__(self, "series", MappingProxyType(aligned))
        object.__setattr__(self, "span", (start, end))

    @classmethod
    def of(cls, *series: Series) -> "Frame":
        return cls({s.name: s for s in series})

    @classmethod
    def from_arrays(cls, start_year: int, **arrays: Sequence[float]) -> "Frame":
        """Build a frame from plain arrays (NaN marks missing)."""
        return cls({name: Series(name, start_year, np.asarray(values, dtype=float))
                    for name, values in arrays.items()})

    @property
    def start_year(self) -> int:
        return self.span[0]

    @property
    def end_year(self) -> int:
        return self.span[1]

    @property
    def length(self) -> int:
        return self.span[1] - self.span[0] + 1

    @property
    def years(self) -> np.ndarray:
        return np.arange(self.span[0], self.span[1] + 1)

    @property
    def names(self) -> List[str]:
        return list(self.series.keys())

    def __getitem__(self, name: str) -> Series:
        try:
            return self.series[name]
        except KeyError:
            raise KeyError(f"Frame has no series '{name}' (available: {self.names})") from None

    def __contains__(self, name: str) -> bool:
        return name in self.series

    def values(self, name: str) -> np.ndarray:
        return self[name].values

    def complete_rows(self, names: Optional[Iterable[str]] = None) -> np.ndarray:
        """Rows where none of the named series (default: all) is masked."""
        names = self.names if names is None else list(names)
        complete = np.ones(self.length, dtype=bool)
        for name in names:
            complete &= ~self[name].mask
        return complete

    def truncate(self, end_year: int) -> "Frame":
        """Frame restricted to years up to end_year."""
        end_year = min(int(end_year), self.end_year)
        return Frame({name: s.reindex(self.start_year, end_year) for name, s in self.series.items()})

    def with_series(self, s: Series) -> "Frame":
        members = dict(self.series)
        members[s.name] = s
        return Frame(members)


def load_csv(path: str, year_column: str = "year",
             value_columns: Optional[Sequence[str]] = None) -> Frame:
    """
    Load annual series from a CSV file.

    Args:
        path: CSV path (UTF-8, header row, one row per year)
        year_column: Name of the year column
        value_columns: Columns to load (default: every other column)

    Returns:
        Frame with one Series per value column; gaps padded with masked rows
    """
    if not os.path.exists(path):
        raise FileNotFoundError(f"Input file not found: {path}")
    try:
        table = pd.read_csv(path, dtype=str, keep_default_na=False, encoding="utf-8")
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
        raise DataFormatError(f"Cannot parse {path}: {e}") from e

    table.columns = [str(c).strip() for c in table.columns]
    if year_column not in table.columns:
        raise DataFormatError(f"Missing year column in {path}", column=year_column)
    if value_columns is None:
        value_columns = [c for c in table.columns if c != year_column]
    for column in value_columns:
        if column not in table.columns:
            raise DataFormatError(f"Missing value column in {path}", column=column)
    if len(table) == 0:
        raise DataFormatError(f"No data rows in {path}")

    years: List[int] = []
    for i, cell in enumerate(table[year_column]):
        row = i + 2  # header is line 1
        try:
            year = int(str(cell).strip())
        except ValueError:
            raise DataFormatError(f"Unparseable year '{cell}'", row=row, column=year_column) from None
        if years and year == years[-1]:
            raise DataFormatError(f"Duplicate year {year}", row=row, column=year_column)
        if years and year < years[-1]:
            raise DataFormatError(f"Years not increasing at {year}", row=row, column=year_column)
        years.append(year)

    first, last = years[0], years[-1]
    offsets = np.asarray(years) - first
    members: Dict[str, Series] = {}
    for column in value_columns:
        values = np.full(last - first + 1, np.nan)
        for i, cell in enumerate(table[column]):
            text = str(cell).strip()
            if text.lower() in MISSING_SENTINELS:
                continue
            try:
                values[offsets[i]] = float(text)
            except ValueError:
                raise DataFormatError(f"Unparseable numeric cell '{cell}'",
                                      row=i + 2, column=column) from None
        members[column] = Series(column, first, values)

    padded = (last - first + 1) - len(years)
    if padded:
        logging.info(f"Padded {padded} missing year(s) in {path}")
    logging.info(f"Loaded {len(members)} series from {path}, years {first}-{last}")
    return Frame(members)


def write_csv(frame: Frame, path: str, year_column: str = "year", digits: int = CSV_DIGITS):
    """Write a frame as CSV with `digits` significant digits; masked cells become NA."""
    table = pd.DataFrame({year_column: frame.years})
    for name in frame.names:
        table[name] = frame.values(name)
    table.to_csv(path, index=False, float_format=f"%.{digits}g", na_rep="NA", encoding="utf-8")
    logging.debug(f"Wrote {len(frame.names)} series to {path}")


def lag(s: Series, k: int) -> Series:
    """
    Shift a series forward by k years on the same year indexing.

    The entry at year y equals s at year y-k; the first k entries are masked.
    """
    if k < 0:
        raise ValueError(f"Lag must be non-negative, got {k}")
    if k >= s.length:
        raise ValueError(f"Lag {k} must be smaller than series length {s.length}")
    if k == 0:
        return s
    values = np.full(s.length, np.nan)
    values[k:] = s.values[:s.length - k]
    return Series(s.name, s.start_year, values)


def difference(s: Series) -> Series:
    """First differences; the first entry is masked."""
    values = np.full(s.length, np.nan)
    values[1:] = np.diff(s.values)
    return Series(s.name, s.start_year, values)


def standardize(s: Series) -> Series:
    """Rescale unmasked entries to sample mean 0 and sample sd 1."""
    _, observed = s.observed()
    if observed.size < 2:
        raise InsufficientDataError(f"Series '{s.name}' needs at least 2 observed values to standardize")
    sd = observed.std(ddof=1)
    if not sd > 0:
        raise DegenerateError(f"Series '{s.name}' has zero variance")
    return Series(s.name, s.start_year, (s.values - observed.mean()) / sd)


def correlate(a: Series, b: Series) -> float:
    """Pearson correlation over jointly unmasked years (pairwise-complete)."""
    start = max(a.start_year, b.start_year)
    end = min(a.end_year, b.end_year)
    if end < start:
        raise InsufficientDataError(f"Series '{a.name}' and '{b.name}' do not overlap")
    x = a.reindex(start, end)
    y = b.reindex(start, end)
    both = ~(x.mask | y.mask)
    if both.sum() < 3:
        raise InsufficientDataError(
            f"Need at least 3 complete pairs to correlate '{a.name}' and '{b.name}', got {int(both.sum())}")
    xa = x.values[both] - x.values[both].mean()
    yb = y.values[both] - y.values[both].mean()
    sxx = np.sum(xa * xa)
    syy = np.sum(yb * yb)
    if sxx == 0 or syy == 0:
        raise DegenerateError(f"Zero variance when correlating '{a.name}' and '{b.name}'")
    r = np.sum(xa * yb) / np.sqrt(sxx * syy)
    return float(np.clip(r, -1.0, 1.0))


def longest_unmasked_block(s: Series) -> Series:
    """Longest run of consecutive unmasked entries (earliest wins ties)."""
    best_start, best_len = 0, 0
    run_start = None
    for i, missing in enumerate(np.append(s.mask, True)):
        if not missing and run_start is None:
            run_start = i
        elif missing and run_start is not None:
            if i - run_start > best_len:
                best_start, best_len = run_start, i - run_start
            run_start = None
    if best_len == 0:
        raise InsufficientDataError(f"Series '{s.name}' has no observed values")
    return Series(s.name, s.start_year + best_start, s.values[best_start:best_start + best_len])
