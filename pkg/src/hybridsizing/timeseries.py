"""Hourly resource and target series: ingest, scaling, synthesis and summaries."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

HOURS_PER_YEAR = 8760
NORMALIZED_CF = "normalized-cf"
MEGAWATT = "megawatt"
UNITS = (NORMALIZED_CF, MEGAWATT)

# hours [4000, 6000) cover the south-west monsoon in a calendar year
MONSOON_WINDOW = (4000, 6000)
SEASONALITY_INF = math.inf

RESOURCE_HEADER = ["hour", "solar_cf", "wind_cf"]
TARGET_HEADER = ["hour", "target_mw"]


class SeriesError(ValueError):
    pass


def _check_values(values, unit, label=""):
    if unit not in UNITS:
        raise SeriesError(f"unknown unit {unit!r}")
    bad = ~np.isfinite(values)
    if bad.any():
        raise SeriesError(f"{label}: non-finite value at index {int(np.argmax(bad))}")
    if (values < 0).any():
        raise SeriesError(f"{label}: negative value at index {int(np.argmax(values < 0))}")
    if unit == NORMALIZED_CF and (values > 1.0).any():
        raise SeriesError(f"{label}: capacity factor above 1 at index {int(np.argmax(values > 1.0))}")


@dataclass(frozen=True, eq=False)
class HourlySeries:
    """Fixed-step hourly values. The array is stored read-only."""

    values: np.ndarray
    unit: str = NORMALIZED_CF
    hours_per_year: int = HOURS_PER_YEAR
    label: str = ""

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim != 1 or v.size == 0:
            raise SeriesError("series must be a non-empty 1-D sequence")
        _check_values(v, self.unit, self.label)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __len__(self):
        return self.values.size

    def __eq__(self, other):
        if not isinstance(other, HourlySeries):
            return NotImplemented
        return (self.unit == other.unit and self.hours_per_year == other.hours_per_year
                and np.array_equal(self.values, other.values))

    __hash__ = None

    @property
    def n_years(self) -> int:
        if len(self) % self.hours_per_year:
            raise SeriesError(f"length {len(self)} is not a whole number of years")
        return len(self) // self.hours_per_year

    def year(self, k: int) -> np.ndarray:
        if not 0 <= k < self.n_years:
            raise SeriesError(f"year index {k} outside 0..{self.n_years - 1}")
        h = self.hours_per_year
        return self.values[k * h:(k + 1) * h]

    def replace(self, values=None, **kw):
        args = dict(values=self.values if values is None else values, unit=self.unit,
                    hours_per_year=self.hours_per_year, label=self.label)
        args.update(kw)
        return HourlySeries(**args)

    def scaled(self, k: float) -> "HourlySeries":
        return self.replace(self.values * k)

    def window(self, start: int, stop: int) -> "HourlySeries":
        return self.replace(self.values[start:stop])


@dataclass(frozen=True)
class ResourceSet:
    solar: HourlySeries
    wind: HourlySeries
    site_label: str = ""

    def __post_init__(self):
        if len(self.solar) != len(self.wind):
            raise SeriesError("solar and wind series differ in length")
        for s in (self.solar, self.wind):
            if s.unit != NORMALIZED_CF:
                raise SeriesError("resource series must be normalized capacity factors")

    def __len__(self):
        return len(self.solar)

    def window(self, start, stop):
        return ResourceSet(self.solar.window(start, stop), self.wind.window(start, stop),
                           self.site_label)


# --- file formats ---------------------------------------------------------

def _read_rows(path: Path):
    if not path.is_file():
        raise FileNotFoundError(f"no such series file: {path}")
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise SeriesError(f"{path}: empty file")
        yield [h.strip() for h in header]
        for lineno, row in enumerate(reader, start=2):
            if row:
                yield lineno, row


def load_series(path, column: str, unit: str | None = None, label: str | None = None) -> HourlySeries:
    """Read one column of a resource or target CSV.

    The unit defaults to megawatt for ``target_mw`` and normalized CF
    otherwise. Errors name the 1-based line of the offending row.
    """
    path = Path(path)
    rows = _read_rows(path)
    header = next(rows)
    if column not in header:
        raise SeriesError(f"{path}: no column {column!r} in header {header}")
    if header[0] != "hour":
        raise SeriesError(f"{path}: first column must be 'hour'")
    unit = unit or (MEGAWATT if column.endswith("_mw") else NORMALIZED_CF)
    col = header.index(column)
    out = []
    for lineno, row in rows:
        if len(row) != len(header):
            raise SeriesError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
        try:
            hour = int(row[0])
            v = float(row[col])
        except ValueError:
            raise SeriesError(f"{path}:{lineno}: malformed row {row!r}") from None
        if hour != len(out):
            raise SeriesError(f"{path}:{lineno}: hour {hour} out of sequence")
        if not math.isfinite(v) or v < 0 or (unit == NORMALIZED_CF and v > 1.0):
            raise SeriesError(f"{path}:{lineno}: value {row[col]} outside the legal range")
        out.append(v)
    if not out:
        raise SeriesError(f"{path}: no data rows")
    return HourlySeries(np.array(out), unit=unit, label=label or column)


def load_resources(path, site_label="") -> ResourceSet:
    return ResourceSet(load_series(path, "solar_cf"), load_series(path, "wind_cf"),
                       site_label or Path(path).stem)


def _fmt(v: float) -> str:
    # repr is the shortest string that round-trips the double exactly
    return repr(float(v))


def write_series(path, columns: dict):
    """Write ``{name: HourlySeries}`` as an ``hour,...`` CSV."""
    names = list(columns)
    arrays = [columns[n].values for n in names]
    n = len(arrays[0])
    if any(len(a) != n for a in arrays):
        raise SeriesError("columns differ in length")
    with Path(path).open("w", newline="") as fh:
        fh.write(",".join(["hour"] + names) + "\n")
        for h in range(n):
            fh.write(",".join([str(h)] + [_fmt(a[h]) for a in arrays]) + "\n")


def write_resources(path, res: ResourceSet):
    write_series(path, {"solar_cf": res.solar, "wind_cf": res.wind})


def write_target(path, target: HourlySeries):
    write_series(path, {"target_mw": target})


def drop_leap_days(timestamps, values):
    """Remove Feb-29 rows given ISO-like timestamps (``YYYY-MM-DD...``)."""
    keep = [not str(t)[5:10] == "02-29" for t in timestamps]
    return [v for v, k in zip(values, keep) if k]


# --- summaries and transforms ---------------------------------------------

def annual_cf(series: HourlySeries, year_index: int) -> float:
    return float(np.mean(series.year(year_index)))


def annual_cfs(series: HourlySeries) -> np.ndarray:
    h = series.hours_per_year
    return series.values.reshape(series.n_years, h).mean(axis=1)


def lower_median(values) -> float:
    v = np.sort(np.asarray(values, dtype=float))
    return float(v[(v.size - 1) // 2])


@dataclass(frozen=True)
class ScaledSeries:
    series: HourlySeries
    factor: float
    clipped: int


def scale_to_observed(multi_year: HourlySeries, target_cf: float) -> ScaledSeries:
    """Rescale so the median annual CF matches an observed CF; clip at nameplate."""
    if multi_year.unit != NORMALIZED_CF:
        raise SeriesError("scale_to_observed needs a normalized-cf series")
    if not 0.0 < target_cf <= 1.0:
        raise SeriesError("target_cf must lie in (0, 1]")
    med = lower_median(annual_cfs(multi_year))
    if med == 0.0:
        raise SeriesError("median annual capacity factor is zero")
    factor = target_cf / med
    if factor == 1.0:
        return ScaledSeries(multi_year, 1.0, 0)
    raw = multi_year.values * factor
    clipped = int(np.count_nonzero(raw > 1.0))
    return ScaledSeries(multi_year.replace(np.minimum(raw, 1.0)), factor, clipped)


def seasonality_ratio(series: HourlySeries, year_index: int | None = None) -> float:
    """Production inside the monsoon window over production in the rest of the year."""
    if year_index is None:
        if len(series) != series.hours_per_year:
            raise SeriesError("multi-year series needs a year_index")
        v = series.values
    else:
        v = series.year(year_index)
    a, b = MONSOON_WINDOW
    inside = float(np.sum(v[a:b]))
    outside = float(np.sum(v[:a]) + np.sum(v[b:]))
    if outside == 0.0:
        return SEASONALITY_INF
    return inside / outside


def synth_flexible_profile(solar: HourlySeries, wind: HourlySeries, solar_share: float,
                           wind_share: float, peak_mw: float) -> HourlySeries:
    """Coal output that backs down in proportion to grid solar and wind output."""
    if abs(solar_share + wind_share - 1.0) > 1e-9:
        raise SeriesError("solar_share + wind_share must equal 1")
    if solar_share < 0 or wind_share < 0:
        raise SeriesError("shares must be non-negative")
    if len(solar) != len(wind):
        raise SeriesError("solar and wind series differ in length")
    c = peak_mw - peak_mw * solar_share * solar.values - peak_mw * wind_share * wind.values
    c = np.clip(c, 0.0, peak_mw)
    return HourlySeries(c, unit=MEGAWATT, hours_per_year=solar.hours_per_year,
                        label="flexible")


def baseload_profile(peak_mw: float, hours: int, hours_per_year=HOURS_PER_YEAR) -> HourlySeries:
    return HourlySeries(np.full(hours, float(peak_mw)), unit=MEGAWATT,
                        hours_per_year=hours_per_year, label="baseload")


def average_sites(sites) -> ResourceSet:
    sites = list(sites)
    if not sites:
        raise SeriesError("no sites to average")
    n = len(sites[0])
    if any(len(s) != n for s in sites):
        raise SeriesError("sites differ in length")
    solar = np.mean([s.solar.values for s in sites], axis=0)
    wind = np.mean([s.wind.values for s in sites], axis=0)
    hpy = sites[0].solar.hours_per_year
    return ResourceSet(HourlySeries(solar, hours_per_year=hpy, label="solar"),
                       HourlySeries(wind, hours_per_year=hpy, label="wind"),
                       "average(" + ",".join(s.site_label for s in sites) + ")")


def tile_years(one_year: HourlySeries, n_years: int) -> HourlySeries:
    if len(one_year) != one_year.hours_per_year:
        raise SeriesError(f"expected a single year of {one_year.hours_per_year} hours")
    if n_years < 1:
        raise SeriesError("n_years must be >= 1")
    return one_year.replace(np.tile(one_year.values, n_years))


def fetch_series(*args, **kwargs) -> HourlySeries:
    """Fetch from a renewables-ninja style API; see :mod:`hybridsizing.ninja`."""
    from .ninja import fetch_series as _fetch
    return _fetch(*args, **kwargs)
