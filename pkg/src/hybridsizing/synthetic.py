"""Deterministic synthetic resource fixtures: diurnal solar and monsoon-seasonal wind."""
from __future__ import annotations

import numpy as np

from .timeseries import HOURS_PER_YEAR, MEGAWATT, HourlySeries, ResourceSet


def solar_year(rng, hours=HOURS_PER_YEAR, cf=0.19):
    h = np.arange(hours)
    hod = h % 24
    doy = h // 24
    shape = np.clip(np.sin(np.pi * (hod - 6) / 12.0), 0.0, None)
    # monsoon clouds cut output mid-year
    season = 1.0 - 0.35 * np.exp(-(((doy - 200) / 45.0) ** 2))
    days = hours // 24 + 1
    cloud = np.repeat(np.clip(rng.normal(1.0, 0.18, days), 0.15, 1.25), 24)[:hours]
    raw = shape * season * cloud
    return np.clip(raw * cf / raw.mean(), 0.0, 1.0)


def wind_year(rng, hours=HOURS_PER_YEAR, cf=0.30, lull_days=((30, 5),)):
    h = np.arange(hours)
    doy = h // 24
    season = 0.35 + 1.6 * np.exp(-(((doy - 195) / 40.0) ** 2))
    # AR(1) weather noise
    e = rng.normal(0.0, 0.35, hours)
    noise = np.empty(hours)
    acc = 0.0
    for i in range(hours):
        acc = 0.97 * acc + e[i] * np.sqrt(1 - 0.97 ** 2)
        noise[i] = acc
    raw = season * np.exp(0.6 * noise)
    for start, length in lull_days:
        a, b = start * 24, min(hours, (start + length) * 24)
        raw[a:b] *= 0.05
    return np.clip(raw * cf / raw.mean(), 0.0, 1.0)


def resource_fixture(n_years=1, seed=0, solar_cf=0.19, wind_cf=0.30, perturb=0.0,
                     label="synthetic") -> ResourceSet:
    """``n_years`` of hourly data. Years differ through the weather draws.

    ``perturb`` > 0 multiplies every hour by ``1 + U(-perturb, perturb)``
    (clipped to [0, 1]) on top of the per-year draws.
    """
    rng = np.random.default_rng(seed)
    s, w = [], []
    for _ in range(n_years):
        s.append(solar_year(rng, cf=solar_cf))
        w.append(wind_year(rng, cf=wind_cf))
    s, w = np.concatenate(s), np.concatenate(w)
    if perturb:
        s = np.clip(s * (1 + rng.uniform(-perturb, perturb, s.size)), 0.0, 1.0)
        w = np.clip(w * (1 + rng.uniform(-perturb, perturb, w.size)), 0.0, 1.0)
    return ResourceSet(HourlySeries(s, label="solar"), HourlySeries(w, label="wind"), label)


def desk_instance():
    """Two hours: sun only in the first, 10 MW wanted in both."""
    res = ResourceSet(HourlySeries([1.0, 0.0], hours_per_year=2, label="solar"),
                      HourlySeries([0.0, 0.0], hours_per_year=2, label="wind"), "desk")
    target = HourlySeries([10.0, 10.0], unit=MEGAWATT, hours_per_year=2, label="target")
    return res, target


def small_instance(hours=24, seed=0, peak=10.0):
    """Short horizon with random but structured resources, for oracle tests."""
    rng = np.random.default_rng(seed)
    h = np.arange(hours)
    solar = np.clip(np.sin(np.pi * ((h % 24) - 6) / 12.0), 0.0, None) * rng.uniform(0.5, 1.0, hours)
    wind = np.clip(rng.uniform(0.0, 0.8, hours) * (0.5 + 0.5 * np.cos(h / 5.0)), 0.0, 1.0)
    tgt = np.full(hours, peak) * rng.uniform(0.6, 1.0, hours)
    return (ResourceSet(HourlySeries(solar, hours_per_year=hours), HourlySeries(wind, hours_per_year=hours), "small"),
            HourlySeries(tgt, unit=MEGAWATT, hours_per_year=hours, label="target"))
