"""Scenario files: a JSON document mapped onto :class:`ScenarioConfig` plus a target spec.

Example::

    {
      "costs": {"solar_usd_per_kw": 700, "wind_usd_per_kw": 1100,
                "battery_energy_usd_per_kwh": 200, "battery_power_usd_per_kw": 800},
      "econ": {"wacc": 0.025, "lifetime_years": 20, "fx_rs_per_usd": 70},
      "storage": {"roundtrip_efficiency": 0.75, "duration_hours": 4,
                  "initial_soc_fraction": 0.5},
      "target": {"kind": "baseload", "peak_mw": 100},
      "availability": 1.0,
      "epsilon_mw": 0.0
    }
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path

from .economics import CostParams, EconomicParams
from .model import ScenarioConfig, StorageParams
from .timeseries import (HourlySeries, ResourceSet, baseload_profile, load_series,
                         synth_flexible_profile)

TARGET_KINDS = ("baseload", "flexible", "file")
TOP_KEYS = {"costs", "econ", "storage", "target", "availability", "epsilon_mw", "milp_horizon_cap"}


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class TargetSpec:
    kind: str = "baseload"
    peak_mw: float = 100.0
    solar_share: float = 0.5
    wind_share: float = 0.5
    path: str | None = None

    def __post_init__(self):
        if self.kind not in TARGET_KINDS:
            raise ConfigError(f"target.kind must be one of {TARGET_KINDS}")
        if self.kind == "file" and not self.path:
            raise ConfigError("target.kind 'file' needs target.path")

    def build(self, resources: ResourceSet, grid: ResourceSet | None = None) -> HourlySeries:
        """Target series matching ``resources`` in length.

        Flexible profiles back down against ``grid`` (statewide output),
        which defaults to the plant's own resource.
        """
        T = len(resources)
        hpy = resources.solar.hours_per_year
        if self.kind == "baseload":
            return baseload_profile(self.peak_mw, T, hpy)
        if self.kind == "flexible":
            g = grid or resources
            return synth_flexible_profile(g.solar, g.wind, self.solar_share, self.wind_share,
                                          self.peak_mw)
        s = load_series(self.path, "target_mw")
        if len(s) != T:
            raise ConfigError(f"target file has {len(s)} hours, resources have {T}")
        return s.replace(hours_per_year=hpy)


def _section(doc, key, cls, rename=None):
    raw = dict(doc.get(key, {}) or {})
    for old, new in (rename or {}).items():
        if old in raw:
            raw[new] = raw.pop(old)
    fields = set(cls.__dataclass_fields__)
    extra = set(raw) - fields
    if extra:
        raise ConfigError(f"unknown keys in '{key}': {sorted(extra)}")
    try:
        return cls(**raw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"section '{key}': {exc}") from None


def parse_config(doc: dict) -> tuple[ScenarioConfig, TargetSpec]:
    extra = set(doc) - TOP_KEYS
    if extra:
        raise ConfigError(f"unknown top-level keys: {sorted(extra)}")
    econ_raw = dict(doc.get("econ", {}) or {})
    costs_raw = dict(doc.get("costs", {}) or {})
    # the exchange rate lives under econ in files but travels with the costs
    if "fx_rs_per_usd" in econ_raw:
        costs_raw["fx_rs_per_usd"] = econ_raw.pop("fx_rs_per_usd")
    costs = _section({"costs": costs_raw}, "costs", CostParams)
    econ = _section({"econ": econ_raw}, "econ", EconomicParams)
    storage = _section(doc, "storage", StorageParams)
    target = _section(doc, "target", TargetSpec)
    kw = {}
    for k in ("availability", "epsilon_mw", "milp_horizon_cap"):
        if k in doc:
            kw[k] = doc[k]
    try:
        cfg = ScenarioConfig(costs=costs, econ=econ, storage=storage, **kw)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return cfg, target


def load_config(path) -> tuple[ScenarioConfig, TargetSpec]:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except FileNotFoundError:
        raise ConfigError(f"no such config file: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from None
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: top level must be an object")
    cfg, target = parse_config(doc)
    if target.path and not Path(target.path).is_absolute():
        target = TargetSpec(target.kind, target.peak_mw, target.solar_share, target.wind_share,
                            str(path.parent / target.path))
    return cfg, target


def config_document(cfg: ScenarioConfig, target: TargetSpec | None = None) -> dict:
    """The inverse of :func:`parse_config`, for echoing inputs into reports."""
    costs = asdict(cfg.costs)
    fx = costs.pop("fx_rs_per_usd")
    doc = {"costs": costs, "econ": {**asdict(cfg.econ), "fx_rs_per_usd": fx},
           "storage": asdict(cfg.storage), "availability": cfg.availability,
           "epsilon_mw": cfg.epsilon_mw}
    if target is not None:
        doc["target"] = {k: v for k, v in asdict(target).items() if v is not None}
    return doc
