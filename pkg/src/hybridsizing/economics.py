"""Cost arithmetic for hybrid plants: CRF, capital cost, LCOE and derived metrics.

Money is carried as US dollars and energy as MWh; rupees per kWh only appear
at presentation time through :func:`to_rs_per_kwh`.
"""
from __future__ import annotations

import csv
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path


@dataclass(frozen=True)
class CostParams:
    solar_usd_per_kw: float = 700.0
    wind_usd_per_kw: float = 1100.0
    battery_energy_usd_per_kwh: float = 200.0
    battery_power_usd_per_kw: float = 800.0
    fx_rs_per_usd: float = 70.0

    def __post_init__(self):
        for k, v in asdict(self).items():
            if not (math.isfinite(v) and v >= 0):
                raise ValueError(f"{k} must be a finite non-negative number, got {v}")


@dataclass(frozen=True)
class EconomicParams:
    wacc: float = 0.025
    lifetime_years: int = 20

    def __post_init__(self):
        if self.lifetime_years < 1:
            raise ValueError("lifetime_years must be >= 1")
        if not self.wacc >= 0:
            raise ValueError("wacc must be >= 0")


@dataclass(frozen=True)
class AbatementParams:
    coal_cost_usd_per_mwh: float = 43.0
    ef_coal_t_per_mwh: float = 0.92
    ef_hybrid_t_per_mwh: float = 0.02

    def __post_init__(self):
        if not self.ef_coal_t_per_mwh > self.ef_hybrid_t_per_mwh >= 0:
            raise ValueError("need ef_coal > ef_hybrid >= 0")


@dataclass(frozen=True)
class ReplacementParams:
    year_of_replacement: int = 15
    future_system_usd_per_kwh: float = 250.0
    discount_rate: float = 0.08


# coal-side reference figures used by reports
COAL_TARGET_RS_PER_KWH = 3.0
HEALTH_BENEFIT_RS_PER_KWH = 0.73
CARBON_PRICE_THRESHOLDS = (20.0, 40.0, 60.0)


def crf(r: float, n: int) -> float:
    """Capital recovery factor ``r(1+r)^n / ((1+r)^n - 1)``; ``1/n`` at ``r = 0``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if r < 0:
        raise ValueError("r must be >= 0")
    if r == 0.0:
        return 1.0 / n
    # expm1/log1p keep precision for tiny rates
    g = math.expm1(n * math.log1p(r))
    return r * (g + 1.0) / g


def system_cost(design, costs: CostParams) -> float:
    """Up-front capital cost in USD; MW and MWh priced at 1000x the per-kW/kWh rates."""
    return 1000.0 * (design.solar_mw * costs.solar_usd_per_kw
                     + design.wind_mw * costs.wind_usd_per_kw
                     + design.battery_mwh * costs.battery_energy_usd_per_kwh
                     + design.battery_power_mw * costs.battery_power_usd_per_kw)


def annualized_cost(design, costs: CostParams, econ: EconomicParams) -> float:
    return crf(econ.wacc, econ.lifetime_years) * system_cost(design, costs)


def lcoe(design, costs: CostParams, econ: EconomicParams, annual_energy_mwh: float) -> float:
    """Levelized cost in $/MWh: annualized capital over annual delivered energy."""
    if not annual_energy_mwh > 0:
        raise ValueError("annual_energy_mwh must be positive")
    return annualized_cost(design, costs, econ) / annual_energy_mwh


def to_rs_per_kwh(usd_per_mwh: float, fx_rs_per_usd: float = 70.0) -> float:
    if not fx_rs_per_usd > 0:
        raise ValueError("fx must be positive")
    return usd_per_mwh * fx_rs_per_usd / 1000.0


def from_rs_per_kwh(rs_per_kwh: float, fx_rs_per_usd: float = 70.0) -> float:
    if not fx_rs_per_usd > 0:
        raise ValueError("fx must be positive")
    return rs_per_kwh * 1000.0 / fx_rs_per_usd


def abatement_cost(lcoe_hybrid_usd_per_mwh: float,
                   params: AbatementParams = AbatementParams()) -> float:
    """Cost per tonne of CO2 avoided when the hybrid displaces coal."""
    return ((lcoe_hybrid_usd_per_mwh - params.coal_cost_usd_per_mwh)
            / (params.ef_coal_t_per_mwh - params.ef_hybrid_t_per_mwh))


def lcoe_with_curtailment_value(annualized_cost_usd: float, annual_target_mwh: float,
                                annual_curtailed_mwh: float, value_fraction: float) -> float:
    """Price at which curtailed energy sold at ``value_fraction`` of it recovers the cost.

    Solving ``cost = p * E_target + value_fraction * p * E_curt`` for ``p``.
    """
    if not 0.0 <= value_fraction <= 1.0:
        raise ValueError("value_fraction must lie in [0, 1]")
    denom = annual_target_mwh + value_fraction * annual_curtailed_mwh
    if not denom > 0:
        raise ValueError("zero delivered energy")
    return annualized_cost_usd / denom


def lcoe_with_curtailment_credit(annualized_cost_usd: float, annual_target_mwh: float,
                                 annual_curtailed_mwh: float, credit_usd_per_mwh: float) -> float:
    """Variant where curtailed energy earns a fixed price instead of a share of the LCOE."""
    if not annual_target_mwh > 0:
        raise ValueError("zero delivered energy")
    return (annualized_cost_usd - credit_usd_per_mwh * annual_curtailed_mwh) / annual_target_mwh


def lcoe_with_replacement(design, costs: CostParams, econ: EconomicParams,
                          annual_energy_mwh: float, repl: ReplacementParams) -> float:
    """Base LCOE plus the annualized present value of a mid-life storage purchase."""
    if not 0 < repl.year_of_replacement < econ.lifetime_years:
        raise ValueError("replacement year must fall inside the plant lifetime")
    base = lcoe(design, costs, econ, annual_energy_mwh)
    if math.isinf(repl.discount_rate):
        return base
    pv = (design.battery_mwh * repl.future_system_usd_per_kwh * 1000.0
          / (1.0 + repl.discount_rate) ** repl.year_of_replacement)
    return base + crf(econ.wacc, econ.lifetime_years) * pv / annual_energy_mwh


def health_adjusted(lcoe_rs_per_kwh: float,
                    benefit_rs_per_kwh: float = HEALTH_BENEFIT_RS_PER_KWH) -> float:
    if benefit_rs_per_kwh < 0:
        raise ValueError("benefit must be >= 0")
    return lcoe_rs_per_kwh - benefit_rs_per_kwh


# coal fleet ---------------------------------------------------------------

OWNERSHIP = ("private", "state", "central")
FLEET_HEADER = ["name", "state", "capacity_mw", "commission_year", "ownership"]


@dataclass(frozen=True)
class CoalPlantRecord:
    name: str
    state: str
    capacity_mw: float
    commission_year: int
    ownership: str

    def __post_init__(self):
        if not self.capacity_mw > 0:
            raise ValueError(f"{self.name}: capacity_mw must be positive")
        if not 1950 <= self.commission_year <= 2030:
            raise ValueError(f"{self.name}: implausible commission year {self.commission_year}")
        if self.ownership not in OWNERSHIP:
            raise ValueError(f"{self.name}: ownership must be one of {OWNERSHIP}")


def load_fleet(path) -> list[CoalPlantRecord]:
    path = Path(path)
    fleet = []
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != FLEET_HEADER:
            raise ValueError(f"{path}: expected header {','.join(FLEET_HEADER)}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 5:
                raise ValueError(f"{path}:{lineno}: expected 5 fields, got {len(row)}")
            try:
                rec = CoalPlantRecord(row[0], row[1], float(row[2]), int(row[3]), row[4].strip())
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from None
            fleet.append(rec)
    return fleet


def write_fleet(fleet, path):
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(FLEET_HEADER)
        for p in fleet:
            w.writerow([p.name, p.state, repr(p.capacity_mw), p.commission_year, p.ownership])


@dataclass
class RetirementTimeline:
    lifetime_years: int
    phaseout_year: int
    retiring_by_year: dict = field(default_factory=dict)   # year -> {ownership: MW}
    stranded_fraction: float = 0.0
    stranded_mw: float = 0.0
    total_mw: float = 0.0


def retirement_timeline(fleet, lifetime_years: int = 40, phaseout_year: int = 2040):
    """Natural retirement schedule and capacity stranded by a phase-out year.

    A plant retires at ``commission_year + lifetime_years``; capacity whose
    retirement falls after the phase-out year counts as stranded.
    """
    fleet = list(fleet)
    if not fleet:
        raise ValueError("fleet is empty")
    by_year: dict[int, dict[str, float]] = {}
    total = stranded = 0.0
    for p in fleet:
        year = p.commission_year + lifetime_years
        slot = by_year.setdefault(year, {o: 0.0 for o in OWNERSHIP})
        slot[p.ownership] += p.capacity_mw
        total += p.capacity_mw
        if year > phaseout_year:
            stranded += p.capacity_mw
    ordered = {y: by_year[y] for y in sorted(by_year)}
    return RetirementTimeline(lifetime_years, phaseout_year, ordered,
                              stranded / total, stranded, total)
