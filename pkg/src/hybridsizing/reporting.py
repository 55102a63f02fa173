"""Economic report documents built from a sized design."""
from __future__ import annotations

from . import economics as eco
from .model import PlantDesign, ScenarioConfig

WACC_GRID = (0.025, 0.05, 0.10)
ALPHA_GRID = (0.0, 0.25, 0.5, 0.75, 1.0)


def economic_report(design: PlantDesign, config: ScenarioConfig, annual_target_mwh: float,
                    curtailed_mwh_per_year: float = 0.0,
                    abatement: eco.AbatementParams = eco.AbatementParams(),
                    replacement: eco.ReplacementParams | None = eco.ReplacementParams(),
                    health_benefit_rs_per_kwh: float = eco.HEALTH_BENEFIT_RS_PER_KWH) -> dict:
    fx = config.costs.fx_rs_per_usd
    base = eco.lcoe(design, config.costs, config.econ, annual_target_mwh)
    base_rs = eco.to_rs_per_kwh(base, fx)
    annualized = eco.annualized_cost(design, config.costs, config.econ)
    by_wacc = []
    for r in WACC_GRID:
        econ = eco.EconomicParams(r, config.econ.lifetime_years)
        l = eco.lcoe(design, config.costs, econ, annual_target_mwh)
        by_wacc.append({"wacc": r, "lcoe_usd_per_mwh": l,
                        "lcoe_rs_per_kwh": eco.to_rs_per_kwh(l, fx),
                        "abatement_usd_per_tco2": eco.abatement_cost(l, abatement)})
    curtail = []
    for a in ALPHA_GRID:
        l = eco.lcoe_with_curtailment_value(annualized, annual_target_mwh,
                                            curtailed_mwh_per_year, a)
        curtail.append({"alpha": a, "lcoe_usd_per_mwh": l, "drop_fraction": 1.0 - l / base})
    doc = {
        "design": design.as_dict(),
        "system_cost_usd": eco.system_cost(design, config.costs),
        "annualized_cost_usd": annualized,
        "crf": eco.crf(config.econ.wacc, config.econ.lifetime_years),
        "annual_target_mwh": annual_target_mwh,
        "curtailed_mwh_per_year": curtailed_mwh_per_year,
        "curtailment_share": curtailed_mwh_per_year / annual_target_mwh,
        "lcoe_usd_per_mwh": base,
        "lcoe_rs_per_kwh": base_rs,
        "abatement_usd_per_tco2": eco.abatement_cost(base, abatement),
        "health_adjusted_rs_per_kwh": eco.health_adjusted(base_rs, health_benefit_rs_per_kwh),
        "coal_target_rs_per_kwh": eco.COAL_TARGET_RS_PER_KWH,
        "carbon_price_thresholds_met": [p for p in eco.CARBON_PRICE_THRESHOLDS
                                        if eco.abatement_cost(base, abatement) <= p],
        "by_wacc": by_wacc,
        "curtailment_value": curtail,
        "inputs": {"abatement": abatement.__dict__,
                   "health_benefit_rs_per_kwh": health_benefit_rs_per_kwh},
    }
    if replacement is not None and replacement.year_of_replacement < config.econ.lifetime_years:
        l = eco.lcoe_with_replacement(design, config.costs, config.econ, annual_target_mwh,
                                      replacement)
        doc["storage_replacement"] = {**replacement.__dict__, "lcoe_usd_per_mwh": l,
                                      "lcoe_rs_per_kwh": eco.to_rs_per_kwh(l, fx)}
    return doc
