import math

import pytest

from hybridsizing import economics as eco
from hybridsizing.model import PlantDesign

KARNATAKA = PlantDesign(1685, 14, 2727)
GUJARAT = PlantDesign(1136, 371, 2038)
TAMIL_NADU = PlantDesign(1550, 109, 2606)
COSTS = eco.CostParams()
ECON = eco.EconomicParams()
ANNUAL = 876000.0


class TestCRF:
    def test_values(self):
        assert eco.crf(0.025, 20) == pytest.approx(0.0641471287, abs=1e-9)
        assert eco.crf(0.10, 20) == pytest.approx(0.1174596248, abs=1e-9)
        assert eco.crf(0.0, 20) == 0.05

    def test_continuity_at_zero(self):
        assert eco.crf(1e-10, 20) == pytest.approx(1 / 20, abs=1e-9)

    def test_errors(self):
        with pytest.raises(ValueError):
            eco.crf(0.05, 0)
        with pytest.raises(ValueError):
            eco.crf(-0.01, 20)


class TestCosts:
    def test_system_cost(self):
        assert KARNATAKA.battery_power_mw == 681.75
        assert eco.system_cost(KARNATAKA, COSTS) == pytest.approx(2.2857e9, rel=1e-4)
        assert eco.system_cost(PlantDesign(0, 0, 0), COSTS) == 0.0
        assert eco.system_cost(PlantDesign(1000, 0, 0), COSTS) == 7.0e8

    @pytest.mark.parametrize("design, expect", [(KARNATAKA, 167.4), (GUJARAT, 147.8),
                                                (TAMIL_NADU, 164.6)])
    def test_lcoe(self, design, expect):
        assert eco.lcoe(design, COSTS, ECON, ANNUAL) == pytest.approx(expect, abs=0.05)

    def test_lcoe_zero_energy(self):
        with pytest.raises(ValueError):
            eco.lcoe(KARNATAKA, COSTS, ECON, 0.0)

    def test_currency(self):
        assert eco.to_rs_per_kwh(167.0) == pytest.approx(11.69)
        assert eco.to_rs_per_kwh(0.0) == 0.0
        assert eco.to_rs_per_kwh(100.0, 70.0) == 7.0
        assert eco.from_rs_per_kwh(eco.to_rs_per_kwh(123.4)) == pytest.approx(123.4, abs=1e-12)
        with pytest.raises(ValueError):
            eco.to_rs_per_kwh(1.0, 0.0)

    def test_negative_cost_rejected(self):
        with pytest.raises(ValueError):
            eco.CostParams(solar_usd_per_kw=-1)


class TestAbatement:
    def test_karnataka(self):
        low = eco.lcoe(KARNATAKA, COSTS, ECON, ANNUAL)
        high = eco.lcoe(KARNATAKA, COSTS, eco.EconomicParams(0.10, 20), ANNUAL)
        assert eco.abatement_cost(low) == pytest.approx(138.2, abs=0.1)
        assert high == pytest.approx(306.5, abs=0.1)
        assert eco.abatement_cost(high) == pytest.approx(292.8, abs=0.1)

    def test_zero_at_coal_cost(self):
        assert eco.abatement_cost(43.0) == 0.0

    def test_params_validated(self):
        with pytest.raises(ValueError):
            eco.AbatementParams(ef_coal_t_per_mwh=0.01)


class TestCurtailment:
    def test_alpha_zero_is_base(self):
        assert eco.lcoe_with_curtailment_value(1e8, ANNUAL, 2e6, 0.0) == 1e8 / ANNUAL

    @pytest.mark.parametrize("share, drop", [(1.90, 65.5), (2.33, 70.0), (2.75, 73.3)])
    def test_drops(self, share, drop):
        base = eco.lcoe_with_curtailment_value(1e8, ANNUAL, share * ANNUAL, 0.0)
        full = eco.lcoe_with_curtailment_value(1e8, ANNUAL, share * ANNUAL, 1.0)
        assert 100 * (1 - full / base) == pytest.approx(drop, abs=0.1)

    def test_errors(self):
        with pytest.raises(ValueError):
            eco.lcoe_with_curtailment_value(1.0, ANNUAL, 1.0, 1.5)
        with pytest.raises(ValueError):
            eco.lcoe_with_curtailment_value(1.0, 0.0, 0.0, 0.5)

    def test_credit_variant(self):
        assert eco.lcoe_with_curtailment_credit(1e8, 1e6, 2e5, 50.0) == pytest.approx(90.0)


class TestReplacement:
    def test_increment(self):
        base = eco.lcoe(GUJARAT, COSTS, ECON, ANNUAL)
        rep = eco.lcoe_with_replacement(GUJARAT, COSTS, ECON, ANNUAL, eco.ReplacementParams())
        pv = 2038 * 250e3 / 1.08 ** 15
        assert rep - base == pytest.approx(eco.crf(0.025, 20) * pv / ANNUAL, rel=1e-12)

    def test_free_replacement(self):
        base = eco.lcoe(GUJARAT, COSTS, ECON, ANNUAL)
        rep = eco.lcoe_with_replacement(GUJARAT, COSTS, ECON, ANNUAL,
                                        eco.ReplacementParams(15, 0.0, 0.08))
        assert rep == base

    def test_infinite_discount(self):
        base = eco.lcoe(GUJARAT, COSTS, ECON, ANNUAL)
        steep = eco.lcoe_with_replacement(GUJARAT, COSTS, ECON, ANNUAL,
                                          eco.ReplacementParams(15, 250.0, 5.0))
        assert base < steep < base + 1e-6
        assert eco.lcoe_with_replacement(GUJARAT, COSTS, ECON, ANNUAL,
                                         eco.ReplacementParams(15, 250.0, math.inf)) == base

    def test_bad_year(self):
        with pytest.raises(ValueError):
            eco.lcoe_with_replacement(GUJARAT, COSTS, ECON, ANNUAL,
                                      eco.ReplacementParams(20, 250.0, 0.08))


class TestHealth:
    def test_values(self):
        assert eco.health_adjusted(11.7) == pytest.approx(10.97)
        assert eco.health_adjusted(11.7, 0.0) == 11.7
        with pytest.raises(ValueError):
            eco.health_adjusted(11.7, -1)

    def test_still_above_coal(self):
        for d in (KARNATAKA, GUJARAT, TAMIL_NADU):
            rs = eco.to_rs_per_kwh(eco.lcoe(d, COSTS, ECON, ANNUAL))
            assert eco.health_adjusted(rs) > eco.COAL_TARGET_RS_PER_KWH


def plant(name, year, mw=100.0, owner="state"):
    return eco.CoalPlantRecord(name, "KA", mw, year, owner)


class TestRetirement:
    def test_single_plants(self):
        assert eco.retirement_timeline([plant("a", 2010)], 40, 2040).stranded_fraction == 1.0
        assert eco.retirement_timeline([plant("a", 1995)], 40, 2040).stranded_fraction == 0.0

    def test_toy_fleet_by_hand(self):
        years = [1980, 1985, 1990, 1995, 2000, 2005, 2008, 2010, 2012, 2015]
        mws = [100, 200, 300, 400, 500, 600, 700, 800, 900, 1000]
        owners = ["state", "central", "private"] * 4
        fleet = [plant(f"p{i}", y, m, o) for i, (y, m, o) in enumerate(zip(years, mws, owners))]
        t = eco.retirement_timeline(fleet, 40, 2040)
        # retire 2020 .. 2055; those after 2040 are 2005, 2008, 2010, 2012, 2015 builds
        assert t.stranded_mw == 600 + 700 + 800 + 900 + 1000
        assert t.stranded_fraction == pytest.approx(4000 / 5500)
        assert t.retiring_by_year[2048] == {"private": 0.0, "state": 700.0, "central": 0.0}
        assert list(t.retiring_by_year) == sorted(t.retiring_by_year)

    def test_young_fleet_mostly_stranded(self):
        # capacity-weighted average age of 13 years in 2020
        fleet = [plant("a", 2003, 500), plant("b", 2007, 1000), plant("c", 2012, 1500),
                 plant("d", 1990, 300)]
        avg_build = sum(p.capacity_mw * p.commission_year for p in fleet) / 3300
        assert 2020 - avg_build == pytest.approx(13, abs=1)
        assert eco.retirement_timeline(fleet, 40, 2040).stranded_fraction > 0.75

    def test_empty_fleet(self):
        with pytest.raises(ValueError):
            eco.retirement_timeline([], 40, 2040)

    def test_record_validation(self):
        with pytest.raises(ValueError):
            plant("x", 1900)
        with pytest.raises(ValueError):
            plant("x", 2000, owner="coop")
        with pytest.raises(ValueError):
            plant("x", 2000, mw=0.0)

    def test_fleet_roundtrip(self, tmp_path):
        fleet = [plant("a", 2001, 123.5, "private"), plant("b", 1999, 660.0, "central")]
        eco.write_fleet(fleet, tmp_path / "f.csv")
        assert eco.load_fleet(tmp_path / "f.csv") == fleet

    def test_fleet_bad_row(self, tmp_path):
        p = tmp_path / "f.csv"
        p.write_text("name,state,capacity_mw,commission_year,ownership\na,KA,100,1800,state\n")
        with pytest.raises(ValueError, match=":2:"):
            eco.load_fleet(p)
