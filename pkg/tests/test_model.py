import math

import numpy as np
import pytest

from hybridsizing import economics as eco
from hybridsizing.dispatch import validate_schedule
from hybridsizing.model import (EXACT, HEURISTIC, SLACK, DispatchSchedule, PlantDesign,
                                ScenarioConfig, StorageParams, build_lp,
                                build_mix_constrained_lp, build_relaxed_lp, dual_rank_exemptions,
                                extract_solution, lp_residuals, net_dispatch, schedule_vector,
                                solve_scenario)
from hybridsizing.solver import ProblemError, Status, solve_lp, solve_milp
from hybridsizing.synthetic import desk_instance, small_instance
from hybridsizing.timeseries import MEGAWATT, HourlySeries, ResourceSet


def series(v, unit="normalized-cf"):
    return HourlySeries(np.asarray(v, float), unit=unit, hours_per_year=len(v))


class TestConfig:
    def test_storage(self):
        st = StorageParams()
        assert st.charge_efficiency == st.discharge_efficiency
        assert st.charge_efficiency ** 2 == pytest.approx(0.75, abs=1e-12)
        with pytest.raises(ValueError):
            StorageParams(roundtrip_efficiency=0.0)
        with pytest.raises(ValueError):
            StorageParams(initial_soc_fraction=1.5)

    def test_scenario(self):
        with pytest.raises(ValueError):
            ScenarioConfig(availability=0.0)
        with pytest.raises(ValueError):
            ScenarioConfig(epsilon_mw=-1)
        assert ScenarioConfig(availability=0.99).exemption_budget(100) == 1

    def test_design(self):
        d = PlantDesign(1, 2, 40)
        assert d.battery_power_mw == 10.0
        with pytest.raises(ValueError):
            PlantDesign(-1, 0, 0)


class TestBuild:
    def test_counts(self, desk, config):
        P = build_lp(*desk, config)
        assert P.num_cols == 9 and P.num_rows == 14
        res, tg = small_instance(24)
        P = build_lp(res, tg, config)
        assert (P.num_cols, P.num_rows) == (3 + 72, 6 * 24 + 2)

    def test_length_mismatch(self, config):
        res = ResourceSet(series([1, 0]), series([0, 0]))
        with pytest.raises(ProblemError):
            build_lp(res, series([10.0, 10.0, 10.0], MEGAWATT), config)

    def test_desk_optimum(self, desk, config):
        P = build_lp(*desk, config)
        sol = solve_lp(P)
        r = extract_solution(P, sol, *desk, config)
        assert r.design.solar_mw == pytest.approx(70 / 3, abs=1e-9)
        assert r.design.wind_mw == pytest.approx(0.0, abs=1e-12)
        assert r.design.battery_mwh == pytest.approx(160 / 3, abs=1e-9)

    def test_zero_resources_infeasible(self, config):
        res = ResourceSet(series([0.0, 0.0]), series([0.0, 0.0]))
        sol = solve_lp(build_lp(res, series([10.0, 10.0], MEGAWATT), config))
        assert sol.status == Status.INFEASIBLE

    def test_zero_target(self, config):
        res, _ = desk_instance()
        P = build_lp(res, series([0.0, 0.0], MEGAWATT), config)
        sol = solve_lp(P)
        r = extract_solution(P, sol, res, series([0.0, 0.0], MEGAWATT), config)
        assert sol.objective == 0.0
        assert (r.design.solar_mw, r.design.wind_mw, r.design.battery_mwh) == (0, 0, 0)

    def test_objective_matches_lcoe(self, small24, config):
        r, sol = solve_scenario(*small24, config)
        again = eco.lcoe(r.design, config.costs, config.econ, r.annual_target_mwh)
        assert r.objective_usd_per_mwh == pytest.approx(again, rel=1e-6)
        assert sol.objective == pytest.approx(again, rel=1e-6)

    def test_non_optimal_extract(self, config):
        res = ResourceSet(series([0.0, 0.0]), series([0.0, 0.0]))
        P = build_lp(res, series([10.0, 10.0], MEGAWATT), config)
        with pytest.raises(ProblemError):
            extract_solution(P, solve_lp(P), res, series([10.0, 10.0], MEGAWATT), config)


class TestMix:
    def test_endpoints(self, small24, config):
        for rho, zero in ((1.0, 1), (0.0, 0)):
            P = build_mix_constrained_lp(*small24, config, rho)
            sol = solve_lp(P)
            assert sol.x[zero] == pytest.approx(0.0, abs=1e-9)

    def test_envelope(self, small24, config):
        free = solve_lp(build_lp(*small24, config)).objective
        grid = [solve_lp(build_mix_constrained_lp(*small24, config, r)).objective
                for r in np.linspace(0, 1, 11)]
        assert free <= min(grid) + 1e-9
        assert free >= min(grid) - 0.05 * min(grid)

    def test_bad_share(self, small24, config):
        with pytest.raises(ProblemError):
            build_mix_constrained_lp(*small24, config, 1.5)


class TestRelaxed:
    def test_full_availability_is_plain(self, small24, config):
        a = build_relaxed_lp(*small24, config)
        b = build_lp(*small24, config)
        assert (a.A != b.A).nnz == 0 and np.array_equal(a.c, b.c)

    def test_desk_half_availability(self, desk):
        cfg = ScenarioConfig(availability=0.5)
        P = build_relaxed_lp(*desk, cfg, mode=EXACT)
        sol = solve_milp(P)
        r = extract_solution(P, sol, *desk, cfg)
        assert r.design.solar_mw == pytest.approx(10.0, abs=1e-9)
        assert r.design.battery_mwh == pytest.approx(0.0, abs=1e-9)
        assert r.dispatch.exempt_hours == frozenset({1})

    def test_cap(self, config):
        res, tg = small_instance(30)
        cfg = ScenarioConfig(availability=0.9, milp_horizon_cap=24)
        with pytest.raises(ProblemError):
            build_relaxed_lp(res, tg, cfg, mode=EXACT)

    def test_heuristic_first_pass(self, small24):
        cfg = ScenarioConfig(availability=0.9)
        P = build_relaxed_lp(*small24, cfg, mode=HEURISTIC)
        assert P.num_cols == 3 + 4 * 24 and P.integers.size == 0

    def test_dual_rank_nested(self, small24):
        sets = [dual_rank_exemptions(*small24, ScenarioConfig(availability=a))[0]
                for a in (0.95, 0.9, 0.85)]
        assert sets[0] <= sets[1] <= sets[2]
        assert [len(s) for s in sets] == [1, 2, 3]

    def test_methods_not_worse_than_full(self, small24, config):
        base = solve_scenario(*small24, config)[0].objective_usd_per_mwh
        cfg = ScenarioConfig(availability=0.9)
        for kw in ({"mode": HEURISTIC}, {"mode": HEURISTIC, "method": SLACK}, {"mode": EXACT}):
            r, _ = solve_scenario(*small24, cfg, **kw)
            assert r.objective_usd_per_mwh <= base + 1e-9

    def test_exact_beats_heuristic(self, small24):
        cfg = ScenarioConfig(availability=0.92)
        ex = solve_scenario(*small24, cfg, mode=EXACT)[0].objective_usd_per_mwh
        he = solve_scenario(*small24, cfg, mode=HEURISTIC)[0].objective_usd_per_mwh
        assert ex <= he + 1e-9


class TestNetting:
    def sched(self, c, d, e, end, ren=None, tgt=None):
        return DispatchSchedule(np.array(c, float), np.array(d, float), np.array(e, float),
                                np.zeros(len(c)), np.zeros(len(c)), end,
                                renewable_mw=None if ren is None else np.array(ren, float),
                                target_mw=None if tgt is None else np.array(tgt, float))

    def test_identity(self):
        s = self.sched([1, 0], [0, 2], [5, 5.5], 4)
        out = net_dispatch(s, ScenarioConfig())
        assert np.array_equal(out.charge_mw, s.charge_mw)
        assert np.array_equal(out.discharge_mw, s.discharge_mw)

    def test_perfect_cancellation(self):
        cfg = ScenarioConfig(storage=StorageParams(roundtrip_efficiency=1.0))
        out = net_dispatch(self.sched([5], [5], [3], 3), cfg)
        assert out.charge_mw[0] == 0 and out.discharge_mw[0] == 0

    def test_preserves_transition(self):
        cfg = ScenarioConfig()
        ec = ed = math.sqrt(0.75)
        s = self.sched([5], [3], [10], 10 + ec * 5 - 3 / ed)
        out = net_dispatch(s, cfg)
        assert min(out.charge_mw[0], out.discharge_mw[0]) == 0
        after = 10 + ec * out.charge_mw[0] - out.discharge_mw[0] / ed
        assert after == pytest.approx(s.soc_end_mwh, abs=1e-12)

    def test_lp_schedule_after_netting(self, small24, config):
        r, sol = solve_scenario(*small24, config)
        n = net_dispatch(r.dispatch, config)
        assert np.all(np.minimum(n.charge_mw, n.discharge_mw) == 0)
        P = build_lp(*small24, config)
        assert lp_residuals(P, schedule_vector(r.design, n)) <= 1e-6
        assert validate_schedule(n, r.design, config) == []


def test_homothety(small24, config):
    res, tg = small24
    a, _ = solve_scenario(res, tg, config)
    b, _ = solve_scenario(res, tg.scaled(2.0), config)
    for k in ("solar_mw", "wind_mw", "battery_mwh"):
        assert getattr(b.design, k) == pytest.approx(2 * getattr(a.design, k), rel=1e-7, abs=1e-7)
    assert b.objective_usd_per_mwh == pytest.approx(a.objective_usd_per_mwh, rel=1e-8)
