"""Hour-by-hour simulation of a fixed plant design and availability accounting."""
from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .model import (EXACT, DispatchSchedule, PlantDesign, ScenarioConfig, build_relaxed_lp,
                    extract_solution)
from .solver import LPProblem, Status, solve_milp
from .timeseries import HourlySeries, ResourceSet

SCHEDULE_HEADER = ["hour", "charge_mw", "discharge_mw", "soc_mwh", "curtailment_mw", "shortfall_mw"]
TOL = 1e-6


def greedy_dispatch(design: PlantDesign, resources: ResourceSet, target: HourlySeries,
                    config: ScenarioConfig) -> DispatchSchedule:
    """Renewables serve the target first; surplus charges, deficits discharge.

    Charging is limited by the power rating, the free capacity and the charge
    efficiency; discharging by the power rating, the stored energy and the
    discharge efficiency. What the battery cannot absorb is curtailed and
    what it cannot cover is shortfall. End-of-horizon SOC is not enforced.
    """
    if len(resources) != len(target):
        raise ValueError("resource and target lengths differ")
    st = config.storage
    ec, ed = st.charge_efficiency, st.discharge_efficiency
    cap = design.battery_mwh
    rate = design.battery_power_mw
    ren = design.solar_mw * resources.solar.values + design.wind_mw * resources.wind.values
    tgt = target.values
    T = tgt.size
    charge = np.zeros(T)
    discharge = np.zeros(T)
    soc = np.zeros(T)
    curt = np.zeros(T)
    short = np.zeros(T)
    e = st.initial_soc_fraction * cap
    for t in range(T):
        soc[t] = e
        gap = tgt[t] - ren[t]
        if gap <= 0.0:
            c = min(-gap, rate, (cap - e) / ec) if ec > 0 else 0.0
            c = max(c, 0.0)
            charge[t] = c
            e = min(cap, e + ec * c)
            curt[t] = -gap - c
        else:
            dd = max(min(gap, rate, e * ed), 0.0)
            discharge[t] = dd
            e = max(0.0, e - dd / ed)
            short[t] = gap - dd
    return DispatchSchedule(charge, discharge, soc, curt, short, e, frozenset(),
                            ren, tgt.copy(), conserve_end_soc=False)


def max_availability_milp(design: PlantDesign, resources: ResourceSet, target: HourlySeries,
                          config: ScenarioConfig, time_limit=None) -> DispatchSchedule:
    """Schedule for a fixed design that misses the fewest hours.

    Solves the exemption MILP with capacities pinned and the count of
    exempt hours as the objective. Unlike :func:`greedy_dispatch` the battery
    must end where it started. Horizons are limited to the MILP cap.
    """
    T = len(target)
    relaxed = config.with_(availability=0.5)
    P = build_relaxed_lp(resources, target, relaxed, mode=EXACT)
    n = P.num_cols
    c = np.zeros(n)
    c[n - T:] = 1.0
    lb, ub = P.lb.copy(), P.ub.copy()
    fixed = (design.solar_mw, design.wind_mw, design.battery_mwh)
    lb[:3] = fixed
    ub[:3] = fixed
    rhs = P.rhs.copy()
    rhs[-1] = float(T)
    Q = LPProblem(c, P.A, P.senses, rhs, lb, ub, integers=P.integers, name="max-availability")
    sol = solve_milp(Q, time_limit=time_limit)
    if sol.status != Status.OPTIMAL:
        raise ValueError(f"availability MILP ended {sol.status.value}: {sol.message}")
    exempt = np.flatnonzero(sol.x[n - T:] > 0.5)
    return extract_solution(Q, sol, resources, target, relaxed, exempt=exempt).dispatch


def availability(schedule: DispatchSchedule, target: HourlySeries, tolerance_mw=TOL) -> float:
    """Share of hours whose shortfall is within ``tolerance_mw``."""
    if len(schedule) != len(target):
        raise ValueError("schedule and target lengths differ")
    return float(np.count_nonzero(schedule.shortfall_mw <= tolerance_mw)) / len(target)


def validate_schedule(schedule: DispatchSchedule, design: PlantDesign, config: ScenarioConfig,
                      tol=TOL) -> list[str]:
    """Every violated operating rule, one string per hour and rule; empty when valid.

    Tolerances scale with ``1 + B`` so that large plants are judged relative
    to their size. End-of-horizon SOC is checked only for schedules that
    promise to conserve it (LP solutions, not greedy runs).
    """
    st = config.storage
    ec, ed = st.charge_efficiency, st.discharge_efficiency
    B = design.battery_mwh
    rate = design.battery_power_mw
    atol = tol * (1.0 + B + design.solar_mw + design.wind_mw)
    c, d, e = schedule.charge_mw, schedule.discharge_mw, schedule.soc_mwh
    out = []

    def flag(mask, what):
        for t in np.flatnonzero(mask):
            out.append(f"hour {int(t)}: {what}")

    for name, v in (("charge", c), ("discharge", d), ("soc", e)):
        flag(v < -atol, f"negative {name}")
    flag(e > B + atol, "state of charge above capacity")
    flag(c > rate + atol, "charge above power rating")
    flag(d > rate + atol, "discharge above power rating")
    if schedule.renewable_mw is not None:
        flag(c > schedule.renewable_mw + atol, "charging exceeds renewable output")
    nxt = np.append(e[1:], schedule.soc_end_mwh)
    flag(np.abs(nxt - (e + ec * c - d / ed)) > atol, "state of charge recurrence broken")
    if schedule.soc_end_mwh > B + atol or schedule.soc_end_mwh < -atol:
        out.append(f"hour {len(e) - 1}: end state of charge outside [0, capacity]")
    if schedule.conserve_end_soc:
        if abs(e[0] - st.initial_soc_fraction * B) > atol:
            out.append("hour 0: initial state of charge differs from the configured fraction")
        if abs(schedule.soc_end_mwh - e[0]) > atol:
            out.append(f"hour {len(e) - 1}: end state of charge differs from the start")
    return out


def energy_balance(schedule: DispatchSchedule) -> dict:
    """Totals for the accounting identity ren = to_target + charge + curtailment."""
    ren = schedule.renewable_mw
    direct = ren - schedule.charge_mw - schedule.curtailment_mw
    return {"renewable": float(np.sum(ren)), "direct_to_target": float(np.sum(direct)),
            "charge": float(np.sum(schedule.charge_mw)),
            "curtailment": float(np.sum(schedule.curtailment_mw))}


def write_schedule(path, schedule: DispatchSchedule):
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SCHEDULE_HEADER)
        cols = (schedule.charge_mw, schedule.discharge_mw, schedule.soc_mwh,
                schedule.curtailment_mw, schedule.shortfall_mw)
        for t in range(len(schedule)):
            w.writerow([t] + [repr(float(a[t])) for a in cols])


def read_schedule(path) -> DispatchSchedule:
    with Path(path).open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != SCHEDULE_HEADER:
            raise ValueError(f"{path}: expected header {','.join(SCHEDULE_HEADER)}")
        rows = [[float(v) for v in r[1:]] for r in reader if r]
    a = np.array(rows).reshape(-1, 5)
    return DispatchSchedule(a[:, 0], a[:, 1], a[:, 2], a[:, 3], a[:, 4], float("nan"),
                            conserve_end_soc=False)
