"""Least-cost sizing of solar + wind + battery plants against an hourly target.

Column layout of every LP built here::

    [S, W, B, c_0 .. c_{T-1}, d_0 .. d_{T-1}, e_0 .. e_{T-1}]

``S``/``W`` are solar and wind MW, ``B`` battery MWh, ``c``/``d`` hourly
charge and discharge MW and ``e_t`` the stored energy at the start of hour
``t``. The battery must finish the horizon where it started.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.sparse as sp

from . import economics as eco
from .solver.problem import LPProblem, LPSolution, ProblemError, Status
from .timeseries import HOURS_PER_YEAR, HourlySeries, ResourceSet

MILP_HORIZON_CAP = 2190
EXACT = "exact-milp"
HEURISTIC = "slack-heuristic"


@dataclass(frozen=True)
class StorageParams:
    roundtrip_efficiency: float = 0.75
    duration_hours: int = 4
    initial_soc_fraction: float = 0.5

    def __post_init__(self):
        if not 0.0 < self.roundtrip_efficiency <= 1.0:
            raise ValueError("roundtrip_efficiency must lie in (0, 1]")
        if self.duration_hours < 1:
            raise ValueError("duration_hours must be >= 1")
        if not 0.0 <= self.initial_soc_fraction <= 1.0:
            raise ValueError("initial_soc_fraction must lie in [0, 1]")

    @property
    def charge_efficiency(self) -> float:
        return math.sqrt(self.roundtrip_efficiency)

    @property
    def discharge_efficiency(self) -> float:
        return math.sqrt(self.roundtrip_efficiency)


@dataclass(frozen=True)
class ScenarioConfig:
    costs: eco.CostParams = field(default_factory=eco.CostParams)
    econ: eco.EconomicParams = field(default_factory=eco.EconomicParams)
    storage: StorageParams = field(default_factory=StorageParams)
    availability: float = 1.0
    epsilon_mw: float = 0.0
    hours_per_year: int = HOURS_PER_YEAR
    milp_horizon_cap: int = MILP_HORIZON_CAP

    def __post_init__(self):
        if not 0.0 < self.availability <= 1.0:
            raise ValueError("availability must lie in (0, 1]")
        if not self.epsilon_mw >= 0.0:
            raise ValueError("epsilon_mw must be >= 0")

    def with_(self, **kw) -> "ScenarioConfig":
        return replace(self, **kw)

    def annual_target_energy(self, target: HourlySeries) -> float:
        """Mean annual target energy (MWh); horizons shorter than a year are annualized."""
        return float(np.sum(target.values)) * self.hours_per_year / len(target)

    def exemption_budget(self, horizon: int) -> int:
        # the small epsilon guards against 0.99 * 100 evaluating to 0.99999...
        return int(math.floor((1.0 - self.availability) * horizon + 1e-9))


@dataclass(frozen=True)
class PlantDesign:
    solar_mw: float
    wind_mw: float
    battery_mwh: float
    duration_hours: int = 4

    def __post_init__(self):
        for k in ("solar_mw", "wind_mw", "battery_mwh"):
            v = getattr(self, k)
            if not (math.isfinite(v) and v >= 0):
                raise ValueError(f"{k} must be finite and >= 0, got {v}")

    @property
    def battery_power_mw(self) -> float:
        return self.battery_mwh / self.duration_hours

    def scaled(self, k: float) -> "PlantDesign":
        return PlantDesign(self.solar_mw * k, self.wind_mw * k, self.battery_mwh * k,
                           self.duration_hours)

    def as_dict(self):
        return {"solar_mw": self.solar_mw, "wind_mw": self.wind_mw,
                "battery_mwh": self.battery_mwh, "battery_power_mw": self.battery_power_mw}


@dataclass
class DispatchSchedule:
    """Hourly battery operation. ``soc_mwh[t]`` is the energy held at the start of hour t."""

    charge_mw: np.ndarray
    discharge_mw: np.ndarray
    soc_mwh: np.ndarray
    curtailment_mw: np.ndarray
    shortfall_mw: np.ndarray
    soc_end_mwh: float
    exempt_hours: frozenset = frozenset()
    renewable_mw: np.ndarray | None = None
    target_mw: np.ndarray | None = None
    conserve_end_soc: bool = True

    def __len__(self):
        return len(self.charge_mw)

    @property
    def delivered_mw(self) -> np.ndarray:
        """Power sent to the target: renewables plus discharge minus charge, capped at target."""
        net = self.renewable_mw + self.discharge_mw - self.charge_mw
        return np.minimum(net, self.target_mw)

    @property
    def end_soc_deficit(self) -> float:
        return max(0.0, float(self.soc_mwh[0] - self.soc_end_mwh))


@dataclass
class SizingResult:
    design: PlantDesign
    dispatch: DispatchSchedule
    objective_usd_per_mwh: float
    annual_target_mwh: float
    curtailed_energy_mwh_per_year: float
    status: Status = Status.OPTIMAL
    diagnostics: dict = field(default_factory=dict)

    @property
    def annualized_cost_usd(self) -> float:
        return self.objective_usd_per_mwh * self.annual_target_mwh


# --- LP construction -------------------------------------------------------

class Layout:
    """Column and row index bookkeeping for a horizon of T hours."""

    S, W, B = 0, 1, 2

    def __init__(self, T):
        self.T = T
        self.c0 = 3
        self.d0 = 3 + T
        self.e0 = 3 + 2 * T
        self.n = 3 + 3 * T

    def charge(self, t):
        return self.c0 + t

    def discharge(self, t):
        return self.d0 + t

    def soc(self, t):
        return self.e0 + t


def _check_inputs(resources: ResourceSet, target: HourlySeries):
    if len(resources) != len(target):
        raise ProblemError(f"resource length {len(resources)} != target length {len(target)}")
    for s in (resources.solar.values, resources.wind.values, target.values):
        if not np.all(np.isfinite(s)):
            raise ProblemError("non-finite coefficient in input series")


def cost_vector(config: ScenarioConfig, annual_energy: float) -> np.ndarray:
    """Objective coefficients of (S, W, B) in $/MWh of annual target energy per MW(h)."""
    c = config.costs
    k = eco.crf(config.econ.wacc, config.econ.lifetime_years) * 1000.0
    per = np.array([c.solar_usd_per_kw, c.wind_usd_per_kw,
                    c.battery_energy_usd_per_kwh
                    + c.battery_power_usd_per_kw / config.storage.duration_hours]) * k
    if annual_energy > 0:
        return per / annual_energy
    # nothing to serve: any positive weighting gives the same (zero) optimum
    return per


def build_lp(resources: ResourceSet, target: HourlySeries, config: ScenarioConfig,
             exempt=(), name="sizing") -> LPProblem:
    """The sizing LP: 3 + 3T columns and 6T + 2 rows.

    Rows, in order: SOC caps (T) and the post-horizon cap, SOC recurrence
    (T - 1), horizon closure, initial SOC, charge and discharge rate limits
    (2T), charge-from-renewables (T), delivery (T). ``exempt`` hours keep
    their delivery row with a zero requirement so the shape never changes.
    """
    _check_inputs(resources, target)
    T = len(target)
    L = Layout(T)
    st = config.storage
    ec, ed = st.charge_efficiency, st.discharge_efficiency
    inv_ed = 1.0 / ed
    ps = resources.solar.values
    pw = resources.wind.values
    tgt = target.values
    hrs = np.arange(T)
    cols_c, cols_d, cols_e = L.c0 + hrs, L.d0 + hrs, L.e0 + hrs

    rows, cols, vals = [], [], []
    senses, rhs = [], []
    r = 0

    def block(rr, cc, vv):
        rows.append(np.asarray(rr)), cols.append(np.asarray(cc)), vals.append(np.asarray(vv, float))

    # SOC cap: e_t - B <= 0
    block(r + hrs, cols_e, np.ones(T))
    block(r + hrs, np.full(T, L.B), -np.ones(T))
    senses += ["L"] * T
    rhs.append(np.zeros(T))
    r += T
    # post-horizon cap: e_{T-1} + ec c_{T-1} - d_{T-1}/ed - B <= 0
    last = T - 1
    block([r] * 4, [cols_e[last], cols_c[last], cols_d[last], L.B], [1.0, ec, -inv_ed, -1.0])
    senses.append("L")
    rhs.append(np.zeros(1))
    r += 1
    # recurrence: e_t - e_{t-1} - ec c_{t-1} + d_{t-1}/ed = 0
    if T > 1:
        t1 = hrs[1:]
        rr = r + t1 - 1
        block(rr, cols_e[t1], np.ones(T - 1))
        block(rr, cols_e[t1 - 1], -np.ones(T - 1))
        block(rr, cols_c[t1 - 1], np.full(T - 1, -ec))
        block(rr, cols_d[t1 - 1], np.full(T - 1, inv_ed))
        senses += ["E"] * (T - 1)
        rhs.append(np.zeros(T - 1))
        r += T - 1
    # closure: e_{T-1} + ec c_{T-1} - d_{T-1}/ed - e_0 = 0
    if T > 1:
        block([r] * 4, [cols_e[last], cols_c[last], cols_d[last], cols_e[0]],
              [1.0, ec, -inv_ed, -1.0])
    else:
        block([r] * 2, [cols_c[0], cols_d[0]], [ec, -inv_ed])
    senses.append("E")
    rhs.append(np.zeros(1))
    r += 1
    # initial SOC: e_0 - f B = 0
    f = st.initial_soc_fraction
    block([r, r], [cols_e[0], L.B], [1.0, -f])
    senses.append("E")
    rhs.append(np.zeros(1))
    r += 1
    # rate limits: c_t - B/dur <= 0, d_t - B/dur <= 0
    inv_dur = 1.0 / st.duration_hours
    for cc in (cols_c, cols_d):
        block(r + hrs, cc, np.ones(T))
        block(r + hrs, np.full(T, L.B), np.full(T, -inv_dur))
        senses += ["L"] * T
        rhs.append(np.zeros(T))
        r += T
    # charge source: c_t - ps S - pw W <= 0
    block(r + hrs, cols_c, np.ones(T))
    block(r + hrs, np.full(T, L.S), -ps)
    block(r + hrs, np.full(T, L.W), -pw)
    senses += ["L"] * T
    rhs.append(np.zeros(T))
    r += T
    # delivery: ps S + pw W + d_t - c_t >= target + eps; exempt hours keep the row
    # with rhs 0, which charge-from-renewables already implies
    block(r + hrs, np.full(T, L.S), ps)
    block(r + hrs, np.full(T, L.W), pw)
    block(r + hrs, cols_d, np.ones(T))
    block(r + hrs, cols_c, -np.ones(T))
    senses += ["G"] * T
    need = tgt + config.epsilon_mw
    if len(exempt):
        need = need.copy()
        need[np.fromiter(exempt, dtype=np.int64)] = 0.0
    rhs.append(need)
    r += T

    A = sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                      shape=(r, L.n))
    A.eliminate_zeros()
    c = np.zeros(L.n)
    c[:3] = cost_vector(config, config.annual_target_energy(target))
    return LPProblem(c, A, np.array(senses), np.concatenate(rhs), np.zeros(L.n),
                     np.full(L.n, np.inf), name=name)


def delivery_row_offset(T: int) -> int:
    return 5 * T + 2


def build_mix_constrained_lp(resources, target, config, solar_share: float) -> LPProblem:
    """``build_lp`` plus ``S = rho (S + W)``, i.e. ``(1 - rho) S - rho W = 0``."""
    if not 0.0 <= solar_share <= 1.0:
        raise ProblemError("solar_share must lie in [0, 1]")
    P = build_lp(resources, target, config, name=f"sizing-mix-{solar_share:g}")
    row = sp.csr_matrix(([1.0 - solar_share, -solar_share], ([0, 0], [0, 1])),
                        shape=(1, P.num_cols))
    row.eliminate_zeros()
    return LPProblem(P.c, sp.vstack([P.A, row], format="csr"),
                     np.append(P.senses, "E"), np.append(P.rhs, 0.0), P.lb, P.ub, name=P.name)


def build_relaxed_lp(resources, target, config, mode=EXACT, slack_penalty=None) -> LPProblem:
    """Availability-relaxed problem.

    ``exact-milp`` adds binaries ``b_t`` with ``delivery_t + M b_t >= target_t + eps``
    and ``sum b_t <= floor((1 - A) T)``. ``slack-heuristic`` returns the first
    pass of the heuristic: non-negative delivery slacks priced at
    ``slack_penalty`` per MW; see :func:`slack_exemptions` for the full scheme.
    """
    P = build_lp(resources, target, config)
    if config.availability >= 1.0:
        return P
    T = len(target)
    if mode == EXACT:
        if T > config.milp_horizon_cap:
            raise ProblemError(f"exact mode is capped at {config.milp_horizon_cap} hours, got {T}")
        budget = config.exemption_budget(T)
        big_m = float(np.max(target.values, initial=0.0)) + config.epsilon_mw
        return _append_columns(P, T, coef=big_m, cost=0.0, budget=budget, integer=True,
                               name="sizing-relaxed-milp")
    if mode == HEURISTIC:
        if slack_penalty is None:
            slack_penalty = 10.0 * float(np.max(P.c))
        return _append_columns(P, T, coef=1.0, cost=slack_penalty, budget=None, integer=False,
                               name="sizing-relaxed-slack")
    raise ProblemError(f"unknown relaxation mode {mode!r}")


def _append_columns(P, T, coef, cost, budget, integer, name):
    n0 = P.num_cols
    r0 = delivery_row_offset(T)
    extra = sp.csr_matrix((np.full(T, coef), (r0 + np.arange(T), np.arange(T))),
                          shape=(P.num_rows, T))
    A = sp.hstack([P.A, extra], format="csr")
    c = np.concatenate([P.c, np.full(T, cost)])
    lb = np.concatenate([P.lb, np.zeros(T)])
    ub = np.concatenate([P.ub, np.ones(T) if integer else np.full(T, np.inf)])
    senses, rhs = P.senses, P.rhs
    if budget is not None:
        row = sp.csr_matrix((np.ones(T), (np.zeros(T, int), n0 + np.arange(T))),
                            shape=(1, n0 + T))
        A = sp.vstack([A, row], format="csr")
        senses = np.append(senses, "L")
        rhs = np.append(rhs, float(budget))
    ints = np.arange(n0, n0 + T) if integer else np.array([], dtype=np.int64)
    return LPProblem(c, A, senses, rhs, lb, ub, integers=ints, name=name)


# --- solutions --------------------------------------------------------------

def _snap(v, tol=1e-9):
    v = np.array(v, dtype=float)
    v[np.abs(v) < tol * (1.0 + np.max(np.abs(v), initial=0.0))] = 0.0
    return np.maximum(v, 0.0)


def extract_solution(problem: LPProblem, solution: LPSolution, resources: ResourceSet,
                     target: HourlySeries, config: ScenarioConfig, exempt=()) -> SizingResult:
    """Turn an optimal LP solution into a design, a schedule and headline numbers."""
    # a MILP stopped at a limit still carries a feasible incumbent
    incumbent = solution.status == Status.ITERATION_LIMIT and solution.x is not None \
        and problem.integers.size > 0
    if solution.status != Status.OPTIMAL and not incumbent:
        raise ProblemError(f"cannot extract a design from a {solution.status.value} solution")
    T = len(target)
    L = Layout(T)
    x = solution.x
    s, w, b = (max(0.0, float(v)) for v in x[:3])
    design = PlantDesign(s, w, b, config.storage.duration_hours)
    st = config.storage
    charge = _snap(x[L.c0:L.d0])
    discharge = _snap(x[L.d0:L.e0])
    soc = _snap(x[L.e0:L.n])
    soc_end = float(soc[-1] + st.charge_efficiency * charge[-1]
                    - discharge[-1] / st.discharge_efficiency)
    ren = s * resources.solar.values + w * resources.wind.values
    tgt = target.values
    net = ren + discharge - charge
    exempt = frozenset(int(t) for t in exempt)
    if len(x) > L.n and problem.integers.size:
        exempt = exempt | frozenset(int(t) for t in np.flatnonzero(x[L.n:L.n + T] > 0.5))
    sched = DispatchSchedule(charge, discharge, soc, np.maximum(0.0, net - tgt),
                             np.maximum(0.0, tgt - net), soc_end, exempt, ren, tgt.copy())
    annual = config.annual_target_energy(target)
    annualized = eco.annualized_cost(design, config.costs, config.econ)
    obj = annualized / annual if annual > 0 else 0.0
    curtailed = float(np.sum(sched.curtailment_mw)) * config.hours_per_year / T
    diag = {"iterations": solution.iterations, "solve_time": solution.solve_time,
            "lp_objective": solution.objective, "message": solution.message}
    if solution.residuals is not None:
        diag["kkt"] = solution.residuals.as_dict()
    return SizingResult(design, sched, obj, annual, curtailed, solution.status, diag)


def net_dispatch(schedule: DispatchSchedule, config: ScenarioConfig) -> DispatchSchedule:
    """Remove simultaneous charge and discharge while keeping every SOC transition.

    The hour's net energy change ``ec*c - d/ed`` is reassigned wholly to
    charge or to discharge. Net output to the grid never falls.
    """
    st = config.storage
    ec, ed = st.charge_efficiency, st.discharge_efficiency
    c = schedule.charge_mw.copy()
    d = schedule.discharge_mw.copy()
    both = (c > 0) & (d > 0)
    delta = ec * c[both] - d[both] / ed
    c[both] = np.where(delta > 0, delta / ec, 0.0)
    d[both] = np.where(delta < 0, -delta * ed, 0.0)
    out = replace(schedule, charge_mw=c, discharge_mw=d)
    if schedule.renewable_mw is not None and schedule.target_mw is not None:
        net = schedule.renewable_mw + d - c
        out.curtailment_mw = np.maximum(0.0, net - schedule.target_mw)
        out.shortfall_mw = np.maximum(0.0, schedule.target_mw - net)
    return out


def lp_residuals(problem: LPProblem, x) -> float:
    """Largest absolute violation of the problem's rows and bounds at ``x``."""
    act = problem.A @ x
    lo, hi = problem.row_bounds()
    rv = np.maximum(np.maximum(lo - act, act - hi), 0.0)
    bv = np.maximum(np.maximum(problem.lb - x, x - problem.ub), 0.0)
    return float(max(np.max(rv, initial=0.0), np.max(bv, initial=0.0)))


def schedule_vector(design: PlantDesign, schedule: DispatchSchedule) -> np.ndarray:
    """Pack a design and schedule back into the LP column layout."""
    return np.concatenate([[design.solar_mw, design.wind_mw, design.battery_mwh],
                           schedule.charge_mw, schedule.discharge_mw, schedule.soc_mwh])


# --- solve drivers ----------------------------------------------------------

DUAL_RANK = "dual-rank"
SLACK = "slack"


def _lp_solver():
    from .solver import solve_lp, solve_milp
    return solve_lp, solve_milp


def solve_scenario(resources, target, config: ScenarioConfig, mode=None, method=DUAL_RANK,
                   warm_start=None, time_limit=None):
    """Size a plant for one scenario. Returns ``(SizingResult | None, LPSolution)``.

    With availability below 1 the mode defaults to the exact MILP when the
    horizon is within the cap and to the heuristic otherwise. ``method``
    picks the heuristic's exemption rule (``dual-rank`` or ``slack``).
    """
    solve_lp, solve_milp = _lp_solver()
    T = len(target)
    if config.availability >= 1.0:
        P = build_lp(resources, target, config)
        sol = solve_lp(P, warm_start=warm_start, time_limit=time_limit)
        return _finish(P, sol, resources, target, config), sol
    if mode is None:
        mode = EXACT if T <= config.milp_horizon_cap else HEURISTIC
    if mode == EXACT:
        P = build_relaxed_lp(resources, target, config, mode=EXACT)
        sol = solve_milp(P, time_limit=time_limit)
        return _finish(P, sol, resources, target, config), sol
    if mode == HEURISTIC:
        if method == DUAL_RANK:
            exempt, diag = dual_rank_exemptions(resources, target, config,
                                                warm_start=warm_start, time_limit=time_limit)
        elif method == SLACK:
            exempt, diag = slack_exemptions(resources, target, config, time_limit=time_limit)
        else:
            raise ProblemError(f"unknown exemption method {method!r}")
        P = build_lp(resources, target, config, exempt=exempt)
        sol = solve_lp(P, warm_start=diag.pop("basis", None), time_limit=time_limit)
        res = _finish(P, sol, resources, target, config, exempt=exempt)
        if res is not None:
            res.diagnostics["heuristic"] = diag
        return res, sol
    raise ProblemError(f"unknown relaxation mode {mode!r}")


def _finish(P, sol, resources, target, config, exempt=()):
    if sol.status != Status.OPTIMAL and not (sol.x is not None and P.integers.size):
        return None
    return extract_solution(P, sol, resources, target, config, exempt=exempt)


def default_chunk(T: int) -> int:
    return max(1, -(-T // 1000))


def dual_rank_exemptions(resources, target, config: ScenarioConfig, chunk=None,
                         warm_start=None, time_limit=None):
    """Exempt hours in fixed-size chunks, most expensive first.

    Each pass solves the LP with the hours chosen so far exempt and ranks the
    remaining hours by ``y_t * target_t``, the first-order saving from
    dropping hour t's requirement (``y_t`` is its delivery dual). Ties go to
    the earlier hour. The chunk size depends only on T, so the set chosen for
    a smaller budget is always a prefix of the set for a larger one and the
    resulting cost is monotone in availability.
    """
    solve_lp, _ = _lp_solver()
    T = len(target)
    budget = config.exemption_budget(T)
    chunk = chunk or default_chunk(T)
    r0 = delivery_row_offset(T)
    chosen: list[int] = []
    basis = warm_start
    passes = []
    tv = target.values
    while True:
        P = build_lp(resources, target, config, exempt=chosen)
        sol = solve_lp(P, warm_start=basis, time_limit=time_limit)
        if sol.status != Status.OPTIMAL:
            raise ProblemError(f"ranking pass failed: {sol.status.value}")
        basis = sol.basis
        passes.append({"exempt": len(chosen), "objective": sol.objective,
                       "iterations": sol.iterations})
        if len(chosen) >= budget:
            break
        score = sol.y[r0:r0 + T] * tv
        score[chosen] = -np.inf
        order = np.lexsort((np.arange(T), -score))
        k = min(chunk, budget - len(chosen))
        new = [int(t) for t in order[:k] if score[t] > 0]
        if not new:
            break
        chosen.extend(new)
    return frozenset(chosen), {"budget": budget, "chunk": chunk, "passes": passes,
                               "exempt": sorted(chosen), "basis": basis}


def slack_exemptions(resources, target, config: ScenarioConfig, penalty=None,
                     shrink=10.0, max_rounds=12, time_limit=None):
    """Alternative rule: exempt the hours with the largest penalized delivery slack.

    Delivery rows get a non-negative slack priced at ``penalty`` (default 10x
    the largest capacity cost coefficient). While fewer hours than the budget
    carry slack the price is divided by ``shrink`` and the LP re-solved from
    the previous basis. Ties are broken by hour index.
    """
    solve_lp, _ = _lp_solver()
    T = len(target)
    budget = config.exemption_budget(T)
    if budget == 0:
        return frozenset(), {"budget": 0, "rounds": []}
    base = build_lp(resources, target, config)
    lam = penalty if penalty is not None else 10.0 * float(np.max(base.c[:3]))
    n0 = base.num_cols
    basis = None
    slack = np.zeros(T)
    rounds = []
    for _ in range(max_rounds):
        P = build_relaxed_lp(resources, target, config, mode=HEURISTIC, slack_penalty=lam)
        sol = solve_lp(P, warm_start=basis, time_limit=time_limit)
        if sol.status != Status.OPTIMAL:
            raise ProblemError(f"slack pass failed: {sol.status.value}")
        basis = sol.basis
        slack = np.where(sol.x[n0:n0 + T] > 1e-7 * (1.0 + np.max(target.values)),
                         sol.x[n0:n0 + T], 0.0)
        rounds.append({"penalty": lam, "hours_with_slack": int(np.count_nonzero(slack)),
                       "iterations": sol.iterations})
        if np.count_nonzero(slack) >= budget:
            break
        lam /= shrink
    order = np.lexsort((np.arange(T), -slack))
    chosen = [int(t) for t in order[:budget] if slack[t] > 0]
    return frozenset(chosen), {"budget": budget, "rounds": rounds, "exempt": sorted(chosen)}
