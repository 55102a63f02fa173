"""``solve_lp``: presolve, scale, run the simplex engine, unscale and certify."""
from __future__ import annotations

import time

import numpy as np
import scipy.sparse as sp

from .kkt import check_kkt, verify_farkas
from .presolve import presolve
from .problem import LPProblem, LPSolution, ProblemError, Status
from .scaling import geometric_scaling
from .simplex import SimplexEngine, SimplexOptions


def _pow2(v):
    return float(np.exp2(np.round(np.log2(v)))) if v > 0 else 1.0


class ScaledLP:
    """Scaled internal copy of a problem plus the maps back to user space."""

    def __init__(self, problem: LPProblem, scale=True):
        A = problem.A
        m, n = A.shape
        if scale:
            r, s = geometric_scaling(A, max_log2=4)
        else:
            r, s = np.ones(m), np.ones(n)
        self.r, self.s = r, s
        cmax = np.max(np.abs(problem.c * s), initial=0.0)
        self.cscale = 1.0 / _pow2(cmax) if cmax > 0 else 1.0
        self.A = sp.csc_matrix(sp.diags(r) @ A @ sp.diags(s))
        rlo, rhi = problem.row_bounds()
        self.cost = np.concatenate([problem.c * s * self.cscale, np.zeros(m)])
        self.lo = np.concatenate([problem.lb / s, rlo * r])
        self.hi = np.concatenate([problem.ub / s, rhi * r])
        self.m, self.n = m, n

    def unscale(self, engine: SimplexEngine):
        n = self.n
        x = engine.x[:n] * self.s
        ys = engine.duals()
        y = ys * self.r / self.cscale
        d = engine.d[:n] / (self.s * self.cscale)
        return x, y, d


def solve_lp(problem: LPProblem, *, max_iter=None, time_limit=None, warm_start=None,
             presolve_enabled=True, scale=True, options: SimplexOptions | None = None,
             kkt_tol=1e-7, allow_integers=False) -> LPSolution:
    """Solve a linear program with the bounded revised simplex.

    ``warm_start`` is the ``basis`` attribute of an earlier solution of a
    problem with the same shape; it is ignored when presolve changes the
    reduced problem's shape.
    """
    t0 = time.perf_counter()
    problem.validate()
    if problem.integers.size and not allow_integers:
        raise ProblemError("solve_lp got integer columns; use solve_milp")
    opts = options or SimplexOptions()
    if max_iter is not None:
        opts.max_iter = max_iter
    if time_limit is not None:
        opts.time_limit = time_limit

    if presolve_enabled:
        pre = presolve(problem)
        if pre.status is not None:
            # rerun on the full problem so the answer carries a certificate
            sol = solve_lp(problem, warm_start=None, presolve_enabled=False, scale=scale,
                           options=opts, kkt_tol=kkt_tol, allow_integers=allow_integers)
            sol.message = f"presolve: {pre.message}; {sol.message}"
            return sol
        reduced = pre.reduced
    else:
        pre = None
        reduced = problem

    if reduced.num_rows == 0 or reduced.num_cols == 0:
        xr, yr, dr, status, iters, basis = _trivial(reduced)
        engine = None
        if status == Status.UNBOUNDED:
            ray = np.where(reduced.c > 0, -1.0, np.where(reduced.c < 0, 1.0, 0.0))
            ray = np.where(np.isfinite(xr), 0.0, ray)
            if pre is not None:
                ray = pre.expand_cols(ray)
            sol = LPSolution(Status.UNBOUNDED, ray=ray, message="unbounded column without rows")
            sol.solve_time = time.perf_counter() - t0
            return sol
    else:
        sc = ScaledLP(reduced, scale=scale)
        engine = SimplexEngine(sc.A, sc.cost, sc.lo, sc.hi, opts)
        warm = None
        if warm_start is not None and warm_start[0] == _signature(pre, reduced):
            warm = warm_start[1]
        res = engine.solve(warm)
        iters = engine.iterations
        basis = (_signature(pre, reduced), engine.basis())
        if res == "optimal":
            xr, yr, dr = sc.unscale(engine)
            status = Status.OPTIMAL
        elif res == "infeasible":
            rho, _ = engine.farkas
            y_cert = rho * sc.r
            if pre is not None:
                y_cert = pre.expand_rows(y_cert)
            sol = LPSolution(Status.INFEASIBLE, iterations=iters, farkas=y_cert,
                             basis=basis, message="dual ray found in the ratio test")
            sol.solve_time = time.perf_counter() - t0
            return sol
        elif res == "unbounded":
            ray = engine.ray[: sc.n] * sc.s
            if pre is not None:
                ray = pre.expand_cols(ray)
            sol = LPSolution(Status.UNBOUNDED, iterations=iters, ray=ray, basis=basis,
                             message="primal ray found in the ratio test")
            sol.solve_time = time.perf_counter() - t0
            return sol
        else:
            sol = LPSolution(Status.ITERATION_LIMIT, iterations=iters, basis=basis,
                             message=getattr(engine, "limit_message", "limit"))
            if not engine.dual_infeasible_set().size:
                sol.bound = engine.objective() / sc.cscale + reduced.obj_offset
            sol.solve_time = time.perf_counter() - t0
            return sol

    if pre is not None:
        x, y, d = pre.postsolve(xr, yr, dr)
    else:
        x, y, d = xr, yr, dr
    report = check_kkt(problem, x, y, d, tol=kkt_tol)
    sol = LPSolution(status, x=x, y=y, d=d, objective=problem.objective(x),
                     iterations=iters, residuals=report, basis=basis)
    sol.bound = sol.objective
    sol.solve_time = time.perf_counter() - t0
    return sol


def _signature(pre, reduced):
    if pre is None:
        return (reduced.num_rows, reduced.num_cols)
    return (reduced.num_rows, reduced.num_cols, pre.row_key, pre.col_key)


def _trivial(p: LPProblem):
    """Problems with no rows or no columns left after presolve."""
    n = p.num_cols
    x = np.where(p.c > 0, p.lb, np.where(p.c < 0, p.ub, np.clip(0.0, p.lb, p.ub)))
    y = np.zeros(p.num_rows)
    d = p.c.copy()
    status = Status.OPTIMAL if np.all(np.isfinite(x)) else Status.UNBOUNDED
    return x, y, d, status, 0, None
