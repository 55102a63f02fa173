"""Optimality residuals and certificate checks for :class:`LPProblem` solutions."""
import numpy as np

from .problem import KKTReport, LPProblem


def _rel(v, scale):
    return float(v) / (1.0 + float(scale))


def check_kkt(problem: LPProblem, x, y, d=None, tol=1e-7) -> KKTReport:
    """Scaled primal, dual and complementarity residuals of ``(x, y)``.

    Row duals follow the convention ``d = c - A'y``: ``y_i >= 0`` on binding
    ``>=`` rows, ``<= 0`` on binding ``<=`` rows. Residuals are divided by
    ``1 + magnitude`` of the quantities involved so they are unit free.
    """
    A = problem.A
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if d is None:
        d = problem.c - A.T @ y
    act = A @ x
    rlo, rhi = problem.row_bounds()

    # primal: row and column bound violations
    rv = np.maximum(np.maximum(rlo - act, act - rhi), 0.0)
    cv = np.maximum(np.maximum(problem.lb - x, x - problem.ub), 0.0)
    bscale = max(np.max(np.abs(problem.rhs), initial=0.0),
                 np.max(np.abs(x), initial=0.0))
    primal = _rel(max(np.max(rv, initial=0.0), np.max(cv, initial=0.0)), bscale)

    # dual: sign of reduced costs and row duals relative to the side that may bind
    cscale = np.max(np.abs(problem.c), initial=0.0)
    dviol = np.zeros_like(d)
    dviol = np.where(np.isfinite(problem.lb), dviol, np.maximum(dviol, d))
    dviol = np.where(np.isfinite(problem.ub), dviol, np.maximum(dviol, -d))
    yviol = np.zeros_like(y)
    yviol = np.where(np.isfinite(rlo), yviol, np.maximum(yviol, y))
    yviol = np.where(np.isfinite(rhi), yviol, np.maximum(yviol, -y))
    dres = np.abs(d - (problem.c - A.T @ y))
    dual = _rel(max(np.max(dviol, initial=0.0), np.max(yviol, initial=0.0),
                    np.max(dres, initial=0.0)), cscale)

    # complementarity: positive parts must sit at the matching bound
    gap_lo = np.where(np.isfinite(problem.lb), x - problem.lb, np.inf)
    gap_hi = np.where(np.isfinite(problem.ub), problem.ub - x, np.inf)
    with np.errstate(invalid="ignore"):
        comp_c = np.where((d > 0) & np.isfinite(gap_lo), d * gap_lo, 0.0)
        comp_c = np.maximum(comp_c, np.where((d < 0) & np.isfinite(gap_hi), -d * gap_hi, 0.0))
    rgap_lo = np.where(np.isfinite(rlo), act - rlo, np.inf)
    rgap_hi = np.where(np.isfinite(rhi), rhi - act, np.inf)
    with np.errstate(invalid="ignore"):
        comp_r = np.where((y > 0) & np.isfinite(rgap_lo), y * rgap_lo, 0.0)
        comp_r = np.maximum(comp_r, np.where((y < 0) & np.isfinite(rgap_hi), -y * rgap_hi, 0.0))
    pobj = float(problem.c @ x)
    comp = _rel(max(np.max(comp_c, initial=0.0), np.max(comp_r, initial=0.0)), abs(pobj))

    dobj = dual_objective(problem, y, d, x)
    gap = abs(pobj - dobj) / (1.0 + abs(pobj))

    flags = []
    if not primal <= tol:
        flags.append("primal")
    if not dual <= tol:
        flags.append("dual")
    if not comp <= tol:
        flags.append("complementarity")
    if not gap <= 1e-6:
        flags.append("gap")
    return KKTReport(primal, dual, comp, gap, tol, flags=flags)


def dual_objective(problem: LPProblem, y, d, x=None):
    """Dual objective ``sum y_i b_i + sum d_j bound_j`` with bounds picked by sign.

    Where the sign points at an infinite bound (a dual infeasibility, reported
    separately) the primal value stands in for the bound.
    """
    rlo, rhi = problem.row_bounds()
    if x is None:
        x = np.zeros(problem.num_cols)
    act = problem.A @ x
    yb = np.where(y > 0, rlo, np.where(y < 0, rhi, 0.0))
    yb = np.where(np.isfinite(yb), yb, act)
    db = np.where(d > 0, problem.lb, np.where(d < 0, problem.ub, 0.0))
    db = np.where(np.isfinite(db), db, x)
    return float(y @ yb + d @ db)


def verify_farkas(problem: LPProblem, y, tol=1e-7):
    """True if ``y`` proves ``A x = r`` has no solution within the column and row bounds.

    With ``g = A'y`` the ranges of ``g'x`` over the column box and of ``y'r``
    over the row box must be disjoint.
    """
    y = np.asarray(y, dtype=float)
    g = problem.A.T @ y
    rlo, rhi = problem.row_bounds()
    gx_lo, gx_hi = _box_range(g, problem.lb, problem.ub, tol)
    yr_lo, yr_hi = _box_range(y, rlo, rhi, tol)
    scale = 1.0 + np.sum(np.abs(g)) + np.sum(np.abs(y))
    margin = tol * scale
    return bool(gx_hi < yr_lo - margin or yr_hi < gx_lo - margin)


def _box_range(coef, lo, hi, tol):
    c = np.where(np.abs(coef) <= tol * 1e-3, 0.0, coef)
    with np.errstate(invalid="ignore"):
        low = np.where(c > 0, c * lo, np.where(c < 0, c * hi, 0.0))
        high = np.where(c > 0, c * hi, np.where(c < 0, c * lo, 0.0))
    return float(np.sum(low)), float(np.sum(high))
