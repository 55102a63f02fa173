"""Pure-Python/numpy implementations of the simplex inner kernels.

Every function here has a twin with the same signature in ``_kernels.pyx``.
Arrays are modified in place where noted.
"""
import numpy as np

BASIC = 0
AT_LOWER = 1
AT_UPPER = 2
FREE = 3
FIXED = 4


def eta_ftran(x, piv, pval, start, idx, val, count):
    """Apply the first ``count`` eta transformations to ``x`` in order."""
    for k in range(count):
        p = piv[k]
        xp = x[p]
        if xp == 0.0:
            continue
        xp = xp / pval[k]
        x[p] = xp
        lo, hi = start[k], start[k + 1]
        if hi > lo:
            x[idx[lo:hi]] -= val[lo:hi] * xp


def eta_btran(x, piv, pval, start, idx, val, count):
    """Apply the transposed eta transformations to ``x`` in reverse order."""
    for k in range(count - 1, -1, -1):
        p = piv[k]
        lo, hi = start[k], start[k + 1]
        s = x[p]
        if hi > lo:
            s -= np.dot(val[lo:hi], x[idx[lo:hi]])
        x[p] = s / pval[k]


def dual_chuzr(xb, lob, hib, weights, tol):
    """Leaving row by dual steepest edge; -1 when the basis is primal feasible."""
    below = lob - xb
    above = xb - hib
    infeas = np.maximum(below, above)
    infeas[infeas <= tol] = 0.0
    if not infeas.any():
        return -1
    score = infeas * infeas / weights
    return int(np.argmax(score))


def dual_chuzr_bland(xb, lob, hib, head, tol):
    """Leaving row holding the infeasible basic variable of smallest index."""
    bad = np.flatnonzero((lob - xb > tol) | (xb - hib > tol))
    if bad.size == 0:
        return -1
    return int(bad[np.argmin(head[bad])])


def dual_ratio(d, alpha, status, direction, piv_tol, dual_tol, bland):
    """Harris two-pass dual ratio test.

    ``direction`` is +1 when the leaving variable must increase to its lower
    bound and -1 when it must decrease to its upper bound. Returns the
    entering index or -1 when no candidate exists (dual unbounded).
    """
    a = alpha * direction
    at_lo = (status == AT_LOWER) & (a < -piv_tol)
    at_hi = (status == AT_UPPER) & (a > piv_tol)
    free = (status == FREE) & (np.abs(a) > piv_tol)
    cand = np.flatnonzero(at_lo | at_hi | free)
    if cand.size == 0:
        return -1
    abs_a = np.abs(a[cand])
    dc = np.abs(d[cand])
    # wrong-signed reduced costs within tolerance are treated as zero
    wrong = ((status[cand] == AT_LOWER) & (d[cand] < 0.0)) | (
        (status[cand] == AT_UPPER) & (d[cand] > 0.0))
    dc[wrong] = 0.0
    dc[status[cand] == FREE] = 0.0
    if bland:
        ratios = dc / abs_a
        tmin = ratios.min()
        ties = cand[ratios <= tmin + dual_tol]
        return int(ties.min())
    tmax = ((dc + dual_tol) / abs_a).min()
    ok = dc / abs_a <= tmax
    sel = np.flatnonzero(ok)
    return int(cand[sel[np.argmax(abs_a[sel])]])


def dse_update(weights, alpha, tau, r, wr):
    """Dual steepest-edge weight update after a pivot in row ``r``."""
    ar = alpha[r]
    ratio = alpha / ar
    w = weights - 2.0 * ratio * tau + ratio * ratio * wr
    np.maximum(w, ratio * ratio, out=w)
    np.maximum(w, 1e-12, out=w)
    w[r] = max(wr / (ar * ar), 1e-12)
    weights[:] = w


def update_duals(d, alpha_row, status, theta):
    """Reduced-cost update ``d_j -= theta * alpha_j`` over nonbasic columns, in place."""
    nb = status != BASIC
    d[nb] -= theta * alpha_row[nb]


def primal_ratio(xb, lob, hib, alpha, direction, piv_tol, tol, bland, head):
    """Harris two-pass primal ratio test.

    The entering variable moves by ``direction * t`` so basic variables move
    by ``-direction * t * alpha``. Returns ``(row, t)``; row is -1 when no
    basic variable blocks.
    """
    a = alpha * direction
    dec = a > piv_tol
    inc = a < -piv_tol
    dec &= np.isfinite(lob)
    inc &= np.isfinite(hib)
    rows = np.flatnonzero(dec | inc)
    if rows.size == 0:
        return -1, np.inf
    ar = a[rows]
    xr = xb[rows]
    room = np.where(ar > 0.0, xr - np.where(ar > 0.0, lob[rows], 0.0),
                    np.where(ar < 0.0, hib[rows], 0.0) - xr)
    room = np.maximum(room, 0.0)
    abs_a = np.abs(ar)
    if bland:
        ratios = room / abs_a
        tmin = ratios.min()
        ties = rows[ratios <= tmin + tol]
        sel = ties[np.argmin(head[ties])]
        return int(sel), float(room[rows == sel][0] / abs_a[rows == sel][0])
    tmax = ((room + tol) / abs_a).min()
    ratios = room / abs_a
    ok = np.flatnonzero(ratios <= tmax)
    best = ok[np.argmax(abs_a[ok])]
    return int(rows[best]), float(ratios[best])


def primal_price(d, status, tol, bland):
    """Entering candidate for the primal simplex (Dantzig or Bland)."""
    viol = np.zeros_like(d)
    lo = status == AT_LOWER
    hi = status == AT_UPPER
    fr = status == FREE
    viol[lo] = -d[lo]
    viol[hi] = d[hi]
    viol[fr] = np.abs(d[fr])
    viol[viol <= tol] = 0.0
    if not viol.any():
        return -1
    if bland:
        return int(np.flatnonzero(viol)[0])
    return int(np.argmax(viol))
