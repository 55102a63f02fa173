"""Simple presolve: empty and free rows, fixed and empty columns, singleton rows.

Every reduction has a dual postsolve so that solutions of the reduced problem
map back to certified primal/dual pairs of the original.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.sparse as sp

from .problem import LPProblem, Status

FEAS_TOL = 1e-9


def _key(mask):
    return hashlib.sha1(np.packbits(mask).tobytes()).hexdigest()


@dataclass
class Presolved:
    original: LPProblem
    reduced: Optional[LPProblem] = None
    status: Optional[Status] = None
    message: str = ""
    farkas: Optional[np.ndarray] = None
    row_keep: np.ndarray = None
    col_keep: np.ndarray = None
    x_fixed: np.ndarray = None
    lb_src: np.ndarray = None
    ub_src: np.ndarray = None
    lb_new: np.ndarray = None
    ub_new: np.ndarray = None
    singleton_order: list = field(default_factory=list)

    @property
    def row_key(self):
        return _key(self.row_keep)

    @property
    def col_key(self):
        return _key(self.col_keep)

    def expand_rows(self, y_red):
        y = np.zeros(self.original.num_rows)
        y[self.row_keep] = y_red
        return y

    def expand_cols(self, x_red):
        x = np.zeros(self.original.num_cols)
        x[self.col_keep] = x_red
        return x

    def postsolve(self, x_red, y_red, d_red):
        P = self.original
        x = self.x_fixed.copy()
        x[self.col_keep] = x_red
        y = self.expand_rows(y_red)
        csc = P.A.tocsc()
        # undo singleton rows last-removed first: a row's dual shifts the reduced
        # costs of columns fixed before it became a singleton
        for i, j, a in reversed(self.singleton_order):
            if self.lb_src[j] != i and self.ub_src[j] != i:
                continue
            lo, hi = csc.indptr[j], csc.indptr[j + 1]
            dj = P.c[j] - csc.data[lo:hi] @ y[csc.indices[lo:hi]]
            if dj > 0 and self.lb_src[j] == i and x[j] <= self.lb_new[j] + FEAS_TOL:
                y[i] += dj / a
            elif dj < 0 and self.ub_src[j] == i and x[j] >= self.ub_new[j] - FEAS_TOL:
                y[i] += dj / a
        d = P.c - P.A.T @ y
        return x, y, d


def presolve(P: LPProblem) -> Presolved:
    m, n = P.A.shape
    A = P.A.tocsr()
    csc = P.A.tocsc()
    rlo, rhi = P.row_bounds()
    rlo, rhi = rlo.copy(), rhi.copy()
    lb, ub = P.lb.copy(), P.ub.copy()
    row_keep = np.ones(m, dtype=bool)
    col_keep = np.ones(n, dtype=bool)
    x_fixed = np.zeros(n)
    lb_src = np.full(n, -1, dtype=np.int64)
    ub_src = np.full(n, -1, dtype=np.int64)
    out = Presolved(P)

    row_nnz = np.diff(A.indptr).astype(np.int64)
    col_nnz = np.diff(csc.indptr).astype(np.int64)
    row_act_shift = np.zeros(m)

    def fail(status, msg):
        out.status = status
        out.message = msg
        return out

    def remove_col(j, value):
        col_keep[j] = False
        x_fixed[j] = value
        lo, hi = csc.indptr[j], csc.indptr[j + 1]
        rows = csc.indices[lo:hi]
        vals = csc.data[lo:hi]
        live = row_keep[rows]
        row_act_shift[rows[live]] += vals[live] * value
        row_nnz[rows[live]] -= 1

    def remove_row(i):
        row_keep[i] = False
        lo, hi = A.indptr[i], A.indptr[i + 1]
        cols = A.indices[lo:hi]
        col_nnz[cols[col_keep[cols]]] -= 1

    changed = True
    while changed:
        changed = False
        # fixed columns
        for j in np.flatnonzero(col_keep & (lb == ub)):
            remove_col(j, lb[j])
            changed = True
        # rows
        for i in np.flatnonzero(row_keep):
            lo_i = rlo[i] - row_act_shift[i]
            hi_i = rhi[i] - row_act_shift[i]
            if row_nnz[i] == 0:
                tol = FEAS_TOL * (1.0 + abs(rlo[i] if np.isfinite(rlo[i]) else 0.0)
                                  + abs(rhi[i] if np.isfinite(rhi[i]) else 0.0))
                if lo_i > tol or hi_i < -tol:
                    return fail(Status.INFEASIBLE, f"row {i} is empty but requires activity")
                remove_row(i)
                changed = True
            elif not np.isfinite(rlo[i]) and not np.isfinite(rhi[i]):
                remove_row(i)
                changed = True
            elif row_nnz[i] == 1:
                lo, hi = A.indptr[i], A.indptr[i + 1]
                cols = A.indices[lo:hi]
                vals = A.data[lo:hi]
                live = col_keep[cols]
                j = cols[live][0]
                a = vals[live][0]
                if a > 0:
                    new_lo, new_hi = lo_i / a, hi_i / a
                else:
                    new_lo, new_hi = hi_i / a, lo_i / a
                if new_lo > lb[j]:
                    lb[j] = new_lo
                    lb_src[j] = i
                if new_hi < ub[j]:
                    ub[j] = new_hi
                    ub_src[j] = i
                if lb[j] > ub[j]:
                    tol = FEAS_TOL * (1.0 + abs(lb[j]) + abs(ub[j]))
                    if lb[j] - ub[j] > tol:
                        return fail(Status.INFEASIBLE, f"singleton row {i} empties column {j}")
                    ub[j] = lb[j]
                out.singleton_order.append((i, j, a))
                remove_row(i)
                changed = True
        # empty columns
        for j in np.flatnonzero(col_keep & (col_nnz == 0)):
            cj = P.c[j]
            if cj > 0:
                v = lb[j]
            elif cj < 0:
                v = ub[j]
            else:
                v = min(max(0.0, lb[j]), ub[j])
            if not np.isfinite(v):
                return fail(Status.UNBOUNDED, f"column {j} improves the objective without limit")
            remove_col(j, v)
            changed = True

    rows = np.flatnonzero(row_keep)
    cols = np.flatnonzero(col_keep)
    Ared = A[rows][:, cols]
    rl = rlo[rows] - row_act_shift[rows]
    rh = rhi[rows] - row_act_shift[rows]
    senses = np.where(rl == rh, "E", np.where(np.isfinite(rl), "G", "L"))
    rhs = np.where(senses == "L", rh, rl)
    offset = P.obj_offset + float(P.c[~col_keep] @ x_fixed[~col_keep])
    out.reduced = LPProblem(P.c[cols], Ared, senses, rhs, lb[cols], ub[cols],
                            obj_offset=offset, name=P.name)
    out.row_keep = row_keep
    out.col_keep = col_keep
    out.x_fixed = x_fixed
    out.lb_src, out.ub_src = lb_src, ub_src
    out.lb_new, out.ub_new = lb, ub
    return out
