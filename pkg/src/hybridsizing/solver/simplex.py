"""Bounded-variable revised simplex on the computational form ``A x - r = 0``.

Structural variables ``x`` (``n`` of them) and row activities ``r`` (``m``
logical variables) both carry lower/upper bounds; the full column set is
``[A  -I]``. The engine runs dual phase 2 from a dual feasible basis (the
slack basis is dual feasible whenever costs are nonnegative), falls back to
artificial bounding when it is not, and finishes with primal phase 2 when the
dual pass leaves reduced-cost violations behind.
"""
from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.sparse as sp

from .factor import BasisFactor, SingularBasisError
from .kernels import get_kernels
from ._kernels_py import AT_LOWER, AT_UPPER, BASIC, FIXED, FREE


@dataclass
class SimplexOptions:
    primal_tol: float = 1e-9
    dual_tol: float = 1e-9
    pivot_tol: float = 1e-7
    refactor_every: int = 100
    drift_tol: float = 1e-9
    drift_check_every: int = 10
    max_iter: Optional[int] = None
    time_limit: Optional[float] = None
    bland_after: int = 1000
    artificial_bound: float = 1e7
    dse: bool = True
    kernels: Optional[str] = None
    log_every: int = 0


class LimitReached(Exception):
    pass


class SimplexEngine:
    def __init__(self, A, cost, lo, hi, options: SimplexOptions | None = None):
        self.opt = options or SimplexOptions()
        self.k = get_kernels(self.opt.kernels)
        self.A = sp.csc_matrix(A)
        self.A.sort_indices()
        self.AT = sp.csr_matrix(self.A.T)
        self.m, self.n = self.A.shape
        N = self.n + self.m
        self.cost = np.asarray(cost, dtype=float).copy()
        self.lo = np.asarray(lo, dtype=float).copy()
        self.hi = np.asarray(hi, dtype=float).copy()
        assert self.cost.shape == (N,) and self.lo.shape == (N,) and self.hi.shape == (N,)
        self.factor = BasisFactor(self.A, self.k, self.opt.refactor_every)
        self.iterations = 0
        self.degenerate_run = 0
        self.weights = np.ones(self.m)
        self.x = np.zeros(N)
        self.d = np.zeros(N)
        self.head = None
        self.status = None
        self.art_lo = np.zeros(0, dtype=np.int64)
        self.art_hi = np.zeros(0, dtype=np.int64)
        self._t0 = time.perf_counter()
        self._fresh = False
        self._since_check = 0
        self.farkas = None
        self.ray = None

    # ------------------------------------------------------------------ basis
    def _nonbasic_status(self, j):
        lo, hi = self.lo[j], self.hi[j]
        if lo == hi:
            return FIXED
        if np.isfinite(lo):
            return AT_LOWER
        if np.isfinite(hi):
            return AT_UPPER
        return FREE

    def _place_nonbasic(self, idx):
        lo, hi = self.lo[idx], self.hi[idx]
        st = np.full(idx.size, FREE, dtype=np.int8)
        val = np.zeros(idx.size)
        fin_lo = np.isfinite(lo)
        fin_hi = np.isfinite(hi)
        st[fin_hi] = AT_UPPER
        val[fin_hi] = hi[fin_hi]
        st[fin_lo] = AT_LOWER
        val[fin_lo] = lo[fin_lo]
        fixed = lo == hi
        st[fixed] = FIXED
        self.status[idx] = st
        self.x[idx] = val

    def set_slack_basis(self):
        N = self.n + self.m
        self.head = np.arange(self.n, N, dtype=np.int64)
        self.status = np.zeros(N, dtype=np.int8)
        self._place_nonbasic(np.arange(self.n))
        self.status[self.head] = BASIC
        self.weights = np.ones(self.m)

    def set_basis(self, head, status, x=None):
        """Install a warm-start basis; nonbasic statuses are re-validated against bounds."""
        N = self.n + self.m
        head = np.asarray(head, dtype=np.int64)
        status = np.asarray(status, dtype=np.int8)
        if head.shape != (self.m,) or status.shape != (N,):
            raise ValueError("warm-start basis has the wrong shape")
        self.head = head.copy()
        self.status = status.copy()
        nb = np.flatnonzero(self.status != BASIC)
        self._place_nonbasic(nb)
        keep_hi = nb[(status[nb] == AT_UPPER) & np.isfinite(self.hi[nb]) & (self.lo[nb] != self.hi[nb])]
        self.status[keep_hi] = AT_UPPER
        self.x[keep_hi] = self.hi[keep_hi]
        self.status[self.head] = BASIC
        self.weights = np.ones(self.m)

    def basis(self):
        return self.head.copy(), self.status.copy()

    # ------------------------------------------------------------ linear algebra
    def column(self, j):
        v = np.zeros(self.m)
        if j < self.n:
            lo, hi = self.A.indptr[j], self.A.indptr[j + 1]
            v[self.A.indices[lo:hi]] = self.A.data[lo:hi]
        else:
            v[j - self.n] = -1.0
        return v

    def row_of_inverse(self, r):
        e = np.zeros(self.m)
        e[r] = 1.0
        return self.factor.btran(e)

    def pivot_row(self, rho):
        out = np.empty(self.n + self.m)
        out[: self.n] = self.AT @ rho
        out[self.n:] = -rho
        return out

    def refactor(self):
        try:
            self.factor.factorize(self.head)
        except SingularBasisError:
            self._repair_basis()
            self.factor.factorize(self.head)
        self.compute_primal()
        self.compute_dual()
        self._fresh = True
        self._since_check = 0

    def _repair_basis(self):
        """Swap dependent basic columns for logicals using a rank-revealing QR."""
        from scipy.linalg import qr

        B = self.factor.basis_matrix(self.head).toarray()
        _, R, perm = qr(B, pivoting=True, mode="economic")
        diag = np.abs(np.diag(R))
        tol = max(B.shape) * np.finfo(float).eps * (diag[0] if diag.size else 1.0) * 1e3
        rank = int(np.sum(diag > tol))
        keep = np.sort(perm[:rank])
        covered = np.zeros(self.m, dtype=bool)
        kept_cols = self.head[keep]
        Bk = B[:, keep]
        # pick logicals for the rows least represented by the kept columns
        _, _, rperm = qr(Bk.T, pivoting=True, mode="economic")
        covered[rperm[:rank]] = True
        free_rows = np.flatnonzero(~covered)
        drop = np.setdiff1d(np.arange(self.m), keep)
        dropped_vars = self.head[drop]
        new_head = self.head.copy()
        for pos, row in zip(drop, free_rows):
            new_head[pos] = self.n + row
        self.head = new_head
        self.status[kept_cols] = BASIC
        self.status[self.head] = BASIC
        leaving = np.setdiff1d(dropped_vars, self.head)
        self._place_nonbasic(leaving)
        self.weights = np.ones(self.m)

    def compute_primal(self):
        xn = self.x.copy()
        xn[self.head] = 0.0
        v = -(self.A @ xn[: self.n]) + xn[self.n:]
        self.x[self.head] = self.factor.ftran(v)

    def compute_dual(self):
        y = self.factor.btran(self.cost[self.head])
        d = np.empty(self.n + self.m)
        d[: self.n] = self.cost[: self.n] - self.AT @ y
        d[self.n:] = self.cost[self.n:] + y
        d[self.head] = 0.0
        self.d = d

    def duals(self):
        return self.factor.btran(self.cost[self.head])

    def primal_drift(self):
        res = self.A @ self.x[: self.n] - self.x[self.n:]
        scale = 1.0 + np.max(np.abs(self.x)) if self.x.size else 1.0
        return float(np.max(np.abs(res))) / scale if res.size else 0.0

    # --------------------------------------------------------------- feasibility
    def primal_infeasibility(self):
        xb = self.x[self.head]
        lo = self.lo[self.head]
        hi = self.hi[self.head]
        v = np.maximum(lo - xb, xb - hi)
        return float(v.max()) if v.size else 0.0

    def dual_infeasible_set(self):
        st, d, tol = self.status, self.d, self.opt.dual_tol
        bad = ((st == AT_LOWER) & (d < -tol)) | ((st == AT_UPPER) & (d > tol)) | (
            (st == FREE) & (np.abs(d) > tol))
        return np.flatnonzero(bad)

    def flip_boxed(self):
        """Move boxed nonbasic variables with wrong-signed reduced costs to the other bound."""
        bad = self.dual_infeasible_set()
        boxed = bad[np.isfinite(self.lo[bad]) & np.isfinite(self.hi[bad])]
        if boxed.size == 0:
            return 0
        to_hi = boxed[self.d[boxed] < 0]
        to_lo = boxed[self.d[boxed] > 0]
        delta = np.zeros(self.n + self.m)
        delta[to_hi] = self.hi[to_hi] - self.x[to_hi]
        delta[to_lo] = self.lo[to_lo] - self.x[to_lo]
        self.x[to_hi] = self.hi[to_hi]
        self.x[to_lo] = self.lo[to_lo]
        self.status[to_hi] = AT_UPPER
        self.status[to_lo] = AT_LOWER
        v = -(self.A @ delta[: self.n]) + delta[self.n:]
        self.x[self.head] += self.factor.ftran(v)
        return boxed.size

    # --------------------------------------------------------------- iteration
    def _check_limits(self):
        o = self.opt
        if o.max_iter is not None and self.iterations >= o.max_iter:
            raise LimitReached("iteration limit")
        if o.time_limit is not None and time.perf_counter() - self._t0 > o.time_limit:
            raise LimitReached("time limit")

    def _maintain(self):
        self._check_limits()
        if self.factor.needs_refactor:
            self.refactor()
            return
        self._since_check += 1
        if self._since_check >= self.opt.drift_check_every:
            self._since_check = 0
            if self.primal_drift() > self.opt.drift_tol:
                self.refactor()

    def _log(self, phase):
        if self.opt.log_every and self.iterations % self.opt.log_every == 0:
            print(f"[{phase}] it={self.iterations} pinf={self.primal_infeasibility():.3e} "
                  f"obj={self.cost @ self.x:.10g} t={time.perf_counter() - self._t0:.1f}s")

    def _bland(self):
        return self.degenerate_run >= self.opt.bland_after

    def dual_phase2(self):
        """Returns ``"optimal"`` or ``"infeasible"``; raises LimitReached."""
        o, k = self.opt, self.k
        while True:
            self._maintain()
            head = self.head
            xb = self.x[head]
            lob = self.lo[head]
            hib = self.hi[head]
            if self._bland():
                r = k.dual_chuzr_bland(xb, lob, hib, head, o.primal_tol)
            else:
                r = k.dual_chuzr(xb, lob, hib, self.weights, o.primal_tol)
            if r < 0:
                if not self._fresh:
                    self.refactor()
                    continue
                return "optimal"
            p = head[r]
            direction = 1.0 if xb[r] < lob[r] else -1.0
            rho = self.row_of_inverse(r)
            if o.dse:
                self.weights[r] = max(float(rho @ rho), 1e-12)
            alpha_row = self.pivot_row(rho)
            q = k.dual_ratio(self.d, alpha_row, self.status, direction, o.pivot_tol,
                             o.dual_tol, self._bland())
            if q < 0:
                if not self._fresh:
                    self.refactor()
                    continue
                self.farkas = (rho * direction, r)
                return "infeasible"
            alpha_q = self.factor.ftran(self.column(q))
            arq = alpha_q[r]
            if abs(arq - alpha_row[q]) > 1e-7 * (1.0 + abs(arq)) or abs(arq) < o.pivot_tol:
                if not self._fresh:
                    self.refactor()
                    continue
            tau = self.factor.ftran(rho) if o.dse else None
            bound = lob[r] if direction > 0 else hib[r]
            dxq = (xb[r] - bound) / arq
            self.x[head] -= dxq * alpha_q
            self.x[q] += dxq
            self.x[p] = bound
            theta = self.d[q] / arq
            k.update_duals(self.d, alpha_row, self.status, theta)
            self.d[p] = -theta
            self.d[q] = 0.0
            if abs(theta) <= o.dual_tol:
                self.degenerate_run += 1
            else:
                self.degenerate_run = 0
            if o.dse:
                k.dse_update(self.weights, alpha_q, tau, r, self.weights[r])
            if self.lo[p] == self.hi[p]:
                self.status[p] = FIXED
            else:
                self.status[p] = AT_LOWER if direction > 0 else AT_UPPER
            self.status[q] = BASIC
            head[r] = q
            self.factor.update(r, alpha_q)
            self.iterations += 1
            self._fresh = False
            self._log("dual")

    def primal_phase2(self):
        """Returns ``"optimal"`` or ``"unbounded"``; raises LimitReached."""
        o, k = self.opt, self.k
        self.compute_dual()
        while True:
            self._maintain()
            q = k.primal_price(self.d, self.status, o.dual_tol, self._bland())
            if q < 0:
                if not self._fresh:
                    self.refactor()
                    continue
                self.weights = np.ones(self.m)
                return "optimal"
            direction = -1.0 if self.d[q] > 0 else 1.0
            alpha_q = self.factor.ftran(self.column(q))
            head = self.head
            r, t = k.primal_ratio(self.x[head], self.lo[head], self.hi[head], alpha_q,
                                  direction, o.pivot_tol, o.primal_tol, self._bland(), head)
            own = self.hi[q] - self.x[q] if direction > 0 else self.x[q] - self.lo[q]
            if np.isfinite(own) and own <= t:
                # bound flip of the entering variable
                self.x[head] -= direction * own * alpha_q
                self.x[q] += direction * own
                self.status[q] = AT_UPPER if direction > 0 else AT_LOWER
                self.iterations += 1
                self._fresh = False
                continue
            if r < 0:
                if not self._fresh:
                    self.refactor()
                    continue
                ray = np.zeros(self.n + self.m)
                ray[q] = direction
                ray[head] = -direction * alpha_q
                self.ray = ray
                return "unbounded"
            p = head[r]
            rho = self.row_of_inverse(r)
            alpha_row = self.pivot_row(rho)
            arq = alpha_q[r]
            if abs(arq - alpha_row[q]) > 1e-7 * (1.0 + abs(arq)) and not self._fresh:
                self.refactor()
                continue
            to_lower = direction * arq > 0
            bound = self.lo[p] if to_lower else self.hi[p]
            self.x[head] -= direction * t * alpha_q
            self.x[q] += direction * t
            self.x[p] = bound
            theta = self.d[q] / arq
            k.update_duals(self.d, alpha_row, self.status, theta)
            self.d[p] = -theta
            self.d[q] = 0.0
            if t <= o.primal_tol:
                self.degenerate_run += 1
            else:
                self.degenerate_run = 0
            if self.lo[p] == self.hi[p]:
                self.status[p] = FIXED
            else:
                self.status[p] = AT_LOWER if to_lower else AT_UPPER
            self.status[q] = BASIC
            head[r] = q
            self.factor.update(r, alpha_q)
            self.iterations += 1
            self._fresh = False
            self._log("primal")

    # ----------------------------------------------------------------- driver
    def _apply_artificial_bounds(self, big):
        bad = self.dual_infeasible_set()
        neg = bad[(self.d[bad] < 0) & ~np.isfinite(self.hi[bad])]
        pos = bad[(self.d[bad] > 0) & ~np.isfinite(self.lo[bad])]
        self.art_hi = np.union1d(self.art_hi, neg)
        self.art_lo = np.union1d(self.art_lo, pos)
        self.hi[neg] = np.maximum(big, self.x[neg] + big)
        self.lo[pos] = np.minimum(-big, self.x[pos] - big)
        return neg.size + pos.size

    def _remove_artificial_bounds(self):
        at_art = []
        for idx, side in ((self.art_hi, self.hi), (self.art_lo, self.lo)):
            for j in idx:
                if self.status[j] != BASIC and self.x[j] == side[j]:
                    at_art.append(j)
                side[j] = np.inf if side is self.hi else -np.inf
        self.art_lo = np.zeros(0, dtype=np.int64)
        self.art_hi = np.zeros(0, dtype=np.int64)
        for j in at_art:
            self.status[j] = FREE
        # keep nonbasic statuses consistent with the restored bounds
        nb = np.flatnonzero(self.status != BASIC)
        st = self.status[nb]
        xv = self.x[nb]
        stale = ((st == AT_UPPER) & ~np.isfinite(self.hi[nb])) | (
            (st == AT_LOWER) & ~np.isfinite(self.lo[nb]))
        self.status[nb[stale]] = FREE
        return len(at_art)

    def solve(self, warm=None):
        """Run the simplex; returns one of optimal/infeasible/unbounded/limit."""
        self._t0 = time.perf_counter()
        if warm is None:
            self.set_slack_basis()
        else:
            self.set_basis(*warm)
        try:
            self.refactor()
            return self._solve_loop()
        except LimitReached as exc:
            self.limit_message = str(exc)
            return "limit"

    def _solve_loop(self):
        big = self.opt.artificial_bound
        for _ in range(8):
            self.flip_boxed()
            if self.dual_infeasible_set().size:
                if self.primal_infeasibility() <= self.opt.primal_tol:
                    res = self.primal_phase2()
                    if res == "unbounded":
                        return res
                    continue
                self._apply_artificial_bounds(big)
                self.flip_boxed()
            res = self.dual_phase2()
            if res == "infeasible":
                if self.art_lo.size or self.art_hi.size:
                    if self._farkas_uses_artificial():
                        big *= 1e3
                        self._remove_artificial_bounds()
                        self.refactor()
                        continue
                return "infeasible"
            if self.art_lo.size or self.art_hi.size:
                self._remove_artificial_bounds()
                self.refactor()
            if self.dual_infeasible_set().size:
                res = self.primal_phase2()
                if res == "unbounded":
                    return res
            self.refactor()
            if (self.primal_infeasibility() <= self.opt.primal_tol * 10
                    and not self.dual_infeasible_set().size):
                return "optimal"
        return "optimal" if self.primal_infeasibility() <= 1e-6 else "limit"

    def _farkas_uses_artificial(self):
        rho, r = self.farkas
        g = self.pivot_row(rho)
        used = np.concatenate([self.art_lo, self.art_hi])
        return bool(np.any(np.abs(g[used]) > self.opt.pivot_tol))

    def objective(self):
        return float(self.cost @ self.x)
