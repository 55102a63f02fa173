import itertools
import math

import numpy as np
import pytest
import scipy.sparse as sp

from hybridsizing.solver import (LPProblem, ProblemError, SimplexOptions, Status, check_kkt,
                                 read_mps, solve_lp, solve_milp, verify_farkas, write_mps)
from hybridsizing.solver import _kernels_py, kernels
from hybridsizing.solver.presolve import presolve
from hybridsizing.solver.scaling import geometric_scaling
from oracles import dense_simplex, random_lp

INF = math.inf


def lp(c, A, senses, rhs, lb=None, ub=None, **kw):
    A = np.atleast_2d(np.asarray(A, dtype=float))
    n = A.shape[1]
    lb = np.zeros(n) if lb is None else lb
    ub = np.full(n, INF) if ub is None else ub
    return LPProblem(np.asarray(c, float), sp.csr_matrix(A), list(senses), rhs, lb, ub, **kw)


class TestBasics:
    def test_one_variable(self):
        sol = solve_lp(lp([1.0], [[1.0]], "G", [3.0]))
        assert sol.status == Status.OPTIMAL
        assert sol.objective == pytest.approx(3.0, abs=1e-12)
        assert sol.residuals.ok

    def test_textbook_two_by_two(self):
        # max 3x + 5y st x <= 4, 2y <= 12, 3x + 2y <= 18 -> (2, 6), 36
        sol = solve_lp(lp([-3, -5], [[1, 0], [0, 2], [3, 2]], "LLL", [4, 12, 18]))
        assert np.allclose(sol.x, [2, 6])
        assert sol.objective == pytest.approx(-36)
        assert np.allclose(sol.y, [0, -1.5, -1])

    def test_equality_and_free(self):
        P = lp([1, 1], [[1, -1]], "E", [2.0], lb=[-INF, 0], ub=[INF, INF])
        sol = solve_lp(P)
        assert sol.objective == pytest.approx(2.0)

    def test_infeasible_has_farkas(self):
        P = lp([1, 1], [[1, 1], [1, 1]], "LG", [1, 3])
        sol = solve_lp(P)
        assert sol.status == Status.INFEASIBLE
        assert verify_farkas(P, sol.farkas)

    def test_infeasible_without_presolve(self):
        P = lp([0, 0], [[1, 2], [1, 0], [0, 1]], "GLL", [10, 2, 3])
        sol = solve_lp(P, presolve_enabled=False)
        assert sol.status == Status.INFEASIBLE
        assert verify_farkas(P, sol.farkas)

    def test_unbounded_has_ray(self):
        P = lp([-1, 0], [[1, -1]], "L", [1.0])
        sol = solve_lp(P)
        assert sol.status == Status.UNBOUNDED
        r = sol.ray
        assert P.c @ r < 0
        assert (P.A @ r)[0] <= 1e-9 and np.all(r >= -1e-12)

    def test_iteration_limit(self):
        rng = np.random.default_rng(5)
        c, A, s, r, lb, ub = random_lp(rng, 30, 20)
        sol = solve_lp(LPProblem(c, A, s, r, lb, ub), max_iter=1, presolve_enabled=False)
        assert sol.status == Status.ITERATION_LIMIT
        assert sol.x is None

    def test_validation(self):
        with pytest.raises(ProblemError):
            solve_lp(LPProblem([1.0, 2.0], sp.csr_matrix([[1.0]]), ["L"], [1.0], [0], [1]))
        with pytest.raises(ProblemError):
            solve_lp(lp([1.0], [[1.0]], "L", [1.0], lb=[2.0], ub=[1.0]))
        with pytest.raises(ProblemError):
            solve_lp(lp([1.0], [[1.0]], "X", [1.0]))
        with pytest.raises(ProblemError):
            solve_lp(lp([np.nan], [[1.0]], "L", [1.0]))
        with pytest.raises(ProblemError):
            solve_lp(lp([1.0], [[1.0]], "L", [1.0], integers=[0]))

    def test_no_rows(self):
        P = LPProblem([1.0, -1.0], sp.csr_matrix((0, 2)), [], [], [1.0, 0.0], [5.0, 2.0])
        sol = solve_lp(P, presolve_enabled=False)
        assert list(sol.x) == [1.0, 2.0]


@pytest.mark.parametrize("seed", range(25))
def test_random_matches_dense_oracle(seed):
    rng = np.random.default_rng(100 + seed)
    c, A, s, r, lb, ub = random_lp(rng)
    st, obj, _ = dense_simplex(c, A, s, r, lb, ub)
    sol = solve_lp(LPProblem(c, A, s, r, lb, ub))
    assert st == "optimal" and sol.status == Status.OPTIMAL
    assert sol.objective == pytest.approx(obj, rel=1e-8, abs=1e-9)
    assert sol.residuals.ok


@pytest.mark.parametrize("seed", range(10))
def test_presolve_soundness(seed):
    rng = np.random.default_rng(seed)
    c, A, s, r, lb, ub = random_lp(rng)
    # add structure presolve acts on: a fixed column, a singleton row, an empty row
    n = len(c)
    A = np.vstack([A, np.eye(1, n, 0), np.zeros((1, n))])
    s = np.append(s, ["L", "L"])
    r = np.append(r, [ub[0], 1.0])
    lb = lb.copy()
    ub = ub.copy()
    lb[1] = ub[1] = (lb[1] + ub[1]) / 2 if np.isfinite(lb[1]) else ub[1]
    P = LPProblem(c, A, s, r, lb, ub)
    a = solve_lp(P)
    b = solve_lp(P, presolve_enabled=False)
    # fixing a column may cut off every feasible point; both routes must agree
    assert a.status == b.status
    if a.status == Status.OPTIMAL:
        assert a.objective == pytest.approx(b.objective, rel=1e-8, abs=1e-10)
        assert a.residuals.ok and b.residuals.ok
    else:
        assert a.status == Status.INFEASIBLE
        assert verify_farkas(P, a.farkas) and verify_farkas(P, b.farkas)


def test_presolve_reports_shape():
    P = lp([1, 1, 1], [[1, 0, 0], [1, 1, 1]], "GG", [1, 2], ub=[INF, 0, INF])
    pre = presolve(P)
    assert pre.reduced.num_cols < 3


class TestKKT:
    def solved(self):
        P = lp([-3, -5], [[1, 0], [0, 2], [3, 2]], "LLL", [4, 12, 18])
        return P, solve_lp(P)

    def test_certified(self):
        P, sol = self.solved()
        rep = check_kkt(P, sol.x, sol.y, sol.d)
        assert rep.ok and rep.primal_residual <= 1e-7 and rep.duality_gap <= 1e-6

    def test_primal_perturbation_flagged(self):
        P, sol = self.solved()
        x = sol.x.copy()
        x[1] += 1e-3
        assert "primal" in check_kkt(P, x, sol.y).flags

    def test_dual_sign_flagged(self):
        P, sol = self.solved()
        y = sol.y.copy()
        y[2] = -y[2]
        assert "dual" in check_kkt(P, sol.x, y).flags


class TestDeterminismAndWarmStart:
    def problem(self):
        from hybridsizing.model import ScenarioConfig, build_lp
        from hybridsizing.synthetic import small_instance
        res, tg = small_instance(48, seed=2)
        return build_lp(res, tg, ScenarioConfig())

    def test_bit_identical(self):
        P = self.problem()
        a, b = solve_lp(P), solve_lp(P)
        assert a.iterations == b.iterations
        assert np.array_equal(a.x, b.x) and np.array_equal(a.y, b.y)

    def test_warm_start(self):
        P = self.problem()
        cold = solve_lp(P)
        Q = P.copy()
        Q.c = Q.c * np.r_[1.1, 1.0, 0.9, np.ones(Q.num_cols - 3)]
        warm = solve_lp(Q, warm_start=cold.basis)
        ref = solve_lp(Q)
        assert warm.objective == pytest.approx(ref.objective, rel=1e-10)
        assert warm.iterations <= ref.iterations

    def test_mismatched_warm_start_ignored(self):
        P = self.problem()
        other = solve_lp(lp([1.0], [[1.0]], "G", [3.0]))
        sol = solve_lp(P, warm_start=other.basis)
        assert sol.objective == pytest.approx(solve_lp(P).objective, rel=1e-12)


class TestBackends:
    def test_same_pivots_both_backends(self):
        if not kernels.compiled_available():
            pytest.skip("compiled kernels not built")
        from hybridsizing.model import ScenarioConfig, build_lp
        from hybridsizing.synthetic import small_instance
        res, tg = small_instance(48, seed=4)
        P = build_lp(res, tg, ScenarioConfig())
        a = solve_lp(P, options=SimplexOptions(kernels="python"))
        b = solve_lp(P, options=SimplexOptions(kernels="compiled"))
        assert a.iterations == b.iterations
        assert np.allclose(a.x, b.x, rtol=0, atol=1e-9)

    def test_unknown_backend(self):
        with pytest.raises(ValueError):
            kernels.get_kernels("fortran")

    def test_env_forces_python(self, monkeypatch):
        monkeypatch.setenv("HYBRIDSIZING_PURE_PYTHON", "1")
        assert kernels.get_kernels() is _kernels_py


@pytest.mark.skipif(not kernels.compiled_available(), reason="compiled kernels not built")
class TestKernelTwins:
    K = None

    def setup_method(self):
        self.K = kernels.get_kernels("compiled")
        self.rng = np.random.default_rng(9)

    def status(self, n):
        return self.rng.integers(0, 5, n).astype(np.int8)

    def test_eta_files(self):
        m, cnt = 40, 12
        piv = self.rng.integers(0, m, cnt).astype(np.int64)
        pval = self.rng.uniform(0.5, 2, cnt)
        lens = self.rng.integers(0, 6, cnt)
        start = np.r_[0, np.cumsum(lens)].astype(np.int64)
        # each eta column lists distinct rows other than its pivot
        idx = np.concatenate([self.rng.choice(np.delete(np.arange(m), piv[k]), lens[k],
                                              replace=False) for k in range(cnt)])
        idx = idx.astype(np.int64)
        val = self.rng.normal(size=start[-1])
        for f in ("eta_ftran", "eta_btran"):
            x0 = self.rng.normal(size=m)
            a, b = x0.copy(), x0.copy()
            getattr(_kernels_py, f)(a, piv, pval, start, idx, val, cnt)
            getattr(self.K, f)(b, piv, pval, start, idx, val, cnt)
            assert np.allclose(a, b, rtol=1e-13, atol=1e-13)

    def test_pricing_and_ratios(self):
        for _ in range(50):
            n = 60
            d = self.rng.normal(size=n)
            alpha = self.rng.normal(size=n)
            alpha[self.rng.random(n) < 0.3] = 0.0
            st = self.status(n)
            for bland in (False, True):
                args = (d, alpha, st, 1.0, 1e-7, 1e-9, bland)
                assert _kernels_py.dual_ratio(*args) == self.K.dual_ratio(*args)
                assert _kernels_py.primal_price(d, st, 1e-9, bland) == \
                    self.K.primal_price(d, st, 1e-9, bland)
            m = 30
            xb = self.rng.normal(size=m)
            lob = np.where(self.rng.random(m) < 0.2, -INF, -1.0)
            hib = np.where(self.rng.random(m) < 0.2, INF, 1.0)
            w = self.rng.uniform(0.5, 2, m)
            head = self.rng.permutation(m).astype(np.int64)
            assert _kernels_py.dual_chuzr(xb, lob, hib, w, 1e-9) == \
                self.K.dual_chuzr(xb, lob, hib, w, 1e-9)
            assert _kernels_py.dual_chuzr_bland(xb, lob, hib, head, 1e-9) == \
                self.K.dual_chuzr_bland(xb, lob, hib, head, 1e-9)
            al = self.rng.normal(size=m)
            for bland in (False, True):
                r1, t1 = _kernels_py.primal_ratio(xb, lob, hib, al, -1.0, 1e-7, 1e-9, bland, head)
                r2, t2 = self.K.primal_ratio(xb, lob, hib, al, -1.0, 1e-7, 1e-9, bland, head)
                assert r1 == r2 and (t1 == t2 or abs(t1 - t2) <= 1e-12 * (1 + abs(t1)))

    def test_updates(self):
        m = 25
        w0 = self.rng.uniform(0.5, 2, m)
        alpha = self.rng.normal(size=m)
        tau = self.rng.normal(size=m)
        a, b = w0.copy(), w0.copy()
        _kernels_py.dse_update(a, alpha, tau, 3, 1.7)
        self.K.dse_update(b, alpha, tau, 3, 1.7)
        assert np.allclose(a, b, rtol=1e-13)
        d0 = self.rng.normal(size=m)
        st = self.status(m)
        a, b = d0.copy(), d0.copy()
        _kernels_py.update_duals(a, alpha, st, 0.3)
        self.K.update_duals(b, alpha, st, 0.3)
        assert np.array_equal(a, b)


def test_scaling_clamp():
    A = sp.csr_matrix(np.array([[1e-8, 1.0], [1.0, 1e8]]))
    r, s = geometric_scaling(A, max_log2=4)
    assert np.all(np.abs(np.log2(r)) <= 4) and np.all(np.abs(np.log2(s)) <= 4)
    assert np.all(np.log2(r) == np.round(np.log2(r)))


def test_mps_roundtrip(tmp_path):
    P = lp([1.5, -2.0, 0.0], [[1, 2, 0], [0, 1, -1], [3, 0, 1]], "LGE", [4, -1, 2],
           lb=[0, -INF, -3], ub=[10, INF, 3], integers=[2])
    write_mps(P, tmp_path / "p.mps")
    Q = read_mps(tmp_path / "p.mps")
    assert np.allclose(Q.c, P.c) and np.allclose(Q.A.toarray(), P.A.toarray())
    assert list(Q.senses) == list(P.senses) and np.allclose(Q.rhs, P.rhs)
    assert np.array_equal(Q.lb, P.lb) and np.array_equal(Q.ub, P.ub)
    assert list(Q.integers) == [2]


class TestMILP:
    def test_fixed_binaries_reduce_to_lp(self):
        P = lp([1, 2, -1], [[1, 1, 1]], "G", [1.5], ub=[1, 1, 5], integers=[0, 1])
        Q = P.with_bounds([1, 0, 0], [1, 0, 5])
        m = solve_milp(Q)
        plain = solve_lp(LPProblem(Q.c, Q.A, Q.senses, Q.rhs, Q.lb, Q.ub))
        assert m.objective == pytest.approx(plain.objective)

    def test_knapsack_enumeration(self):
        rng = np.random.default_rng(3)
        for _ in range(5):
            n = 10
            v = rng.integers(1, 20, n).astype(float)
            w = rng.integers(1, 10, n).astype(float)
            cap = float(w.sum() // 2)
            P = lp(-v, [w], "L", [cap], ub=np.ones(n), integers=np.arange(n))
            sol = solve_milp(P)
            best = max(v @ np.array(z) for z in itertools.product((0, 1), repeat=n)
                       if w @ np.array(z) <= cap)
            assert sol.status == Status.OPTIMAL
            assert -sol.objective == pytest.approx(best)

    def test_infeasible(self):
        P = lp([1, 1], [[2, 2]], "E", [1.0], ub=[1, 1], integers=[0, 1])
        assert solve_milp(P).status == Status.INFEASIBLE

    def test_needs_integers(self):
        with pytest.raises(ProblemError):
            solve_milp(lp([1.0], [[1.0]], "G", [1.0]))

    def test_integer_cap(self):
        P = lp([1, 1], [[1, 1]], "G", [1.0], ub=[1, 1], integers=[0, 1])
        with pytest.raises(ProblemError):
            solve_milp(P, max_integers=1)

    def test_node_limit_keeps_incumbent_and_bound(self):
        rng = np.random.default_rng(8)
        n = 25
        v = rng.integers(10, 60, n).astype(float)
        w = v + rng.integers(-5, 5, n)
        P = lp(-v, [w], "L", [float(w.sum() // 3) + 0.5], ub=np.ones(n), integers=np.arange(n))
        sol = solve_milp(P, node_limit=15)
        if sol.status == Status.ITERATION_LIMIT and sol.x is not None:
            assert sol.bound <= sol.objective + 1e-9
