"""Branch and bound over LP relaxations solved by the dual simplex."""
from __future__ import annotations

import heapq
import itertools
import math
import time

import numpy as np

from .lp import solve_lp
from .problem import LPProblem, LPSolution, ProblemError, Status

INT_TOL = 1e-6


class _Node:
    __slots__ = ("lb", "ub", "bound", "basis", "depth")

    def __init__(self, lb, ub, bound, basis, depth):
        self.lb, self.ub, self.bound, self.basis, self.depth = lb, ub, bound, basis, depth


def _most_fractional(x, ints):
    frac = x[ints] - np.floor(x[ints])
    score = np.minimum(frac, 1.0 - frac)
    k = int(np.argmax(score))
    if score[k] <= INT_TOL:
        return -1
    return int(ints[k])


def solve_milp(problem: LPProblem, *, gap=1e-6, node_limit=100_000, time_limit=None,
               max_integers=None, lp_options=None) -> LPSolution:
    """Minimize with integrality on ``problem.integers``.

    Branches on the most fractional variable and dives depth-first, taking
    the branch nearer the LP value first. Once a dive ends it resumes from the
    open node with the best bound. Children are warm-started
    from their parent's optimal basis. Returns ``optimal`` when the absolute
    gap closes below ``gap``; otherwise ``iteration-limit`` with the best
    incumbent (if any) and the global bound.
    """
    t0 = time.perf_counter()
    problem.validate()
    ints = np.asarray(problem.integers, dtype=np.int64)
    if ints.size == 0:
        raise ProblemError("solve_milp needs at least one integer column; use solve_lp")
    if max_integers is not None and ints.size > max_integers:
        raise ProblemError(f"{ints.size} integer columns exceed the cap of {max_integers}")

    lb0 = problem.lb.copy()
    ub0 = problem.ub.copy()
    lb0[ints] = np.ceil(lb0[ints] - INT_TOL)
    ub0[ints] = np.floor(ub0[ints] + INT_TOL)

    def relax(lb, ub, basis):
        P = problem.with_bounds(lb, ub)
        # no presolve: every node keeps the root's shape so bases carry over
        return solve_lp(P, warm_start=basis, presolve_enabled=False, options=lp_options,
                        allow_integers=True)

    # an objective that is integer on integer columns and zero elsewhere only
    # takes integer values, so a node must beat the incumbent by a whole unit
    cint = problem.c[ints]
    rest = np.delete(problem.c, ints)
    integral = (not np.any(rest) and np.all(cint == np.round(cint)))

    def dominated(bound, best):
        if integral and math.isfinite(bound):
            return math.ceil(bound - 1e-6) >= best - gap
        return bound >= best - gap

    incumbent = None
    inc_obj = math.inf
    nodes = 0
    iters = 0
    counter = itertools.count()
    heap = []          # (bound, seq, node) for best-bound fallback
    stack = []         # current dive
    stack.append(_Node(lb0, ub0, -math.inf, None, 0))
    limit_hit = False

    while stack or heap:
        if stack:
            node = stack.pop()
        else:
            _, _, node = heapq.heappop(heap)
        if dominated(node.bound, inc_obj):
            continue
        if nodes >= node_limit or (time_limit is not None
                                   and time.perf_counter() - t0 > time_limit):
            heapq.heappush(heap, (node.bound, next(counter), node))
            limit_hit = True
            break
        nodes += 1
        if np.any(node.lb > node.ub):
            continue
        sol = relax(node.lb, node.ub, node.basis)
        iters += sol.iterations
        if sol.status == Status.INFEASIBLE:
            continue
        if sol.status == Status.UNBOUNDED:
            if incumbent is None and nodes == 1:
                sol.nodes = nodes
                sol.solve_time = time.perf_counter() - t0
                return sol
            continue
        if sol.status != Status.OPTIMAL:
            limit_hit = True
            heapq.heappush(heap, (node.bound, next(counter), node))
            break
        if dominated(sol.objective, inc_obj):
            continue
        j = _most_fractional(sol.x, ints)
        if j < 0:
            incumbent, inc_obj = sol, sol.objective
            # dive finished: the remaining dive nodes join the best-bound pool
            for nd in stack:
                heapq.heappush(heap, (nd.bound, next(counter), nd))
            stack.clear()
            continue
        v = sol.x[j]
        down_ub = node.ub.copy()
        down_ub[j] = math.floor(v)
        up_lb = node.lb.copy()
        up_lb[j] = math.ceil(v)
        down = _Node(node.lb, down_ub, sol.objective, sol.basis, node.depth + 1)
        up = _Node(up_lb, node.ub, sol.objective, sol.basis, node.depth + 1)
        # explore the branch nearer the LP value first; ties go down
        first, second = (up, down) if v - math.floor(v) > 0.5 else (down, up)
        stack.append(second)
        stack.append(first)

    open_bounds = [b for b, _, _ in heap] + [nd.bound for nd in stack]
    best_bound = min(open_bounds + [inc_obj]) if open_bounds else inc_obj
    if incumbent is None:
        if limit_hit:
            out = LPSolution(Status.ITERATION_LIMIT, iterations=iters,
                             message="node or time limit before any integer solution")
            out.bound = best_bound
        else:
            out = LPSolution(Status.INFEASIBLE, iterations=iters,
                             message="every branch is infeasible")
        out.nodes = nodes
        out.solve_time = time.perf_counter() - t0
        return out

    final = _polish(problem, incumbent, ints)
    final.iterations = iters + final.iterations
    final.nodes = nodes
    final.bound = best_bound
    if integral and math.isfinite(best_bound):
        best_bound = max(best_bound, math.ceil(best_bound - 1e-6))
    if limit_hit and inc_obj - best_bound > gap:
        final.status = Status.ITERATION_LIMIT
        final.message = f"limit reached; gap {inc_obj - best_bound:.3g}"
    else:
        final.message = f"optimal after {nodes} nodes"
    final.solve_time = time.perf_counter() - t0
    return final


def _polish(problem, incumbent, ints):
    """Fix the integers at their rounded values and re-solve for clean duals."""
    lb = problem.lb.copy()
    ub = problem.ub.copy()
    xi = np.round(incumbent.x[ints])
    lb[ints] = xi
    ub[ints] = xi
    sol = solve_lp(problem.with_bounds(lb, ub), allow_integers=True)
    if sol.status != Status.OPTIMAL or sol.objective > incumbent.objective + 1e-7 * (1 + abs(incumbent.objective)):
        incumbent.x[ints] = xi
        return incumbent
    return sol
