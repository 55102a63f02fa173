"""Sparse LP/MILP solver: bounded revised simplex with branch and bound on top."""
from .kkt import check_kkt, verify_farkas
from .lp import solve_lp
from .milp import solve_milp
from .problem import KKTReport, LPProblem, LPSolution, ProblemError, Status, read_mps, write_mps
from .simplex import SimplexOptions

__all__ = ["LPProblem", "LPSolution", "KKTReport", "Status", "ProblemError", "SimplexOptions",
           "solve_lp", "solve_milp", "check_kkt", "verify_farkas", "read_mps", "write_mps"]
