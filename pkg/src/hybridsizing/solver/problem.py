"""Sparse LP containers and a fixed-column MPS reader/writer."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.sparse as sp

INF = np.inf


class Status(str, enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"
    ITERATION_LIMIT = "iteration-limit"


class ProblemError(ValueError):
    """Raised for malformed LP data."""


@dataclass
class LPProblem:
    """``min c'x + offset`` subject to ``A x (<=,=,>=) rhs`` and ``lb <= x <= ub``.

    ``senses`` holds one of ``"L"``, ``"E"``, ``"G"`` per row. ``integers`` lists
    the indices of integer-constrained columns (empty for a pure LP).
    """

    c: np.ndarray
    A: sp.csr_matrix
    senses: np.ndarray
    rhs: np.ndarray
    lb: np.ndarray
    ub: np.ndarray
    integers: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    obj_offset: float = 0.0
    col_names: Optional[list] = None
    row_names: Optional[list] = None
    name: str = "LP"

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float)
        self.A = sp.csr_matrix(self.A, dtype=float)
        self.senses = np.asarray(self.senses, dtype="<U1")
        self.rhs = np.asarray(self.rhs, dtype=float)
        self.lb = np.asarray(self.lb, dtype=float)
        self.ub = np.asarray(self.ub, dtype=float)
        self.integers = np.asarray(self.integers, dtype=np.int64)

    @property
    def num_rows(self):
        return self.A.shape[0]

    @property
    def num_cols(self):
        return self.A.shape[1]

    def validate(self):
        m, n = self.A.shape
        if self.c.shape != (n,) or self.lb.shape != (n,) or self.ub.shape != (n,):
            raise ProblemError(f"column data must have length {n}")
        if self.rhs.shape != (m,) or self.senses.shape != (m,):
            raise ProblemError(f"row data must have length {m}")
        if not np.all(np.isfinite(self.c)) or not np.all(np.isfinite(self.A.data)):
            raise ProblemError("objective and matrix coefficients must be finite")
        if not np.all(np.isfinite(self.rhs)):
            raise ProblemError("right-hand sides must be finite")
        if np.any(np.isnan(self.lb)) or np.any(np.isnan(self.ub)):
            raise ProblemError("bounds must not be NaN")
        if np.any(self.lb > self.ub):
            bad = int(np.flatnonzero(self.lb > self.ub)[0])
            raise ProblemError(f"column {bad}: lower bound exceeds upper bound")
        bad_sense = ~np.isin(self.senses, ("L", "E", "G"))
        if bad_sense.any():
            raise ProblemError(f"row {int(np.flatnonzero(bad_sense)[0])}: unknown sense")
        if self.integers.size and (self.integers.min() < 0 or self.integers.max() >= n):
            raise ProblemError("integer index out of range")
        return self

    def row_bounds(self):
        lo = np.where(self.senses == "L", -INF, self.rhs)
        hi = np.where(self.senses == "G", INF, self.rhs)
        return lo, hi

    def objective(self, x):
        return float(self.c @ x + self.obj_offset)

    def copy(self):
        return LPProblem(
            self.c.copy(), self.A.copy(), self.senses.copy(), self.rhs.copy(),
            self.lb.copy(), self.ub.copy(), self.integers.copy(), self.obj_offset,
            None if self.col_names is None else list(self.col_names),
            None if self.row_names is None else list(self.row_names), self.name,
        )

    def with_bounds(self, lb, ub):
        p = self.copy()
        p.lb = np.asarray(lb, dtype=float)
        p.ub = np.asarray(ub, dtype=float)
        return p


@dataclass
class KKTReport:
    primal_residual: float
    dual_residual: float
    complementarity: float
    duality_gap: float
    tolerance: float = 1e-7
    farkas: Optional[np.ndarray] = None
    flags: list = field(default_factory=list)

    @property
    def ok(self):
        return not self.flags

    def as_dict(self):
        return {
            "primal_residual": self.primal_residual,
            "dual_residual": self.dual_residual,
            "complementarity": self.complementarity,
            "duality_gap": self.duality_gap,
            "tolerance": self.tolerance,
            "flags": list(self.flags),
        }


@dataclass
class LPSolution:
    status: Status
    x: Optional[np.ndarray] = None
    y: Optional[np.ndarray] = None
    d: Optional[np.ndarray] = None
    objective: float = np.nan
    iterations: int = 0
    residuals: Optional[KKTReport] = None
    bound: float = -np.inf
    farkas: Optional[np.ndarray] = None
    ray: Optional[np.ndarray] = None
    basis: Optional[tuple] = None
    message: str = ""
    solve_time: float = 0.0
    nodes: int = 0

    @property
    def optimal(self):
        return self.status == Status.OPTIMAL


# --------------------------------------------------------------------------
# Fixed-column MPS
#
# Field columns (1-based): 2-3 row type / bound type, 5-12 name 1,
# 15-22 name 2, 25-36 value 1, 40-47 name 3, 50-61 value 2. Names are at most
# eight characters; values are written with 12 significant characters, so
# a dump round-trips the structure exactly and values to ~1e-11 relative.
# --------------------------------------------------------------------------

def _fmt(v):
    s = f"{v:.12g}"
    if len(s) > 12:
        s = f"{v:.6e}"
    return s


def _line(f1="", f2="", f3="", f4="", f5="", f6=""):
    out = f" {f1:<2} {f2:<8}  {f3:<8}  {f4:>12}   {f5:<8}  {f6:>12}"
    return out.rstrip()


def _default_names(prefix, count):
    return [f"{prefix}{i}" for i in range(count)]


def write_mps(problem: LPProblem, path):
    m, n = problem.A.shape
    cols = problem.col_names or _default_names("C", n)
    rows = problem.row_names or _default_names("R", m)
    for nm in list(cols) + list(rows):
        if len(nm) > 8 or " " in nm:
            raise ProblemError(f"name {nm!r} does not fit the fixed MPS layout")
    csc = problem.A.tocsc()
    ints = set(problem.integers.tolist())
    lines = [f"NAME          {problem.name[:8]}", "ROWS", _line("N", "COST")]
    for i in range(m):
        lines.append(_line(problem.senses[i], rows[i]))
    lines.append("COLUMNS")
    in_int = False
    for j in range(n):
        if (j in ints) != in_int:
            marker = "'INTORG'" if not in_int else "'INTEND'"
            lines.append(_line("", "MARKER", "'MARKER'", "", marker))
            in_int = not in_int
        entries = []
        if problem.c[j] != 0.0:
            entries.append(("COST", problem.c[j]))
        for p in range(csc.indptr[j], csc.indptr[j + 1]):
            entries.append((rows[csc.indices[p]], csc.data[p]))
        if not entries:
            entries.append(("COST", 0.0))
        for rname, v in entries:
            lines.append(_line("", cols[j], rname, _fmt(v)))
    if in_int:
        lines.append(_line("", "MARKER", "'MARKER'", "", "'INTEND'"))
    lines.append("RHS")
    for i in range(m):
        if problem.rhs[i] != 0.0:
            lines.append(_line("", "RHS", rows[i], _fmt(problem.rhs[i])))
    if problem.obj_offset != 0.0:
        lines.append(_line("", "RHS", "COST", _fmt(-problem.obj_offset)))
    lines.append("BOUNDS")
    for j in range(n):
        lo, hi = problem.lb[j], problem.ub[j]
        if lo == hi:
            lines.append(_line("FX", "BND", cols[j], _fmt(lo)))
            continue
        if lo == -INF and hi == INF:
            lines.append(_line("FR", "BND", cols[j]))
            continue
        if lo == -INF:
            lines.append(_line("MI", "BND", cols[j]))
        elif lo != 0.0:
            lines.append(_line("LO", "BND", cols[j], _fmt(lo)))
        if hi != INF:
            lines.append(_line("UP", "BND", cols[j], _fmt(hi)))
    lines.append("ENDATA")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def _fields(line):
    padded = line.ljust(61)
    return (padded[1:3].strip(), padded[4:12].strip(), padded[14:22].strip(),
            padded[24:36].strip(), padded[39:47].strip(), padded[49:61].strip())


def read_mps(path) -> LPProblem:
    section = None
    name = "LP"
    row_index, senses, row_names = {}, [], []
    obj_row = None
    col_index, col_names = {}, []
    trip_r, trip_c, trip_v = [], [], []
    cost = {}
    rhs = {}
    offset = 0.0
    bounds = {}
    integer = False
    ints = []
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line.strip() or line.startswith("*"):
                continue
            if not line.startswith(" "):
                head = line.split()
                section = head[0]
                if section == "NAME":
                    name = line[14:].strip() or name
                elif section == "ENDATA":
                    break
                continue
            f1, f2, f3, f4, f5, f6 = _fields(line)
            try:
                if section == "ROWS":
                    if f1 == "N":
                        if obj_row is None:
                            obj_row = f2
                        continue
                    row_index[f2] = len(senses)
                    senses.append(f1)
                    row_names.append(f2)
                elif section == "COLUMNS":
                    if f3 == "'MARKER'":
                        integer = f5 == "'INTORG'"
                        continue
                    if f2 not in col_index:
                        col_index[f2] = len(col_names)
                        col_names.append(f2)
                        if integer:
                            ints.append(col_index[f2])
                    j = col_index[f2]
                    for rn, v in ((f3, f4), (f5, f6)):
                        if not rn:
                            continue
                        val = float(v)
                        if rn == obj_row:
                            cost[j] = val
                        else:
                            trip_r.append(row_index[rn])
                            trip_c.append(j)
                            trip_v.append(val)
                elif section == "RHS":
                    for rn, v in ((f3, f4), (f5, f6)):
                        if not rn:
                            continue
                        if rn == obj_row:
                            offset = -float(v)
                        else:
                            rhs[row_index[rn]] = float(v)
                elif section == "BOUNDS":
                    j = col_index[f3]
                    lo, hi = bounds.get(j, (0.0, INF))
                    val = float(f4) if f4 else 0.0
                    if f1 == "UP":
                        hi = val
                    elif f1 == "LO":
                        lo = val
                    elif f1 == "FX":
                        lo = hi = val
                    elif f1 == "FR":
                        lo, hi = -INF, INF
                    elif f1 == "MI":
                        lo = -INF
                    elif f1 == "PL":
                        hi = INF
                    elif f1 == "BV":
                        lo, hi = 0.0, 1.0
                    else:
                        raise ProblemError(f"unsupported bound type {f1}")
                    bounds[j] = (lo, hi)
                else:
                    raise ProblemError(f"unsupported section {section}")
            except (KeyError, ValueError) as exc:
                raise ProblemError(f"{path}:{lineno}: {exc}") from exc
    m, n = len(senses), len(col_names)
    A = sp.csr_matrix((trip_v, (trip_r, trip_c)), shape=(m, n))
    c = np.zeros(n)
    for j, v in cost.items():
        c[j] = v
    b = np.zeros(m)
    for i, v in rhs.items():
        b[i] = v
    lb = np.zeros(n)
    ub = np.full(n, INF)
    for j, (lo, hi) in bounds.items():
        lb[j], ub[j] = lo, hi
    return LPProblem(c, A, np.array(senses), b, lb, ub, np.array(ints, dtype=np.int64),
                     offset, col_names, row_names, name)
