"""Basis factorization: sparse LU from SuperLU plus a product-form eta file."""
import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

ETA_DROP = 1e-13


class SingularBasisError(RuntimeError):
    pass


class BasisFactor:
    """LU factors of the basis matrix ``[A  -I][:, head]`` with eta updates.

    ``A`` is the (scaled) structural matrix in CSC form with ``n`` columns;
    column ``n + i`` of the full matrix is ``-e_i``.
    """

    def __init__(self, A, kernels, refactor_every=100):
        self.A = A
        self.m, self.n = A.shape
        self.k = kernels
        self.refactor_every = refactor_every
        self.lu = None
        self._reset_etas()

    def _reset_etas(self, capacity=None):
        cap = capacity or max(4 * self.m, 1024)
        self.piv = np.zeros(self.refactor_every + 1, dtype=np.int64)
        self.pval = np.zeros(self.refactor_every + 1)
        self.start = np.zeros(self.refactor_every + 2, dtype=np.int64)
        self.idx = np.zeros(cap, dtype=np.int64)
        self.val = np.zeros(cap)
        self.count = 0

    @property
    def needs_refactor(self):
        return self.count >= self.refactor_every

    def basis_matrix(self, head):
        A, n, m = self.A, self.n, self.m
        pos = np.arange(m)
        is_struct = head < n
        spos = pos[is_struct]
        cols = head[is_struct]
        starts = A.indptr[cols]
        lens = A.indptr[cols + 1] - starts
        total = int(lens.sum())
        offs = np.repeat(starts - np.cumsum(lens) + lens, lens) + np.arange(total)
        rows = np.concatenate([A.indices[offs], head[~is_struct] - n])
        vals = np.concatenate([A.data[offs], -np.ones(m - spos.size)])
        cpos = np.concatenate([np.repeat(spos, lens), pos[~is_struct]])
        return sp.csc_matrix((vals, (rows, cpos)), shape=(m, m))

    def factorize(self, head):
        B = self.basis_matrix(head)
        try:
            self.lu = splu(B, permc_spec="COLAMD")
        except RuntimeError as exc:
            raise SingularBasisError(str(exc)) from exc
        self._reset_etas(self.idx.size)

    def ftran(self, v):
        x = self.lu.solve(v)
        if self.count:
            self.k.eta_ftran(x, self.piv, self.pval, self.start, self.idx, self.val, self.count)
        return x

    def btran(self, v):
        x = np.array(v, dtype=float)
        if self.count:
            self.k.eta_btran(x, self.piv, self.pval, self.start, self.idx, self.val, self.count)
        return self.lu.solve(x, trans="T")

    def update(self, r, alpha):
        """Record the pivot on row position ``r`` with entering column ``alpha = B^-1 a_q``."""
        nz = np.flatnonzero(np.abs(alpha) > ETA_DROP)
        nz = nz[nz != r]
        k = self.count
        lo = self.start[k]
        hi = lo + nz.size
        if hi > self.idx.size:
            grow = max(hi, 2 * self.idx.size)
            self.idx = np.resize(self.idx, grow)
            self.val = np.resize(self.val, grow)
        self.idx[lo:hi] = nz
        self.val[lo:hi] = alpha[nz]
        self.piv[k] = r
        self.pval[k] = alpha[r]
        self.start[k + 1] = hi
        self.count = k + 1
