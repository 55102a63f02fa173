import numpy as np
import scipy.sparse as sp


def geometric_scaling(A, passes=6, max_log2=None):
    """Row and column factors ``(r, s)`` so that ``diag(r) A diag(s)`` has entries near 1.

    Alternating geometric-mean passes; factors are rounded to powers of two so
    scaling introduces no rounding error. ``max_log2`` caps every factor to
    ``[2**-max_log2, 2**max_log2]``; long chains of equality rows otherwise let
    the factors drift far from 1 while the scaled entries stay near 1.
    """
    A = sp.csr_matrix(A)
    m, n = A.shape
    r = np.ones(m)
    s = np.ones(n)
    if A.nnz == 0:
        return r, s
    absA = abs(A)
    absA.eliminate_zeros()
    for _ in range(passes):
        M = sp.diags(r) @ absA @ sp.diags(s)
        M = sp.csr_matrix(M)
        rmax = _segment(M, np.maximum, m)
        rmin = _segment(M, np.minimum, m)
        ok = rmax > 0
        r[ok] /= np.sqrt(rmax[ok] * rmin[ok])
        Mc = sp.csc_matrix(sp.diags(r) @ absA @ sp.diags(s))
        cmax = _segment(Mc, np.maximum, n)
        cmin = _segment(Mc, np.minimum, n)
        ok = cmax > 0
        s[ok] /= np.sqrt(cmax[ok] * cmin[ok])
    lr, ls = np.round(np.log2(r)), np.round(np.log2(s))
    if max_log2 is not None:
        lr = np.clip(lr, -max_log2, max_log2)
        ls = np.clip(ls, -max_log2, max_log2)
    r, s = np.exp2(lr), np.exp2(ls)
    return r, s


def _segment(M, op, size):
    """Reduce each compressed row (CSR) or column (CSC) of ``M`` with ``op``."""
    out = np.zeros(size)
    nonempty = np.diff(M.indptr) > 0
    if nonempty.any():
        out[nonempty] = op.reduceat(M.data, M.indptr[:-1][nonempty])
    return out
