# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled simplex inner kernels; same signatures as ``_kernels_py``."""
import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, INFINITY

cnp.import_array()

ctypedef cnp.int64_t i64
ctypedef cnp.int8_t i8

cdef enum:
    BASIC = 0
    AT_LOWER = 1
    AT_UPPER = 2
    FREE = 3
    FIXED = 4


def eta_ftran(double[::1] x, i64[::1] piv, double[::1] pval, i64[::1] start,
              i64[::1] idx, double[::1] val, Py_ssize_t count):
    cdef Py_ssize_t k, q
    cdef i64 p
    cdef double xp
    for k in range(count):
        p = piv[k]
        xp = x[p]
        if xp == 0.0:
            continue
        xp = xp / pval[k]
        x[p] = xp
        for q in range(start[k], start[k + 1]):
            x[idx[q]] -= val[q] * xp


def eta_btran(double[::1] x, i64[::1] piv, double[::1] pval, i64[::1] start,
              i64[::1] idx, double[::1] val, Py_ssize_t count):
    cdef Py_ssize_t k, q
    cdef i64 p
    cdef double s
    for k in range(count - 1, -1, -1):
        p = piv[k]
        s = x[p]
        for q in range(start[k], start[k + 1]):
            s -= val[q] * x[idx[q]]
        x[p] = s / pval[k]


def dual_chuzr(double[::1] xb, double[::1] lob, double[::1] hib, double[::1] weights,
               double tol):
    cdef Py_ssize_t i, best = -1
    cdef double v, score, top = 0.0
    for i in range(xb.shape[0]):
        v = lob[i] - xb[i]
        if xb[i] - hib[i] > v:
            v = xb[i] - hib[i]
        if v > tol:
            score = v * v / weights[i]
            if score > top:
                top = score
                best = i
    return best


def dual_chuzr_bland(double[::1] xb, double[::1] lob, double[::1] hib, i64[::1] head,
                     double tol):
    cdef Py_ssize_t i, best = -1
    cdef i64 bh = 0
    for i in range(xb.shape[0]):
        if lob[i] - xb[i] > tol or xb[i] - hib[i] > tol:
            if best < 0 or head[i] < bh:
                best = i
                bh = head[i]
    return best


def dual_ratio(double[::1] d, double[::1] alpha, i8[::1] status, double direction,
               double piv_tol, double dual_tol, bint bland):
    cdef Py_ssize_t j, n = d.shape[0], best = -1
    cdef double a, aa, dc, r, tmax = INFINITY, tmin = INFINITY, big = 0.0
    cdef i8 st
    # pass 1: relaxed bound on the step
    for j in range(n):
        st = status[j]
        if st == BASIC or st == FIXED:
            continue
        a = alpha[j] * direction
        if st == AT_LOWER:
            if a >= -piv_tol:
                continue
            dc = d[j] if d[j] > 0.0 else 0.0
        elif st == AT_UPPER:
            if a <= piv_tol:
                continue
            dc = -d[j] if d[j] < 0.0 else 0.0
        else:
            if fabs(a) <= piv_tol:
                continue
            dc = 0.0
        aa = fabs(a)
        if bland:
            r = dc / aa
            if r < tmin:
                tmin = r
        else:
            r = (dc + dual_tol) / aa
            if r < tmax:
                tmax = r
    if bland:
        if tmin == INFINITY:
            return -1
        tmax = tmin + dual_tol
    elif tmax == INFINITY:
        return -1
    # pass 2: largest pivot among candidates within the bound (bland: smallest index)
    for j in range(n):
        st = status[j]
        if st == BASIC or st == FIXED:
            continue
        a = alpha[j] * direction
        if st == AT_LOWER:
            if a >= -piv_tol:
                continue
            dc = d[j] if d[j] > 0.0 else 0.0
        elif st == AT_UPPER:
            if a <= piv_tol:
                continue
            dc = -d[j] if d[j] < 0.0 else 0.0
        else:
            if fabs(a) <= piv_tol:
                continue
            dc = 0.0
        aa = fabs(a)
        if dc / aa <= tmax:
            if bland:
                return j
            if aa > big:
                big = aa
                best = j
    return best


def dse_update(double[::1] weights, double[::1] alpha, double[::1] tau, Py_ssize_t r,
               double wr):
    cdef Py_ssize_t i, m = weights.shape[0]
    cdef double ar = alpha[r], ratio, w
    for i in range(m):
        if i == r:
            continue
        ratio = alpha[i] / ar
        if ratio == 0.0:
            continue
        w = weights[i] - 2.0 * ratio * tau[i] + ratio * ratio * wr
        if w < ratio * ratio:
            w = ratio * ratio
        if w < 1e-12:
            w = 1e-12
        weights[i] = w
    w = wr / (ar * ar)
    weights[r] = w if w > 1e-12 else 1e-12


def update_duals(double[::1] d, double[::1] alpha_row, i8[::1] status, double theta):
    cdef Py_ssize_t j
    for j in range(d.shape[0]):
        if status[j] != BASIC:
            d[j] -= theta * alpha_row[j]


def primal_ratio(double[::1] xb, double[::1] lob, double[::1] hib, double[::1] alpha,
                 double direction, double piv_tol, double tol, bint bland, i64[::1] head):
    cdef Py_ssize_t i, m = xb.shape[0], best = -1
    cdef double a, room, aa, r, tmax = INFINITY, tmin = INFINITY, big = 0.0, tbest = INFINITY
    cdef i64 bh = 0
    for i in range(m):
        a = alpha[i] * direction
        if a > piv_tol and lob[i] > -INFINITY:
            room = xb[i] - lob[i]
        elif a < -piv_tol and hib[i] < INFINITY:
            room = hib[i] - xb[i]
        else:
            continue
        if room < 0.0:
            room = 0.0
        aa = fabs(a)
        if bland:
            r = room / aa
            if r < tmin:
                tmin = r
        else:
            r = (room + tol) / aa
            if r < tmax:
                tmax = r
    if bland:
        if tmin == INFINITY:
            return -1, INFINITY
        tmax = tmin + tol
    elif tmax == INFINITY:
        return -1, INFINITY
    for i in range(m):
        a = alpha[i] * direction
        if a > piv_tol and lob[i] > -INFINITY:
            room = xb[i] - lob[i]
        elif a < -piv_tol and hib[i] < INFINITY:
            room = hib[i] - xb[i]
        else:
            continue
        if room < 0.0:
            room = 0.0
        aa = fabs(a)
        r = room / aa
        if r <= tmax:
            if bland:
                if best < 0 or head[i] < bh:
                    best = i
                    bh = head[i]
                    tbest = r
            elif aa > big:
                big = aa
                best = i
                tbest = r
    return best, tbest


def primal_price(double[::1] d, i8[::1] status, double tol, bint bland):
    cdef Py_ssize_t j, best = -1
    cdef double v, top = 0.0
    cdef i8 st
    for j in range(d.shape[0]):
        st = status[j]
        if st == AT_LOWER:
            v = -d[j]
        elif st == AT_UPPER:
            v = d[j]
        elif st == FREE:
            v = fabs(d[j])
        else:
            continue
        if v > tol:
            if bland:
                return j
            if v > top:
                top = v
                best = j
    return best
