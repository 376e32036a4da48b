# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hypercube kernels.

Scalar reductions over {-1,+1}^d walk the cube in Gray-code order: one
coordinate flips per step, so the running dot product updates by +-2*w_i
(exact when the weights are integers or dyadic rationals) and the parity
character flips sign at most once. Indicator/parity counts accumulate in
int64 (exact, |count| <= 2**24); ReLU sums are Kahan-compensated.

Same conventions as the pure backend: index bit i set <=> x_i = +1, and
indicators use strict > (ties contribute zero).
"""

import numpy as np

BACKEND_NAME = "compiled"


cdef inline int _ctz(unsigned long long v) noexcept nogil:
    cdef int c = 0
    while (v & 1) == 0:
        v >>= 1
        c += 1
    return c


cdef inline int _parity_at_origin(unsigned long long s_bits) noexcept nogil:
    # x = (-1, ..., -1): parity = (-1)**|S|
    cdef int p = 1
    while s_bits:
        p = -p
        s_bits &= s_bits - 1
    return p


def threshold_parity_mean(w, double b, s_bits):
    """E_x[parity(s, x) * 1{w.x + b > 0}], exact enumeration."""
    cdef double[::1] wv = np.ascontiguousarray(w, dtype=np.float64)
    cdef unsigned long long s = s_bits
    cdef Py_ssize_t d = wv.shape[0]
    cdef unsigned long long n = 1ULL << d
    cdef double dot = b
    cdef Py_ssize_t i
    for i in range(d):
        dot -= wv[i]
    cdef int p = _parity_at_origin(s)
    cdef long long cnt = 0
    cdef unsigned long long k, state = 0, bit
    cdef int j
    with nogil:
        if dot > 0.0:
            cnt += p
        for k in range(1, n):
            j = _ctz(k)
            bit = 1ULL << j
            state ^= bit
            if state & bit:
                dot += 2.0 * wv[j]
            else:
                dot -= 2.0 * wv[j]
            if (s >> j) & 1:
                p = -p
            if dot > 0.0:
                cnt += p
    return cnt / <double>n


def indicator_parity_moments(w, double b, s_bits):
    """(E[ind*p], E[ind*p*x_k] for each k) with ind = 1{w.x + b > 0}."""
    cdef double[::1] wv = np.ascontiguousarray(w, dtype=np.float64)
    cdef unsigned long long s = s_bits
    cdef Py_ssize_t d = wv.shape[0]
    cdef unsigned long long n = 1ULL << d
    cdef double dot = b
    cdef Py_ssize_t i
    for i in range(d):
        dot -= wv[i]
    cdef int p = _parity_at_origin(s)
    cdef long long cnt0 = 0
    counts = np.zeros(d, dtype=np.int64)
    cdef long long[::1] cnt = counts
    cdef unsigned long long k, state = 0, bit
    cdef int j
    with nogil:
        if dot > 0.0:
            cnt0 += p
            for j in range(d):
                cnt[j] -= p  # every coordinate is -1 at the origin
        for k in range(1, n):
            j = _ctz(k)
            bit = 1ULL << j
            state ^= bit
            if state & bit:
                dot += 2.0 * wv[j]
            else:
                dot -= 2.0 * wv[j]
            if (s >> j) & 1:
                p = -p
            if dot > 0.0:
                cnt0 += p
                for j in range(d):
                    # +-p without a data-dependent branch
                    cnt[j] += p * (((<long long>(state >> j) & 1) << 1) - 1)
    m = counts.astype(np.float64)
    m /= <double>n
    return cnt0 / <double>n, m


def relu_parity_mean(w, double b, s_bits):
    """E_x[[w.x + b]_+ * parity(s, x)], Kahan-compensated."""
    cdef double[::1] wv = np.ascontiguousarray(w, dtype=np.float64)
    cdef unsigned long long s = s_bits
    cdef Py_ssize_t d = wv.shape[0]
    cdef unsigned long long n = 1ULL << d
    cdef double dot = b
    cdef Py_ssize_t i
    for i in range(d):
        dot -= wv[i]
    cdef int p = _parity_at_origin(s)
    cdef double acc = 0.0, comp = 0.0, val, y, t
    cdef unsigned long long k, state = 0, bit
    cdef int j
    with nogil:
        if dot > 0.0:
            val = dot if p > 0 else -dot
            y = val - comp
            t = acc + y
            comp = (t - acc) - y
            acc = t
        for k in range(1, n):
            j = _ctz(k)
            bit = 1ULL << j
            state ^= bit
            if state & bit:
                dot += 2.0 * wv[j]
            else:
                dot -= 2.0 * wv[j]
            if (s >> j) & 1:
                p = -p
            if dot > 0.0:
                val = dot if p > 0 else -dot
                y = val - comp
                t = acc + y
                comp = (t - acc) - y
                acc = t
    return acc / <double>n


def relu_moments(w, double b):
    """(E[[w.x+b]_+], E[[w.x+b]_+ * x_k] for each k), Kahan-compensated."""
    cdef double[::1] wv = np.ascontiguousarray(w, dtype=np.float64)
    cdef Py_ssize_t d = wv.shape[0]
    cdef unsigned long long n = 1ULL << d
    cdef double dot = b
    cdef Py_ssize_t i
    for i in range(d):
        dot -= wv[i]
    cdef double acc0 = 0.0, comp0 = 0.0, y, t
    sums = np.zeros(d)
    comps = np.zeros(d)
    cdef double[::1] acc = sums
    cdef double[::1] comp = comps
    cdef unsigned long long k, state = 0, bit, rest
    cdef int j
    with nogil:
        # Kahan sums over set coordinates only; with A = sum of relu and
        # B_j restricted to x_j = +1, E[relu * x_j] = (2B_j - A)/n
        if dot > 0.0:
            y = dot - comp0
            t = acc0 + y
            comp0 = (t - acc0) - y
            acc0 = t
        for k in range(1, n):
            j = _ctz(k)
            bit = 1ULL << j
            state ^= bit
            if state & bit:
                dot += 2.0 * wv[j]
            else:
                dot -= 2.0 * wv[j]
            if dot > 0.0:
                y = dot - comp0
                t = acc0 + y
                comp0 = (t - acc0) - y
                acc0 = t
                rest = state
                while rest:
                    j = _ctz(rest)
                    y = dot - comp[j]
                    t = acc[j] + y
                    comp[j] = (t - acc[j]) - y
                    acc[j] = t
                    rest &= rest - 1
    r = (2.0 * sums - acc0) / <double>n
    return acc0 / <double>n, r


def relu_sq_mean(w, double b):
    """E_x[[w.x + b]_+ ** 2], Kahan-compensated."""
    cdef double[::1] wv = np.ascontiguousarray(w, dtype=np.float64)
    cdef Py_ssize_t d = wv.shape[0]
    cdef unsigned long long n = 1ULL << d
    cdef double dot = b
    cdef Py_ssize_t i
    for i in range(d):
        dot -= wv[i]
    cdef double acc = 0.0, comp = 0.0, y, t
    cdef unsigned long long k, state = 0, bit
    cdef int j
    with nogil:
        if dot > 0.0:
            y = dot * dot - comp
            t = acc + y
            comp = (t - acc) - y
            acc = t
        for k in range(1, n):
            j = _ctz(k)
            bit = 1ULL << j
            state ^= bit
            if state & bit:
                dot += 2.0 * wv[j]
            else:
                dot -= 2.0 * wv[j]
            if dot > 0.0:
                y = dot * dot - comp
                t = acc + y
                comp = (t - acc) - y
                acc = t
    return acc / <double>n


def single_sq_loss(double sign, w, double b, s_bits):
    """E_x[(sign * [w.x+b]_+ - parity(s, x)) ** 2], enumerated pointwise."""
    cdef double[::1] wv = np.ascontiguousarray(w, dtype=np.float64)
    cdef unsigned long long s = s_bits
    cdef Py_ssize_t d = wv.shape[0]
    cdef unsigned long long n = 1ULL << d
    cdef double dot = b
    cdef Py_ssize_t i
    for i in range(d):
        dot -= wv[i]
    cdef int p = _parity_at_origin(s)
    cdef double acc = 0.0, comp = 0.0, relu, diff, y, t
    cdef unsigned long long k, state = 0, bit
    cdef int j
    with nogil:
        relu = dot if dot > 0.0 else 0.0
        diff = sign * relu - p
        y = diff * diff - comp
        t = acc + y
        comp = (t - acc) - y
        acc = t
        for k in range(1, n):
            j = _ctz(k)
            bit = 1ULL << j
            state ^= bit
            if state & bit:
                dot += 2.0 * wv[j]
            else:
                dot -= 2.0 * wv[j]
            if (s >> j) & 1:
                p = -p
            relu = dot if dot > 0.0 else 0.0
            diff = sign * relu - p
            y = diff * diff - comp
            t = acc + y
            comp = (t - acc) - y
            acc = t
    return acc / <double>n
