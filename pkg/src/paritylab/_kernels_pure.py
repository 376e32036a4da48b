"""Pure NumPy hypercube kernels.

Fallback backend: every kernel enumerates {-1,+1}^d through full-length
tables built by butterfly doubling, then reduces with numpy's pairwise
summation. Table construction visits coordinates in increasing order, so
dot tables agree bitwise with the compiled backend's (same operand order);
scalar reductions agree exactly whenever the inputs are integers or dyadic
rationals and to rounding error otherwise.

Indicators use strict > throughout: a tied pre-activation w.x + b == 0
contributes zero. Indicator and parity reductions are sums of values in
{-1, 0, 1}, exact in float64 for d <= 24 (|sum| <= 2**24 < 2**53).

Index convention: point index x has bit i set iff coordinate x_i = +1;
subset masks use the same bit positions.
"""

import numpy as np

BACKEND_NAME = "pure"


def dot_table(w):
    """Table of w . x over all 2**d points, index bit i set <=> x_i = +1."""
    w = np.asarray(w, dtype=np.float64)
    d = w.shape[0]
    out = np.zeros(1 << d)
    for i in range(d):
        half = 1 << i
        out[half:2 * half] = out[:half] + w[i]
        out[:half] -= w[i]
    return out


def parity_table(s_bits, d):
    """Table of the parity character on s_bits, values +-1.0."""
    out = np.ones(1 << d)
    for i in range(d):
        half = 1 << i
        if (s_bits >> i) & 1:
            out[half:2 * half] = out[:half]
            out[:half] *= -1.0
        else:
            out[half:2 * half] = out[:half]
    return out


def wht_inplace(a):
    """Unnormalized Walsh-Hadamard butterfly, in place.

    After the transform a[s] = sum_x a_old[x] * parity(s, x); callers apply
    the single 2**-d scaling themselves.
    """
    n = a.shape[0]
    h = 1
    while h < n:
        v = a.reshape(-1, 2, h)
        lo = v[:, 0, :].copy()
        v[:, 0, :] += v[:, 1, :]
        v[:, 1, :] -= lo
        h *= 2


def threshold_parity_mean(w, b, s_bits):
    """E_x[parity(s, x) * 1{w.x + b > 0}], exact enumeration."""
    t = dot_table(w) + b
    p = parity_table(s_bits, len(w))
    # integer-valued summands: order-independent exact sum
    return float(np.sum(p[t > 0.0])) / t.shape[0]


def indicator_parity_moments(w, b, s_bits):
    """(E[ind*p], E[ind*p*x_k] for each k) with ind = 1{w.x + b > 0}."""
    d = len(w)
    n = 1 << d
    t = dot_table(w) + b
    v = parity_table(s_bits, d)
    v[t <= 0.0] = 0.0
    m0 = float(np.sum(v)) / n
    m = np.empty(d)
    for k in range(d):
        r = v.reshape(-1, 2, 1 << k)
        m[k] = (float(np.sum(r[:, 1, :])) - float(np.sum(r[:, 0, :]))) / n
    return m0, m


def relu_parity_mean(w, b, s_bits):
    """E_x[[w.x + b]_+ * parity(s, x)]."""
    t = np.maximum(dot_table(w) + b, 0.0)
    p = parity_table(s_bits, len(w))
    return float(np.sum(t * p)) / t.shape[0]


def relu_moments(w, b):
    """(E[[w.x+b]_+], E[[w.x+b]_+ * x_k] for each k)."""
    d = len(w)
    n = 1 << d
    t = np.maximum(dot_table(w) + b, 0.0)
    r0 = float(np.sum(t)) / n
    r = np.empty(d)
    for k in range(d):
        v = t.reshape(-1, 2, 1 << k)
        r[k] = (float(np.sum(v[:, 1, :])) - float(np.sum(v[:, 0, :]))) / n
    return r0, r


def relu_sq_mean(w, b):
    """E_x[[w.x + b]_+ ** 2]."""
    t = np.maximum(dot_table(w) + b, 0.0)
    return float(np.sum(t * t)) / t.shape[0]


def single_sq_loss(sign, w, b, s_bits):
    """E_x[(sign * [w.x+b]_+ - parity(s, x)) ** 2], enumerated pointwise."""
    t = np.maximum(dot_table(w) + b, 0.0)
    diff = sign * t - parity_table(s_bits, len(w))
    return float(np.sum(diff * diff)) / t.shape[0]
