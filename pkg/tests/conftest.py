"""Shared oracles: plain-Python brute-force enumerations, independent of the
package's kernels, against which the fast paths are checked."""

import math

import numpy as np
import pytest


def bits_to_vec(bits, d):
    return [1.0 if (bits >> i) & 1 else -1.0 for i in range(d)]


def parity_sign(bits, s_bits):
    """prod_{i in S} x_i for the point encoded by bits (bit set <=> +1)."""
    return -1.0 if bin(s_bits & ~bits).count("1") % 2 else 1.0


def brute_mean(g, d):
    """E_x[g(x)] by direct Python enumeration (math.fsum, no numpy)."""
    return math.fsum(g(bits_to_vec(bits, d)) for bits in range(1 << d)) / (1 << d)


def brute_coeff(g, s_bits, d):
    """E_x[g(x) * p_S(x)] by direct Python enumeration."""
    return (
        math.fsum(
            g(bits_to_vec(bits, d)) * parity_sign(bits, s_bits)
            for bits in range(1 << d)
        )
        / (1 << d)
    )


def brute_threshold_coeff(w, b, s_bits):
    d = len(w)
    return brute_coeff(
        lambda x: 1.0 if math.fsum(wi * xi for wi, xi in zip(w, x)) + b > 0 else 0.0,
        s_bits,
        d,
    )


def brute_relu_coeff(w, b, s_bits):
    d = len(w)
    return brute_coeff(
        lambda x: max(0.0, math.fsum(wi * xi for wi, xi in zip(w, x)) + b),
        s_bits,
        d,
    )


def central_diff(f, theta, h=1e-5):
    """Central finite differences of f at theta, one coordinate at a time."""
    theta = np.asarray(theta, dtype=np.float64)
    out = np.empty_like(theta)
    for i in range(theta.shape[0]):
        up = theta.copy()
        up[i] += h
        dn = theta.copy()
        dn[i] -= h
        out[i] = (f(up) - f(dn)) / (2.0 * h)
    return out


@pytest.fixture(params=["compiled", "pure"])
def backend_name(request):
    """Run the marked test once per available backend."""
    from paritylab.backend import available_backends, get_backend, set_backend

    name = request.param
    if name not in available_backends():
        pytest.skip(f"backend {name!r} not built")
    prev = get_backend()
    set_backend(name)
    yield name
    set_backend(prev)
