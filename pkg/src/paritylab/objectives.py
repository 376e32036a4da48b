"""Losses over the cube and their closed-form gradients.

Two objectives, both exact expectations over {-1,+1}^d (enumeration, no
sampling):

* linear loss F_S(theta) = -E[N_theta(x) * parity(S, x)] for a
  one-hidden-layer net, with partials
    dF/du_j = -E[[w_j.x+b_j]_+ p_S],
    dF/dW_j = -u_j E[1{w_j.x+b_j>0} p_S x],
    dF/db_j = -u_j E[1{w_j.x+b_j>0} p_S];
* squared loss E[(sign [w.x+b]_+ - p_S)^2] for a single neuron.

The ReLU derivative convention is 1{z > 0} (zero exactly at the kink), so
gradients are everywhere defined and match central finite differences away
from kinks. Flattened parameter layout, shared with the descent module:
nets are [u, W rows, b]; single neurons are [w, b].

Monte Carlo statistics of gradients under Gaussian parameters follow the
same substream discipline as everywhere else (sample i reads substream
(seed, stream, i)).
"""

import math
from dataclasses import dataclass

import numpy as np

from . import rng
from .backend import K, get_backend
from .hypercube import MAX_DIM, SubsetMask
from .relu_nets import OneHiddenLayerNet, SingleNeuron
from .threshold_fourier import EstimateReport


@dataclass
class GradientBundle:
    """Partials of the linear loss with respect to (u, W, b)."""

    du: np.ndarray
    dW: np.ndarray
    db: np.ndarray

    def flat(self) -> np.ndarray:
        return np.concatenate([self.du, self.dW.ravel(), self.db])

    def norm(self) -> float:
        v = self.flat()
        return math.sqrt(float(np.sum(v * v)))


@dataclass
class NeuronGradient:
    """Partials of the single-neuron squared loss with respect to (w, b)."""

    dw: np.ndarray
    db: float

    def flat(self) -> np.ndarray:
        return np.concatenate([self.dw, [self.db]])

    def norm(self) -> float:
        v = self.flat()
        return math.sqrt(float(np.sum(v * v)))


def flat_from_net(net: OneHiddenLayerNet) -> np.ndarray:
    return np.concatenate([net.u, net.W.ravel(), net.b])


def net_from_flat(theta, n: int, d: int) -> OneHiddenLayerNet:
    theta = np.asarray(theta, dtype=np.float64)
    if theta.shape != (n * (d + 2),):
        raise ValueError(
            f"theta has shape {theta.shape}, expected ({n * (d + 2)},)"
        )
    return OneHiddenLayerNet(
        u=theta[:n].copy(),
        W=theta[n:n + n * d].reshape(n, d).copy(),
        b=theta[n + n * d:].copy(),
    )


def flat_from_neuron(neuron: SingleNeuron) -> np.ndarray:
    return np.concatenate([neuron.w, [neuron.b]])


def neuron_from_flat(theta, sign: int) -> SingleNeuron:
    theta = np.asarray(theta, dtype=np.float64)
    if theta.ndim != 1 or theta.shape[0] < 2:
        raise ValueError(f"theta must be [w, b] with d >= 1, got {theta.shape}")
    return SingleNeuron(sign=sign, w=theta[:-1].copy(), b=float(theta[-1]))


def _check_subset(s: SubsetMask, d: int, min_size: int):
    if s.dim != d:
        raise ValueError(f"dim mismatch: subset dim {s.dim}, d {d}")
    if d > MAX_DIM:
        raise ValueError(f"dim {d} exceeds MAX_DIM={MAX_DIM}")
    if s.size < min_size:
        raise ValueError(f"|S| must be at least {min_size}, got {s.size}")


def linear_loss(net: OneHiddenLayerNet, s: SubsetMask) -> float:
    """F_S(theta) = -E_x[N_theta(x) * parity(s, x)], exact."""
    _check_subset(s, net.d, 1)
    terms = [
        -net.u[j] * K.relu_parity_mean(net.W[j], net.b[j], s.bits)
        for j in range(net.n)
    ]
    return math.fsum(terms)


def linear_loss_grad(net: OneHiddenLayerNet, s: SubsetMask) -> GradientBundle:
    """Closed-form gradient of the linear loss; F = sum_j u_j * du_j."""
    _check_subset(s, net.d, 1)
    du = np.empty(net.n)
    dW = np.empty_like(net.W)
    db = np.empty(net.n)
    for j in range(net.n):
        du[j] = -K.relu_parity_mean(net.W[j], net.b[j], s.bits)
        m0, m = K.indicator_parity_moments(net.W[j], net.b[j], s.bits)
        dW[j] = -net.u[j] * m
        db[j] = -net.u[j] * m0
    return GradientBundle(du=du, dW=dW, db=db)


def linear_loss_from_grad(net: OneHiddenLayerNet, bundle: GradientBundle) -> float:
    """Recover F from du (F is linear in u: F = sum_j u_j du_j), exactly."""
    return math.fsum(float(net.u[j] * bundle.du[j]) for j in range(net.n))


def squared_loss_single(neuron: SingleNeuron, s: SubsetMask) -> float:
    """E_x[(sign [w.x+b]_+ - parity(s, x))^2], enumerated pointwise.

    At b = 0 this equals ||w||^2/2 - 2*sign*E[p_S [w.x]_+] + 1 (the
    E[[w.x]_+^2] = ||w||^2/2 identity); the enumeration does not use that
    shortcut, so the identity stays an independent check.
    """
    _check_subset(s, neuron.d, 1)
    return K.single_sq_loss(float(neuron.sign), neuron.w, neuron.b, s.bits)


def squared_loss_single_grad(neuron: SingleNeuron, s: SubsetMask) -> NeuronGradient:
    """Closed-form gradient of the single-neuron squared loss."""
    _check_subset(s, neuron.d, 1)
    r0, r = K.relu_moments(neuron.w, neuron.b)
    m0, m = K.indicator_parity_moments(neuron.w, neuron.b, s.bits)
    dw = 2.0 * (r - neuron.sign * m)
    db = 2.0 * (r0 - neuron.sign * m0)
    return NeuronGradient(dw=dw, db=float(db))


def grad_norm_gaussian_stats(
    arch: tuple,
    s: SubsetMask,
    sigma: float,
    num_samples: int,
    seed: int,
    second_moment: bool = False,
) -> EstimateReport:
    """Monte Carlo E[||grad F_S(theta)||] for theta ~ N(0, sigma^2 I).

    arch is (n, d). The report's bound is exp(-|S|/9) and the per-neuron
    output-weight partial statistic E[|dF/du_j|] (pooled over j) with its
    bound 5*d*sigma*exp(-|S|/8) rides along in parameters. The bounds'
    constants assume large-d regimes, so bound_satisfied is evaluated with
    3-standard-error slack and is informational at desk scale. With
    second_moment the estimate is E[||grad||^2] and no bound is attached.
    """
    n, d = arch
    if n < 1:
        raise ValueError(f"width must be >= 1, got {n}")
    _check_subset(s, d, 1)
    if sigma < 0:
        raise ValueError(f"sigma must be >= 0, got {sigma}")
    if num_samples < 2:
        raise ValueError(f"need at least 2 samples, got {num_samples}")

    p = n * (d + 2)
    norms = np.empty(num_samples)
    du_means = np.empty(num_samples)
    for i in range(num_samples):
        z = rng.substream(seed, rng.STREAM_GRAD_STATS, i).standard_normal(p)
        net = net_from_flat(sigma * z, n, d)
        bundle = linear_loss_grad(net, s)
        norms[i] = bundle.norm()
        du_means[i] = float(np.mean(np.abs(bundle.du)))

    values = norms * norms if second_moment else norms
    estimate = float(np.mean(values))
    std_error = float(np.std(values, ddof=1) / math.sqrt(num_samples))
    du_mean = float(np.mean(du_means))
    du_se = float(np.std(du_means, ddof=1) / math.sqrt(num_samples))
    du_bound = 5.0 * d * sigma * math.exp(-s.size / 8.0)

    if second_moment:
        bound = None
        satisfied = None
    else:
        bound = math.exp(-s.size / 9.0)
        satisfied = bool(estimate - 3.0 * std_error <= bound)
    return EstimateReport(
        estimate=estimate,
        std_error=std_error,
        num_samples=num_samples,
        bound_value=bound,
        bound_satisfied=satisfied,
        seed=seed,
        parameters={
            "n": n,
            "d": d,
            "subset_bits": s.bits,
            "subset_size": s.size,
            "sigma": sigma,
            "second_moment": second_moment,
            "bound_rule": "estimate - 3*std_error <= bound_value (informational)",
            "du_abs_mean": du_mean,
            "du_abs_std_error": du_se,
            "du_bound_value": du_bound,
            "du_bound_satisfied": bool(du_mean - 3.0 * du_se <= du_bound),
            "rng": rng.GENERATOR_NAME,
            "stream": rng.STREAM_GRAD_STATS,
            "backend": get_backend(),
        },
    )


def random_loss_stats(
    arch: tuple,
    s: SubsetMask,
    variance: float,
    num_samples: int,
    seed: int,
) -> EstimateReport:
    """Fraction of theta ~ N(0, variance*I) with |F_S(theta)| >= eps.

    eps = exp(-|S|/18); the estimate is checked against Pr <= eps itself.
    The natural variance for a T-step noise walk is (T+1)*sigma^2. Width 0
    is allowed (N ≡ 0, so the fraction is 0).
    """
    n, d = arch
    if n < 0:
        raise ValueError(f"width must be >= 0, got {n}")
    _check_subset(s, d, 1)
    if variance < 0:
        raise ValueError(f"variance must be >= 0, got {variance}")
    if num_samples < 2:
        raise ValueError(f"need at least 2 samples, got {num_samples}")

    eps = math.exp(-s.size / 18.0)
    scale = math.sqrt(variance)
    p = n * (d + 2)
    abs_losses = np.empty(num_samples)
    for i in range(num_samples):
        if n == 0:
            abs_losses[i] = 0.0
            continue
        z = rng.substream(seed, rng.STREAM_RANDOM_LOSS, i).standard_normal(p)
        net = net_from_flat(scale * z, n, d)
        abs_losses[i] = abs(linear_loss(net, s))
    hits = (abs_losses >= eps).astype(np.float64)
    estimate = float(np.mean(hits))
    std_error = float(np.std(hits, ddof=1) / math.sqrt(num_samples))
    return EstimateReport(
        estimate=estimate,
        std_error=std_error,
        num_samples=num_samples,
        bound_value=eps,
        bound_satisfied=bool(estimate <= eps),
        seed=seed,
        parameters={
            "n": n,
            "d": d,
            "subset_bits": s.bits,
            "subset_size": s.size,
            "variance": variance,
            "eps": eps,
            "mean_abs_loss": float(np.mean(abs_losses)),
            "max_abs_loss": float(np.max(abs_losses)),
            "bound_rule": "estimate <= bound_value",
            "rng": rng.GENERATOR_NAME,
            "stream": rng.STREAM_RANDOM_LOSS,
            "backend": get_backend(),
        },
    )
