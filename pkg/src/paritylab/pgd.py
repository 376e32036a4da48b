"""Perturbed gradient descent and its random-walk comparisons.

The update is theta_{t+1} = theta_t - eta * grad F_S(theta_t) - xi_t with
xi_t ~ N(0, sigma^2 I); theta_0 is drawn from the same substream family at
index -1 (so a (seed, T) pair pins the entire trajectory, and runs sharing
a seed share their noise realization sample by sample).

Variants all share one update expression theta - eta*g - xi and differ only
in g:

* run_pgd: g is the exact closed-form gradient;
* run_truncated_pgd: g is zeroed whenever ||grad|| <= eps_trunc (vector
  truncation: the whole gradient survives or the whole gradient is
  dropped); eps_trunc = 0 reproduces run_pgd bit for bit, eps_trunc = inf
  gives the pure noise walk;
* gaussian_walk: no gradient at all (g = 0), or g = theta for the damped
  variant v_{t+1} = (1-eta) v_t - xi_t that mirrors the squared loss;
* coupled_divergence: plain and truncated runs driven by the same noise,
  reporting how far they drift apart.

Losses are recorded at step multiples of record_every and always at step T.
For the linear loss the recorded value comes free from the gradient
(F = sum_j u_j dF/du_j); walks record loss only (grad_norm is NaN there).
"""

import math
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import rng
from .backend import get_backend
from .hypercube import SubsetMask
from .objectives import (
    linear_loss,
    linear_loss_from_grad,
    linear_loss_grad,
    net_from_flat,
    neuron_from_flat,
    squared_loss_single,
    squared_loss_single_grad,
)

LOSS_KINDS = ("linear-onehidden", "squared-single")

NOISE_CONVENTION = "theta - eta*grad - xi"


@dataclass(frozen=True)
class PgdConfig:
    """Run description: dynamics, architecture, target parity, recording."""

    eta: float
    sigma: float
    T: int
    seed: int
    loss: str
    s: SubsetMask
    n: int = 1
    record_every: int = 1

    def __post_init__(self):
        if self.loss not in LOSS_KINDS:
            raise ValueError(f"loss must be one of {LOSS_KINDS}, got {self.loss!r}")
        # eta = 0 is allowed: gradients are computed but never applied, so
        # the run degenerates to the pure noise walk
        if not self.eta >= 0:
            raise ValueError(f"eta must be >= 0, got {self.eta}")
        if not self.sigma > 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")
        if self.T < 0:
            raise ValueError(f"T must be >= 0, got {self.T}")
        if self.record_every < 1:
            raise ValueError(f"record_every must be >= 1, got {self.record_every}")
        if self.s.size < 1:
            raise ValueError("target subset must be nonempty")
        if self.loss == "squared-single":
            if self.n != 1:
                raise ValueError(f"squared-single means width 1, got n={self.n}")
            if self.eta >= 2:
                warnings.warn(
                    f"eta={self.eta} >= 2: the damping factor (1-eta) is "
                    "expanding, squared-single iterates will diverge",
                    stacklevel=3,
                )
        elif self.n < 0:
            # width 0 is a valid degenerate: N ≡ 0, F ≡ 0, no parameters
            raise ValueError(f"width must be >= 0, got {self.n}")

    @property
    def d(self) -> int:
        return self.s.dim

    @property
    def num_params(self) -> int:
        if self.loss == "squared-single":
            return self.d + 1
        return self.n * (self.d + 2)

    def to_json_dict(self) -> dict:
        return {
            "eta": self.eta,
            "sigma": self.sigma,
            "T": self.T,
            "seed": self.seed,
            "loss": self.loss,
            "n": self.n,
            "d": self.d,
            "subset_bits": self.s.bits,
            "subset_size": self.s.size,
            "record_every": self.record_every,
        }

    @classmethod
    def from_json_dict(cls, obj: dict) -> "PgdConfig":
        return cls(
            eta=obj["eta"],
            sigma=obj["sigma"],
            T=obj["T"],
            seed=obj["seed"],
            loss=obj["loss"],
            s=SubsetMask(obj["subset_bits"], obj["d"]),
            n=obj["n"],
            record_every=obj["record_every"],
        )


@dataclass
class Trajectory:
    """Recorded losses/gradient norms plus the final parameter vector."""

    steps: list
    losses: list
    grad_norms: list
    final_theta: np.ndarray = field(repr=False)
    config: PgdConfig
    metadata: dict

    def to_json_dict(self) -> dict:
        return {
            "config": self.config.to_json_dict(),
            "steps": list(self.steps),
            "losses": list(self.losses),
            "grad_norms": list(self.grad_norms),
            "final_theta": np.asarray(self.final_theta).tolist(),
            "metadata": dict(self.metadata),
        }

    def to_csv_body(self) -> str:
        """Deterministic CSV: header + one row per recorded step, 17 sig digits."""
        lines = ["step,loss,grad_norm"]
        for t, lo, gn in zip(self.steps, self.losses, self.grad_norms):
            lines.append(f"{t},{lo:.17g},{gn:.17g}")
        return "\n".join(lines) + "\n"


def _norm(v: np.ndarray) -> float:
    return math.sqrt(float(np.sum(v * v)))


def _noise(config: PgdConfig, index: int) -> np.ndarray:
    z = rng.substream(config.seed, rng.STREAM_PGD, index)
    return config.sigma * z.standard_normal(config.num_params)


def _grad_and_loss(config, theta, need_loss):
    """Flat gradient, its norm, and (when asked) the loss at theta."""
    if config.loss == "linear-onehidden":
        net = net_from_flat(theta, config.n, config.d)
        bundle = linear_loss_grad(net, config.s)
        g = bundle.flat()
        loss = linear_loss_from_grad(net, bundle) if need_loss else None
    else:
        neuron = neuron_from_flat(theta, sign=1)
        ng = squared_loss_single_grad(neuron, config.s)
        g = ng.flat()
        loss = squared_loss_single(neuron, config.s) if need_loss else None
    return g, _norm(g), loss


def _loss_only(config, theta) -> float:
    if config.loss == "linear-onehidden":
        return linear_loss(net_from_flat(theta, config.n, config.d), config.s)
    return squared_loss_single(neuron_from_flat(theta, sign=1), config.s)


def _run(config, eps_trunc=None, walk=None, quadratic_only=False):
    theta = _noise(config, -1)
    zeros = np.zeros_like(theta)
    steps, losses, grad_norms = [], [], []
    for t in range(config.T + 1):
        rec = (t % config.record_every == 0) or (t == config.T)
        if walk is None:
            g, gn, loss = _grad_and_loss(config, theta, need_loss=rec)
            if rec:
                steps.append(t)
                losses.append(loss)
                grad_norms.append(gn)
            if t == config.T:
                break
            if quadratic_only:
                g = theta
            elif eps_trunc is not None and gn <= eps_trunc:
                g = zeros
        else:
            if rec:
                steps.append(t)
                losses.append(_loss_only(config, theta))
                grad_norms.append(math.nan)
            if t == config.T:
                break
            g = theta if walk == "damped" else zeros
        theta = theta - config.eta * g - _noise(config, t)

    metadata = {
        "rng": rng.GENERATOR_NAME,
        "backend": get_backend(),
        "noise_convention": NOISE_CONVENTION,
    }
    if walk is not None:
        metadata["kind"] = f"walk-{walk}"
    elif quadratic_only:
        metadata["kind"] = "pgd-quadratic-only"
    elif eps_trunc is not None:
        metadata["kind"] = "pgd-truncated"
        metadata["eps_trunc"] = eps_trunc
    else:
        metadata["kind"] = "pgd"
    return Trajectory(
        steps=steps,
        losses=losses,
        grad_norms=grad_norms,
        final_theta=theta,
        config=config,
        metadata=metadata,
    )


def run_pgd(config: PgdConfig, quadratic_only: bool = False) -> Trajectory:
    """Perturbed gradient descent with the exact closed-form gradient.

    quadratic_only is a test hook for the squared loss: it replaces the
    gradient by theta itself (the E[[w.x]_+^2] part alone, whose gradient
    the identity E[[w.x]_+ x_k] = w_k/2 makes exactly theta), so the run
    must coincide bitwise with the damped walk v_{t+1} = (1-eta)v_t - xi_t.
    """
    return _run(config, quadratic_only=quadratic_only)


def run_truncated_pgd(config: PgdConfig, eps_trunc: float) -> Trajectory:
    """PGD with the gradient dropped whenever its norm is <= eps_trunc."""
    if eps_trunc < 0:
        raise ValueError(f"eps_trunc must be >= 0, got {eps_trunc}")
    return _run(config, eps_trunc=eps_trunc)


def gaussian_walk(config: PgdConfig, damped: Optional[bool] = None) -> Trajectory:
    """Pure noise walk theta_{t+1} = theta_t - xi_t, no gradient computed.

    With damped=True the step is v_{t+1} = (1-eta) v_t - xi_t (the
    squared-loss analogue); by default the variant follows config.loss.
    After T undamped steps each coordinate is N(0, (T+1) sigma^2). The
    recorded losses still track the true F_S along the walk.
    """
    if damped is None:
        damped = config.loss == "squared-single"
    return _run(config, walk="damped" if damped else "plain")


@dataclass
class CoupledReport:
    """Divergence between plain and truncated runs under shared noise."""

    eps_trunc: float
    max_param_dist: float
    final_param_dist: float
    final_loss_gap: float
    tv_proxy_bound: float
    config: PgdConfig
    metadata: dict

    def to_json_dict(self) -> dict:
        return {
            "eps_trunc": self.eps_trunc,
            "max_param_dist": self.max_param_dist,
            "final_param_dist": self.final_param_dist,
            "final_loss_gap": self.final_loss_gap,
            "tv_proxy_bound": self.tv_proxy_bound,
            "config": self.config.to_json_dict(),
            "metadata": dict(self.metadata),
        }


def coupled_divergence(config: PgdConfig, eps_trunc: float) -> CoupledReport:
    """Run PGD and truncated PGD on identical noise; measure their drift.

    Both trajectories start from the same theta_0 and consume the same
    xi_t, so with eps_trunc = 0 every distance is exactly zero. The
    reported tv_proxy_bound eps*eta*sqrt(T)/(2*sigma) is the analytic
    proxy for how distinguishable the two laws can be.
    """
    if eps_trunc < 0:
        raise ValueError(f"eps_trunc must be >= 0, got {eps_trunc}")
    theta_a = _noise(config, -1)
    theta_b = theta_a.copy()
    zeros = np.zeros_like(theta_a)
    max_dist = 0.0
    for t in range(config.T):
        ga, _, _ = _grad_and_loss(config, theta_a, need_loss=False)
        gb, gbn, _ = _grad_and_loss(config, theta_b, need_loss=False)
        if gbn <= eps_trunc:
            gb = zeros
        xi = _noise(config, t)
        theta_a = theta_a - config.eta * ga - xi
        theta_b = theta_b - config.eta * gb - xi
        max_dist = max(max_dist, _norm(theta_a - theta_b))
    final_dist = _norm(theta_a - theta_b)
    loss_gap = abs(_loss_only(config, theta_a) - _loss_only(config, theta_b))
    bound = eps_trunc * config.eta * math.sqrt(config.T) / (2.0 * config.sigma)
    return CoupledReport(
        eps_trunc=eps_trunc,
        max_param_dist=max_dist,
        final_param_dist=final_dist,
        final_loss_gap=loss_gap,
        tv_proxy_bound=bound,
        config=config,
        metadata={
            "rng": rng.GENERATOR_NAME,
            "backend": get_backend(),
            "noise_convention": NOISE_CONVENTION,
        },
    )
