"""Fourier coefficients of linear threshold functions and related closed forms.

The central objects are coefficients E_x[1{w.x + b > 0} * parity(S, x)] of
threshold indicators over {-1,+1}^d, computed by exact enumeration, and
their averages over Gaussian weights, estimated by Monte Carlo. Ties
w.x + b == 0 contribute zero (strict >), so coefficients of integer-weight
thresholds are exact dyadic rationals.

Monte Carlo estimators return an EstimateReport carrying the estimate, its
standard error, the closed-form bound it is compared against, and enough
metadata to reproduce the run. Sample i of an estimator seeded with `seed`
draws from rng.substream(seed, stream, i), so estimates do not depend on
evaluation order.
"""

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import rng
from .backend import K, get_backend
from .hypercube import MAX_DIM, CubePoint, Spectrum, SubsetMask, walsh_hadamard


@dataclass(frozen=True)
class ThresholdFn:
    """x -> 1{w.x + b > 0} on {-1,+1}^d."""

    w: np.ndarray
    b: float = 0.0

    def __post_init__(self):
        w = np.atleast_1d(np.asarray(self.w, dtype=np.float64))
        if w.ndim != 1 or w.shape[0] < 1:
            raise ValueError(f"w must be a nonempty vector, got shape {w.shape}")
        if not np.all(np.isfinite(w)) or not math.isfinite(self.b):
            raise ValueError("threshold parameters must be finite")
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "b", float(self.b))

    @property
    def dim(self) -> int:
        return self.w.shape[0]

    def __call__(self, x: CubePoint) -> int:
        if x.dim != self.dim:
            raise ValueError(f"dim mismatch: {x.dim} vs {self.dim}")
        return 1 if float(self.w @ x.to_vector()) + self.b > 0.0 else 0


@dataclass
class EstimateReport:
    """Monte Carlo estimate with its bound comparison and reproduction info.

    std_error is the ddof=1 sample standard deviation divided by sqrt(n).
    bound_satisfied applies the rule named in parameters["bound_rule"];
    bound_value/bound_satisfied are None for purely informational runs.
    """

    estimate: float
    std_error: float
    num_samples: int
    bound_value: Optional[float]
    bound_satisfied: Optional[bool]
    seed: int
    parameters: dict = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        return {
            "estimate": self.estimate,
            "std_error": self.std_error,
            "num_samples": self.num_samples,
            "bound_value": self.bound_value,
            "bound_satisfied": self.bound_satisfied,
            "seed": self.seed,
            "parameters": dict(self.parameters),
        }

    @classmethod
    def from_json_dict(cls, obj: dict) -> "EstimateReport":
        return cls(
            estimate=obj["estimate"],
            std_error=obj["std_error"],
            num_samples=obj["num_samples"],
            bound_value=obj["bound_value"],
            bound_satisfied=obj["bound_satisfied"],
            seed=obj["seed"],
            parameters=dict(obj["parameters"]),
        )


def _mean_and_se(values: np.ndarray) -> tuple:
    mean = float(np.mean(values))
    se = float(np.std(values, ddof=1) / math.sqrt(values.shape[0]))
    return mean, se


def fourier_coeff_threshold(f: ThresholdFn, s: SubsetMask) -> float:
    """E_x[1{w.x + b > 0} * parity(s, x)] by exact enumeration."""
    if s.dim != f.dim:
        raise ValueError(f"dim mismatch: subset dim {s.dim}, threshold dim {f.dim}")
    if f.dim > MAX_DIM:
        raise ValueError(f"dim {f.dim} exceeds MAX_DIM={MAX_DIM}")
    return K.threshold_parity_mean(f.w, f.b, s.bits)


def threshold_spectrum(f: ThresholdFn) -> Spectrum:
    """All 2^d coefficients of the threshold indicator at once."""
    if f.dim > MAX_DIM:
        raise ValueError(f"dim {f.dim} exceeds MAX_DIM={MAX_DIM}")
    table = (K.dot_table(f.w) + f.b > 0.0).astype(np.float64)
    return walsh_hadamard(table)


def gaussian_avg_sq_coeff(
    d: int,
    s: SubsetMask,
    sigma: float,
    include_bias: bool,
    num_samples: int,
    seed: int,
) -> EstimateReport:
    """Monte Carlo E_w[f_S(w, b)^2] for Gaussian N(0, sigma^2) weights.

    With include_bias the bias is drawn like a (d+1)-th weight and the
    estimate is compared against 8*exp(-|S|/4); without, b = 0 and the
    bound is 6*exp(-|S|/4). The indicator is scale-invariant in sigma, so
    estimates at equal seeds agree exactly across sigma values.
    """
    if s.dim != d:
        raise ValueError(f"dim mismatch: subset dim {s.dim}, d {d}")
    if s.size < 2:
        raise ValueError(f"|S| must be at least 2, got {s.size}")
    if d > MAX_DIM:
        raise ValueError(f"dim {d} exceeds MAX_DIM={MAX_DIM}")
    if sigma <= 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    if num_samples < 2:
        raise ValueError(f"need at least 2 samples, got {num_samples}")

    draw = d + 1 if include_bias else d
    vals = np.empty(num_samples)
    for i in range(num_samples):
        z = rng.substream(seed, rng.STREAM_THRESHOLD, i).standard_normal(draw)
        w = sigma * z[:d]
        b = sigma * z[d] if include_bias else 0.0
        c = K.threshold_parity_mean(w, b, s.bits)
        vals[i] = c * c
    estimate, se = _mean_and_se(vals)
    bound = (8.0 if include_bias else 6.0) * math.exp(-s.size / 4.0)
    return EstimateReport(
        estimate=estimate,
        std_error=se,
        num_samples=num_samples,
        bound_value=bound,
        bound_satisfied=bool(estimate <= bound),
        seed=seed,
        parameters={
            "d": d,
            "subset_bits": s.bits,
            "subset_size": s.size,
            "sigma": sigma,
            "include_bias": include_bias,
            "bound_rule": "estimate <= bound_value",
            "rng": rng.GENERATOR_NAME,
            "stream": rng.STREAM_THRESHOLD,
            "backend": get_backend(),
        },
    )


def hemisphere_overlap(x: CubePoint, y: CubePoint) -> float:
    """P_w(w.x > 0 and w.y > 0) for w ~ N(0, I): (pi - arccos(u))/(2*pi).

    u is the normalized inner product x.y/d, clamped into [-1, 1] before
    arccos. Exact endpoints: 1/2 at y == x, 0 at y == -x, 1/4 orthogonal.
    """
    if x.dim != y.dim:
        raise ValueError(f"dim mismatch: {x.dim} vs {y.dim}")
    d = x.dim
    ip = d - 2 * (x.bits ^ y.bits).bit_count()
    u = min(1.0, max(-1.0, ip / d))
    return (math.pi - math.acos(u)) / (2.0 * math.pi)


def hemisphere_overlap_mc(
    x: CubePoint, y: CubePoint, num_samples: int, seed: int
) -> EstimateReport:
    """Monte Carlo joint-hemisphere probability for Gaussian w.

    Indicators are strict, so antipodal points give exactly 0 (no draw can
    land on both sides). Checked two-sided against the closed form.
    """
    if x.dim != y.dim:
        raise ValueError(f"dim mismatch: {x.dim} vs {y.dim}")
    if num_samples < 2:
        raise ValueError(f"need at least 2 samples, got {num_samples}")
    xv = x.to_vector()
    yv = y.to_vector()
    hits = np.empty(num_samples)
    for i in range(num_samples):
        w = rng.substream(seed, rng.STREAM_HEMISPHERE, i).standard_normal(x.dim)
        hits[i] = 1.0 if (w @ xv > 0.0 and w @ yv > 0.0) else 0.0
    estimate, se = _mean_and_se(hits)
    bound = hemisphere_overlap(x, y)
    return EstimateReport(
        estimate=estimate,
        std_error=se,
        num_samples=num_samples,
        bound_value=bound,
        bound_satisfied=bool(abs(estimate - bound) <= 4.0 * se),
        seed=seed,
        parameters={
            "d": x.dim,
            "x_bits": x.bits,
            "y_bits": y.bits,
            "bound_rule": "|estimate - bound_value| <= 4*std_error",
            "rng": rng.GENERATOR_NAME,
            "stream": rng.STREAM_HEMISPHERE,
        },
    )


def arccos_coeff(j: int) -> float:
    """Taylor coefficient of pi/2 - arccos(u) at u^j.

    arccos(u) = pi/2 - sum_{j odd} alpha_j u^j with
    alpha_j = (j-1)! / (2^{j-1} * (((j-1)/2)!)^2 * j); even j give 0.
    Evaluated in log space so j up to 200 and beyond cannot overflow.
    """
    if not isinstance(j, (int, np.integer)) or isinstance(j, bool):
        raise TypeError(f"j must be an int, got {type(j).__name__}")
    if j < 1:
        raise ValueError(f"j must be >= 1, got {j}")
    if j % 2 == 0:
        return 0.0
    half = (j + 1) // 2  # Gamma((j+1)/2) = ((j-1)/2)!
    log_val = (
        math.lgamma(j)
        - (j - 1) * math.log(2.0)
        - 2.0 * math.lgamma(half)
        - math.log(j)
    )
    return math.exp(log_val)


def relu_sum_parity_coeff(k: int) -> float:
    """Fourier coefficient at S of x -> [sum_{i in S} x_i]_+ for |S| = k even.

    Closed form (-1)^{(k-2)/2} * 2^{-(k-1)} * binom(k-2, (k-2)/2), computed
    via lgamma. Magnitude is at least 1/(4*sqrt(k)). Valid for even k in
    [4, 40]; everything else is an error.
    """
    if not isinstance(k, (int, np.integer)) or isinstance(k, bool):
        raise TypeError(f"k must be an int, got {type(k).__name__}")
    if k % 2 != 0 or not 4 <= k <= 40:
        raise ValueError(f"k must be even in [4, 40], got {k}")
    sign = -1.0 if ((k - 2) // 2) % 2 else 1.0
    log_mag = (
        -(k - 1) * math.log(2.0)
        + math.lgamma(k - 1)
        - 2.0 * math.lgamma(k / 2)
    )
    return sign * math.exp(log_mag)


def discrete_derivative(values, i: int) -> np.ndarray:
    """Tabulated D_i g(x) = (g(x with x_i=+1) - g(x with x_i=-1)) / 2.

    The output table no longer depends on bit i (both halves carry the same
    value). The coefficient of D_i g at S - {i} equals that of g at S for
    any S containing i.
    """
    v = np.asarray(values, dtype=np.float64)
    if v.ndim != 1:
        raise ValueError(f"expected a 1-d table, got shape {v.shape}")
    n = v.shape[0]
    d = n.bit_length() - 1
    if n < 2 or n != (1 << d):
        raise ValueError(f"table length {n} is not a power of two >= 2")
    if not 0 <= i < d:
        raise ValueError(f"bit {i} out of range for dim {d}")
    r = v.reshape(-1, 2, 1 << i)
    dv = (r[:, 1, :] - r[:, 0, :]) / 2.0
    out = np.empty_like(r)
    out[:, 0, :] = dv
    out[:, 1, :] = dv
    return out.reshape(n)
