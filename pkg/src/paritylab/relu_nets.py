"""One-hidden-layer ReLU networks and the two explicit parity constructions.

A width-n network computes N(x) = sum_j u_j * [w_j.x + b_j]_+ (no output
bias). The two constructions:

* build_exact_parity_net: width |S|+1 net computing parity(S, x) exactly on
  every cube point, with integer parameters and norm at most 6*|S|^{3/2}.
  Neuron j (j = 0..|S|) has w_j = -1_S, b_j = |S|+1-2j, and output weight
  u_0 = 1, u_j = 4j*(-1)^j. On the cube, -1_S.x + |S|+1-2j ranges over even
  integers, and the alternating weighted sum telescopes to parity.
* build_weak_single_neuron: sign * [w.x]_+ with w = 0.5*|S|^{-3/2} on S,
  whose squared loss against parity(S, .) is at most 1 - 1/(8|S|^2) for
  even |S| >= 4 (strictly below the trivial loss 1).
"""

import math
from dataclasses import dataclass

import numpy as np

from .backend import K
from .hypercube import CubePoint, SubsetMask


def _as_param_array(a, name, shape=None):
    out = np.asarray(a, dtype=np.float64)
    if shape is not None and out.shape != shape:
        raise ValueError(f"{name} has shape {out.shape}, expected {shape}")
    if out.size and not np.all(np.isfinite(out)):
        raise ValueError(f"{name} must be finite")
    return out


@dataclass
class OneHiddenLayerNet:
    """Parameters (u, W, b) of x -> sum_j u_j * [W[j].x + b[j]]_+."""

    u: np.ndarray
    W: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        self.u = _as_param_array(np.atleast_1d(self.u), "u")
        if self.u.ndim != 1:
            raise ValueError(f"u must be a vector, got shape {self.u.shape}")
        n = self.u.shape[0]
        self.W = _as_param_array(self.W, "W")
        if self.W.ndim != 2 or self.W.shape[0] != n:
            raise ValueError(
                f"W must have shape ({n}, d), got {self.W.shape}"
            )
        self.b = _as_param_array(np.atleast_1d(self.b), "b", (n,))

    @property
    def n(self) -> int:
        return self.u.shape[0]

    @property
    def d(self) -> int:
        return self.W.shape[1]

    def to_json_dict(self) -> dict:
        return {
            "n": self.n,
            "d": self.d,
            "u": self.u.tolist(),
            "W": self.W.tolist(),
            "b": self.b.tolist(),
        }

    @classmethod
    def from_json_dict(cls, obj: dict) -> "OneHiddenLayerNet":
        net = cls(
            u=np.asarray(obj["u"], dtype=np.float64),
            W=np.asarray(obj["W"], dtype=np.float64).reshape(obj["n"], obj["d"]),
            b=np.asarray(obj["b"], dtype=np.float64),
        )
        return net


@dataclass
class SingleNeuron:
    """x -> sign * [w.x + b]_+ with sign in {-1, +1}."""

    sign: int
    w: np.ndarray
    b: float = 0.0

    def __post_init__(self):
        if self.sign not in (-1, 1):
            raise ValueError(f"sign must be -1 or +1, got {self.sign}")
        self.sign = int(self.sign)
        self.w = _as_param_array(np.atleast_1d(self.w), "w")
        if self.w.ndim != 1 or self.w.shape[0] < 1:
            raise ValueError(f"w must be a nonempty vector, got {self.w.shape}")
        if not math.isfinite(self.b):
            raise ValueError("b must be finite")
        self.b = float(self.b)

    @property
    def d(self) -> int:
        return self.w.shape[0]

    def to_json_dict(self) -> dict:
        return {"sign": self.sign, "w": self.w.tolist(), "b": self.b}

    @classmethod
    def from_json_dict(cls, obj: dict) -> "SingleNeuron":
        return cls(sign=obj["sign"], w=np.asarray(obj["w"], dtype=np.float64),
                   b=obj["b"])


def forward(net, x: CubePoint) -> float:
    """Evaluate a OneHiddenLayerNet or SingleNeuron at a cube point."""
    if isinstance(net, SingleNeuron):
        if x.dim != net.d:
            raise ValueError(f"dim mismatch: point {x.dim}, net {net.d}")
        return net.sign * max(float(net.w @ x.to_vector()) + net.b, 0.0)
    if x.dim != net.d:
        raise ValueError(f"dim mismatch: point {x.dim}, net {net.d}")
    xv = x.to_vector()
    pre = net.W @ xv + net.b
    return float(net.u @ np.maximum(pre, 0.0))


def forward_on_cube(net) -> np.ndarray:
    """Network values on all 2^d points, indexed by point bitmask."""
    if isinstance(net, SingleNeuron):
        pre = K.dot_table(net.w) + net.b
        return net.sign * np.maximum(pre, 0.0)
    out = np.zeros(1 << net.d)
    for j in range(net.n):
        pre = K.dot_table(net.W[j]) + net.b[j]
        out += net.u[j] * np.maximum(pre, 0.0)
    return out


def parameter_norm(net: OneHiddenLayerNet) -> float:
    """Euclidean norm of the flattened parameter vector (u, W, b)."""
    total = (
        float(np.sum(net.u * net.u))
        + float(np.sum(net.W * net.W))
        + float(np.sum(net.b * net.b))
    )
    return math.sqrt(total)


def build_exact_parity_net(d: int, s: SubsetMask) -> OneHiddenLayerNet:
    """Width |S|+1 net computing parity(s, .) exactly on {-1,+1}^d.

    All parameters are small integers; coordinates outside s carry zero
    weight; parameter_norm is at most 6*|S|^{3/2}.
    """
    if s.dim != d:
        raise ValueError(f"dim mismatch: subset dim {s.dim}, d {d}")
    k = s.size
    if k < 1:
        raise ValueError("s must be nonempty")
    row = np.zeros(d)
    for i in s.indices():
        row[i] = -1.0
    W = np.tile(row, (k + 1, 1))
    b = np.array([float(k + 1 - 2 * j) for j in range(k + 1)])
    u = np.array([1.0] + [4.0 * j * (-1.0 if j % 2 else 1.0) for j in range(1, k + 1)])
    return OneHiddenLayerNet(u=u, W=W, b=b)


def build_weak_single_neuron(s: SubsetMask) -> SingleNeuron:
    """Single neuron with squared loss <= 1 - 1/(8|S|^2) against parity(s, .).

    Requires |S| even and >= 4 (the sign of the ReLU-sum coefficient
    alternates with (|S|-2)/2, and the closed form needs |S| >= 4).
    """
    k = s.size
    if k % 2 != 0 or k < 4:
        raise ValueError(f"|S| must be even and >= 4, got {k}")
    sign = -1 if ((k - 2) // 2) % 2 else 1
    w = np.zeros(s.dim)
    scale = 0.5 * k ** (-1.5)
    for i in s.indices():
        w[i] = scale
    return SingleNeuron(sign=sign, w=w, b=0.0)
