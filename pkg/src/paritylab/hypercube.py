"""Boolean cube primitives: points, subset masks, parities, spectra.

Points of {-1,+1}^d and subsets of coordinates are both packed into integer
bitmasks (bit i of a point <=> coordinate x_i = +1, bit i of a subset <=>
coordinate i belongs to the subset). The parity character on subset S is
parity(S, x) = prod_{i in S} x_i, and the spectrum of a tabulated function
g collects all 2^d coefficients E_x[g(x) * parity(S, x)].

Exhaustive enumeration is kept honest up to MAX_DIM = 24 (a 2^24 table of
doubles is 128 MB); everything here is deterministic and reproducible bit
for bit across runs.
"""

from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .backend import K

MAX_DIM = 24


def _check_dim(dim):
    if not isinstance(dim, (int, np.integer)) or isinstance(dim, bool):
        raise TypeError(f"dim must be an int, got {type(dim).__name__}")
    if dim < 1:
        raise ValueError(f"dim must be positive, got {dim}")


@dataclass(frozen=True)
class SubsetMask:
    """Subset S of coordinates {0, ..., dim-1}, packed as a bitmask."""

    bits: int
    dim: int

    def __post_init__(self):
        _check_dim(self.dim)
        if not 0 <= self.bits < (1 << self.dim):
            raise ValueError(
                f"bits {self.bits:#x} out of range for dim {self.dim}"
            )

    @classmethod
    def from_indices(cls, indices: Iterable[int], dim: int) -> "SubsetMask":
        bits = 0
        for i in indices:
            if not 0 <= i < dim:
                raise ValueError(f"index {i} out of range for dim {dim}")
            bits |= 1 << i
        return cls(bits, dim)

    @classmethod
    def first_k(cls, k: int, dim: int) -> "SubsetMask":
        """The subset {0, ..., k-1}."""
        if not 0 <= k <= dim:
            raise ValueError(f"k={k} out of range for dim {dim}")
        return cls((1 << k) - 1, dim)

    def indices(self) -> tuple:
        return tuple(i for i in range(self.dim) if (self.bits >> i) & 1)

    @property
    def size(self) -> int:
        """|S|."""
        return self.bits.bit_count()

    def contains(self, i: int) -> bool:
        return bool((self.bits >> i) & 1)

    def sym_diff(self, other: "SubsetMask") -> "SubsetMask":
        if other.dim != self.dim:
            raise ValueError(f"dim mismatch: {self.dim} vs {other.dim}")
        return SubsetMask(self.bits ^ other.bits, self.dim)


@dataclass(frozen=True)
class CubePoint:
    """Point of {-1,+1}^dim; bit i set <=> coordinate i equals +1."""

    bits: int
    dim: int

    def __post_init__(self):
        _check_dim(self.dim)
        if not 0 <= self.bits < (1 << self.dim):
            raise ValueError(
                f"bits {self.bits:#x} out of range for dim {self.dim}"
            )

    @classmethod
    def from_vector(cls, vec: Sequence[float]) -> "CubePoint":
        bits = 0
        for i, v in enumerate(vec):
            if v == 1:
                bits |= 1 << i
            elif v != -1:
                raise ValueError(f"coordinate {i} is {v}, expected +-1")
        return cls(bits, len(vec))

    def coordinate(self, i: int) -> int:
        if not 0 <= i < self.dim:
            raise ValueError(f"index {i} out of range for dim {self.dim}")
        return 1 if (self.bits >> i) & 1 else -1

    def to_vector(self) -> np.ndarray:
        out = np.full(self.dim, -1.0)
        for i in range(self.dim):
            if (self.bits >> i) & 1:
                out[i] = 1.0
        return out

    def flip(self, i: int) -> "CubePoint":
        if not 0 <= i < self.dim:
            raise ValueError(f"index {i} out of range for dim {self.dim}")
        return CubePoint(self.bits ^ (1 << i), self.dim)


@dataclass
class Spectrum:
    """All 2^dim Fourier coefficients of a function on {-1,+1}^dim.

    coeffs[s] = E_x[g(x) * parity(s, x)], indexed by subset bitmask.
    """

    dim: int
    coeffs: np.ndarray = field(repr=False)

    def __post_init__(self):
        _check_dim(self.dim)
        self.coeffs = np.asarray(self.coeffs, dtype=np.float64)
        if self.coeffs.shape != (1 << self.dim,):
            raise ValueError(
                f"expected {1 << self.dim} coefficients, got {self.coeffs.shape}"
            )

    def coeff(self, s: SubsetMask) -> float:
        if s.dim != self.dim:
            raise ValueError(f"dim mismatch: {s.dim} vs {self.dim}")
        return float(self.coeffs[s.bits])

    def total_power(self) -> float:
        """Sum of squared coefficients (equals E[g^2] by Parseval)."""
        return float(np.sum(self.coeffs * self.coeffs))


def parity(s: SubsetMask, x: CubePoint) -> int:
    """prod_{i in S} x_i, in {-1, +1}; parity(empty, x) = +1."""
    if s.dim != x.dim:
        raise ValueError(f"dim mismatch: subset dim {s.dim}, point dim {x.dim}")
    mask = (1 << s.dim) - 1
    negatives = s.bits & ~x.bits & mask
    return -1 if negatives.bit_count() & 1 else 1


def _check_enum_dim(dim):
    _check_dim(dim)
    if dim > MAX_DIM:
        raise ValueError(f"dim {dim} exceeds MAX_DIM={MAX_DIM} for enumeration")


def tabulate(g: Callable[[CubePoint], float], dim: int) -> np.ndarray:
    """Evaluate g on all 2^dim points, indexed by point bitmask."""
    _check_enum_dim(dim)
    n = 1 << dim
    return np.fromiter(
        (g(CubePoint(bits, dim)) for bits in range(n)), dtype=np.float64, count=n
    )


def expect_over_cube(g: Callable[[CubePoint], float], dim: int) -> float:
    """E_x[g(x)] by exhaustive enumeration (numpy pairwise summation)."""
    values = tabulate(g, dim)
    return float(np.sum(values)) / values.shape[0]


def walsh_hadamard(values) -> Spectrum:
    """Spectrum of a tabulated function.

    `values` has length 2^dim, indexed by point bitmask; anything else is an
    error. The butterfly runs unnormalized with a single final 2^-dim
    scaling (one rounding site instead of dim of them).
    """
    a = np.array(values, dtype=np.float64)
    if a.ndim != 1:
        raise ValueError(f"expected a 1-d table, got shape {a.shape}")
    n = a.shape[0]
    dim = n.bit_length() - 1
    if n < 2 or n != (1 << dim):
        raise ValueError(f"table length {n} is not a power of two >= 2")
    K.wht_inplace(a)
    a /= n
    return Spectrum(dim, a)
