"""Kernel backend selection.

The scalar cube reductions (Fourier coefficients, ReLU moments, losses) are
the hot loops; a compiled Gray-code extension implements them when it built
successfully, with the pure NumPy module as fallback. Selection happens at
import; `set_backend` switches explicitly (tests and benchmarks use it).
Table kernels (dot/parity tables, the Walsh-Hadamard butterfly) are shared:
they are memory-bound NumPy passes either way.
"""

from types import SimpleNamespace

from . import _kernels_pure as _pure

try:
    from . import _kernels_c as _compiled
except ImportError:  # extension not built; pure fallback
    _compiled = None

_SCALAR_OPS = (
    "threshold_parity_mean",
    "indicator_parity_moments",
    "relu_parity_mean",
    "relu_moments",
    "relu_sq_mean",
    "single_sq_loss",
)
_TABLE_OPS = ("dot_table", "parity_table", "wht_inplace")


def _assemble(scalar_module):
    ns = SimpleNamespace(name=scalar_module.BACKEND_NAME)
    for op in _SCALAR_OPS:
        setattr(ns, op, getattr(scalar_module, op))
    for op in _TABLE_OPS:
        setattr(ns, op, getattr(_pure, op))
    return ns


_BACKENDS = {"pure": _assemble(_pure)}
if _compiled is not None:
    _BACKENDS["compiled"] = _assemble(_compiled)

_active = _BACKENDS.get("compiled", _BACKENDS["pure"])


def available_backends():
    return tuple(sorted(_BACKENDS))


def get_backend() -> str:
    """Name of the active kernel backend ("compiled" or "pure")."""
    return _active.name


def set_backend(name: str) -> str:
    """Activate a backend by name; returns the previously active name."""
    global _active
    if name not in _BACKENDS:
        raise ValueError(
            f"unknown backend {name!r}; available: {available_backends()}"
        )
    previous = _active.name
    _active = _BACKENDS[name]
    return previous


class _KernelProxy:
    """Attribute access resolves against the active backend at call time."""

    def __getattr__(self, op):
        return getattr(_active, op)


K = _KernelProxy()
