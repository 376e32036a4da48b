"""Boolean-cube Fourier analysis, ReLU parity constructions, and perturbed
gradient descent experiments."""

from .backend import available_backends, get_backend, set_backend
from .hypercube import CubePoint, Spectrum, SubsetMask, parity, walsh_hadamard
from .objectives import (
    grad_norm_gaussian_stats,
    linear_loss,
    linear_loss_grad,
    random_loss_stats,
    squared_loss_single,
    squared_loss_single_grad,
)
from .pgd import (
    PgdConfig,
    Trajectory,
    coupled_divergence,
    gaussian_walk,
    run_pgd,
    run_truncated_pgd,
)
from .relu_nets import (
    OneHiddenLayerNet,
    SingleNeuron,
    build_exact_parity_net,
    build_weak_single_neuron,
    forward,
    parameter_norm,
)
from .threshold_fourier import (
    EstimateReport,
    ThresholdFn,
    arccos_coeff,
    fourier_coeff_threshold,
    gaussian_avg_sq_coeff,
    hemisphere_overlap,
    hemisphere_overlap_mc,
    relu_sum_parity_coeff,
    threshold_spectrum,
)

__all__ = [
    "available_backends",
    "get_backend",
    "set_backend",
    "CubePoint",
    "Spectrum",
    "SubsetMask",
    "parity",
    "walsh_hadamard",
    "grad_norm_gaussian_stats",
    "linear_loss",
    "linear_loss_grad",
    "random_loss_stats",
    "squared_loss_single",
    "squared_loss_single_grad",
    "PgdConfig",
    "Trajectory",
    "coupled_divergence",
    "gaussian_walk",
    "run_pgd",
    "run_truncated_pgd",
    "OneHiddenLayerNet",
    "SingleNeuron",
    "build_exact_parity_net",
    "build_weak_single_neuron",
    "forward",
    "parameter_norm",
    "EstimateReport",
    "ThresholdFn",
    "arccos_coeff",
    "fourier_coeff_threshold",
    "gaussian_avg_sq_coeff",
    "hemisphere_overlap",
    "hemisphere_overlap_mc",
    "relu_sum_parity_coeff",
    "threshold_spectrum",
]
__version__ = "0.1.0"
