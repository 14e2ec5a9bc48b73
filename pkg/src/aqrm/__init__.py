"""Heat kernel, partition function and spectral zeta of the asymmetric quantum Rabi model."""

from .model import DegenerateModelError, HeatTime, ModelParams, exp_spin, h_func, mu, one_step_kernel

__version__ = "0.1.0"

__all__ = [
    "DegenerateModelError",
    "HeatTime",
    "ModelParams",
    "exp_spin",
    "h_func",
    "mu",
    "one_step_kernel",
]
