"""Exact photon statistics of a coherent pulse scattering off a two-level emitter in a waveguide."""

__version__ = "0.1.0"

from .errors import ConsistencyError, InvalidParameterError, StabilityError, TruncationWarning
from .params import DerivedParams, PolePair, SystemParams, derive, pole_pair, propagators
from .correlators import corr_time, corr_time_ode, gram, kernel, laplace_G
from .fcs import fcs_generating, lambda_combo, mandel_q, mean_counts, pmf, q_numeric
from .spectrum import amplitudes, g1_tilde, mollow_averaged, mollow_stationary, mollow_transient
from .entropy import entanglement_entropy, entropy_asymptotics, rho_matrix

__all__ = [
    "ConsistencyError",
    "DerivedParams",
    "InvalidParameterError",
    "PolePair",
    "StabilityError",
    "SystemParams",
    "TruncationWarning",
    "amplitudes",
    "corr_time",
    "corr_time_ode",
    "derive",
    "entanglement_entropy",
    "entropy_asymptotics",
    "fcs_generating",
    "g1_tilde",
    "gram",
    "kernel",
    "lambda_combo",
    "laplace_G",
    "mandel_q",
    "mean_counts",
    "mollow_averaged",
    "mollow_stationary",
    "mollow_transient",
    "pmf",
    "pole_pair",
    "propagators",
    "q_numeric",
    "rho_matrix",
]
