"""Holstein-Jaynes-Cummings simulator: polaron decoupling and cavity electron transfer."""

__version__ = "0.1.0"

from .exceptions import BasisSizeError, ConvergenceError, DomainError, HJCError, ParameterError
from .model import Basis, BasisState, ModelParams, Truncation, enumerate_basis, huang_rhys_from_shift
from .quantum_ops import boltzmann_weights, displacement_element, fc_factor
from .hamiltonian import SparseHermitian, build_hjc, projector_P, projector_Q
from .solver import EigenResult, lowest_eigenpairs
from .polaron import P0Result, compute_p0, dressed_energy, dressed_state_vector, p0_bound, sweep_p0
from .disorder import DisorderSpec, EnsembleStats, ensemble_p0, sample_detunings
from .etrate import ETParams, RateResult, asymptotic_ratio, et_rate_cavity, et_rate_free, lineshape, sweep_ratio

__all__ = [
    "BasisSizeError",
    "ConvergenceError",
    "DomainError",
    "HJCError",
    "ParameterError",
    "Basis",
    "BasisState",
    "ModelParams",
    "Truncation",
    "enumerate_basis",
    "huang_rhys_from_shift",
    "boltzmann_weights",
    "displacement_element",
    "fc_factor",
    "SparseHermitian",
    "build_hjc",
    "projector_P",
    "projector_Q",
    "EigenResult",
    "lowest_eigenpairs",
    "P0Result",
    "compute_p0",
    "dressed_energy",
    "dressed_state_vector",
    "p0_bound",
    "sweep_p0",
    "DisorderSpec",
    "EnsembleStats",
    "ensemble_p0",
    "sample_detunings",
    "ETParams",
    "RateResult",
    "asymptotic_ratio",
    "et_rate_cavity",
    "et_rate_free",
    "lineshape",
    "sweep_ratio",
]
