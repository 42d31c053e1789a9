"""Dissipative single-excitation dynamics of quasiperiodic mosaic lattices.

Poles and residues of the Laplace-domain solution, direct time-domain
oracles, and IPR-based Mpemba-crossing analysis.
"""

__version__ = "0.1.0"

from .errors import ConfigError, DomainError, IllConditionedError, MosaicError, NumericalError
from .lattice import GOLDEN_BETA, HamiltonianMatrix, ModelSpec, build_hamiltonian, onsite_potential
from .localization import (EigenSystem, MobilityEdgeReport, asymptotic_edges, chebyshev_a,
                           eigendecompose, gaah_mobility_edge, ipr, ipr_spectrum, mobility_edges)
from .laplace import (AugmentedGenerator, PoleDecomposition, SpectralDensityParams, build_augmented,
                      classify_steady, decompose, find_poles, overlap_matrix, reconstruct_amplitudes,
                      residues, self_energy)
from .trajectory import Trajectory
from .dynamics import integrate_auxiliary, integrate_volterra, memory_kernel
from .analysis import (CrossingReport, IprCurve, SweepResult, detect_crossings, ipr_curve_from_poles,
                       ipr_trajectory, pole_sweep, survival_probability)

__all__ = [
    "AugmentedGenerator", "ConfigError", "CrossingReport", "DomainError", "EigenSystem", "GOLDEN_BETA",
    "HamiltonianMatrix", "IllConditionedError", "IprCurve", "MobilityEdgeReport", "ModelSpec",
    "MosaicError", "NumericalError", "PoleDecomposition", "SpectralDensityParams", "SweepResult",
    "Trajectory", "asymptotic_edges", "build_augmented", "build_hamiltonian", "chebyshev_a",
    "classify_steady", "decompose", "detect_crossings", "eigendecompose", "find_poles",
    "gaah_mobility_edge", "integrate_auxiliary", "integrate_volterra", "ipr", "ipr_curve_from_poles",
    "ipr_spectrum", "ipr_trajectory", "memory_kernel", "mobility_edges", "onsite_potential", "overlap_matrix",
    "pole_sweep", "reconstruct_amplitudes", "residues", "self_energy", "survival_probability",
]
