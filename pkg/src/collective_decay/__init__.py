"""Collective decay of qubits into a shared Lorentzian cavity mode.

Closed-form single-excitation dynamics, the decoherence-free subspace of the
collective coupling, entanglement diagnostics and numerical oracles.
"""
__version__ = "0.1.0"

from .errors import ConfigError, NumericalError
from .propagator import BathSpec, PropagatorParams, decay_rate, phi
from .dfs import CouplingProfile, SectorState, subradiant_basis, superradiant_state
from .evolution import evolve, trajectory, density_matrix
from .entanglement import find_tstar, ncr_star, negativity

__all__ = [
    "BathSpec",
    "ConfigError",
    "CouplingProfile",
    "NumericalError",
    "PropagatorParams",
    "SectorState",
    "decay_rate",
    "density_matrix",
    "evolve",
    "find_tstar",
    "ncr_star",
    "negativity",
    "phi",
    "subradiant_basis",
    "superradiant_state",
    "trajectory",
]
