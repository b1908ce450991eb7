"""
Steady-state synchronization of coupled Kerr self-oscillators.

Quantum networks are solved as sparse Lindblad steady states; a first-order
perturbative solution and a classical Langevin model serve as references.
"""

from .classical import NoiseParams, classical_phase_histogram, simulate
from .fock import ModeLayout
from .liouvillian import CapacityError, build_network_liouvillian
from .model import NetworkSpec, OscillatorParams, two_oscillators
from .perturbation import perturbative_sync
from .steadystate import DensityMatrix, SolverError, solve_steady_state
from .sync import pairwise_sync, phase_distribution, relative_phase_fourier, sync_measure

__all__ = [
    "CapacityError",
    "DensityMatrix",
    "ModeLayout",
    "NetworkSpec",
    "NoiseParams",
    "OscillatorParams",
    "SolverError",
    "build_network_liouvillian",
    "classical_phase_histogram",
    "pairwise_sync",
    "perturbative_sync",
    "phase_distribution",
    "relative_phase_fourier",
    "simulate",
    "solve_steady_state",
    "sync_measure",
    "two_oscillators",
]
