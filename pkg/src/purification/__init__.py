"""Purification of quantum states through repeated measurements.

A subsystem B coupled to a repeatedly measured subsystem A evolves, between
successful measurements, under the non-unitary projected operator
``V = <phi| exp(-iH tau) |phi>``. Iterating V drives B to the right
eigenvector of its largest eigenvalue. This package builds V for three
small qubit models, analyses its biorthogonal spectrum, iterates the
conditioned dynamics, and searches parameters for optimal purification.
"""

from .engine import AsymptoticPrediction, PurificationTrajectory, crosscheck, iterate, predict_asymptotics
from .linalg import SpectralDecomposition, eig_biorthogonal, herm_expm, mat_power_apply
from .models import (
    MediatorParams,
    ModelConfig,
    SuccessiveParams,
    TwoQubitParams,
    build_hamiltonian,
    projected_operator,
)
from .quantum import DensityMatrix, ProjectorSpec, RegisterLayout, bell_basis, concurrence, fidelity_to

__version__ = "0.1.0"

__all__ = [
    "AsymptoticPrediction",
    "DensityMatrix",
    "MediatorParams",
    "ModelConfig",
    "ProjectorSpec",
    "PurificationTrajectory",
    "RegisterLayout",
    "SpectralDecomposition",
    "SuccessiveParams",
    "TwoQubitParams",
    "bell_basis",
    "build_hamiltonian",
    "concurrence",
    "crosscheck",
    "eig_biorthogonal",
    "fidelity_to",
    "herm_expm",
    "iterate",
    "mat_power_apply",
    "predict_asymptotics",
    "projected_operator",
]
