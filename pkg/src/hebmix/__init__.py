"""Mixed Boolean/Gaussian Hebbian networks.

Exact small-system oracles, Glauber/Metropolis Monte Carlo, a
replica-symmetric self-consistency solver and phase-diagram scans for
Hopfield-type networks storing an extensive load of Gaussian patterns on
top of a low load of Boolean ones.
"""

__version__ = "0.1.0"

from .backend import available_backends, backend_name
from .model import (
    Observables,
    PatternSet,
    generate_patterns,
    hebbian_couplings,
    hidden_overlap,
    mattis_magnetization,
    mixed_hamiltonian,
    observables,
    replica_overlap,
)
from .rs import RSOrderParams, RSSolution, SolverSettings, enumerate_branches, solve_fixed_point

__all__ = [
    "__version__",
    "available_backends",
    "backend_name",
    "PatternSet",
    "Observables",
    "generate_patterns",
    "hebbian_couplings",
    "hidden_overlap",
    "mattis_magnetization",
    "mixed_hamiltonian",
    "observables",
    "replica_overlap",
    "RSOrderParams",
    "RSSolution",
    "SolverSettings",
    "enumerate_branches",
    "solve_fixed_point",
]
