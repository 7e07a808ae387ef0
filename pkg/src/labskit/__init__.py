"""LABS toolkit: problem definitions, exact QAOA simulation, schedules,
minimum-finding cost models, classical solvers, circuit compilation with
parity checks, and scaling analysis."""

from ._backend import active_backend
from .core import (
    EnergyTable,
    ProblemInstance,
    SpinSequence,
    autocorrelation,
    build_energy_table,
    enumerate_terms,
    hamiltonian_value,
    merit_factor,
    sidelobe_energy,
    symmetry_orbit,
)
from .simulator import Statevector, apply_mixer, apply_phase, init_plus_state, run_qaoa

__version__ = "0.1.0"

__all__ = [
    "EnergyTable",
    "ProblemInstance",
    "SpinSequence",
    "Statevector",
    "active_backend",
    "apply_mixer",
    "apply_phase",
    "autocorrelation",
    "build_energy_table",
    "enumerate_terms",
    "hamiltonian_value",
    "init_plus_state",
    "merit_factor",
    "run_qaoa",
    "sidelobe_energy",
    "symmetry_orbit",
    "__version__",
]
