"""Exact QAOA statevector simulation.

The phase operator is applied as an elementwise multiply against the
precomputed cost-Hamiltonian diagonal; the mixer applies the single-qubit
rotation exp(-i*beta*X) qubit by qubit over stride-2^j index pairs (the same
index grouping as a fast Walsh-Hadamard transform). Both run in place: one
statevector plus at most one scratch buffer.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .core import EnergyTable, ProblemInstance
from .errors import ResourceLimitError, memory_budget_bytes


@dataclass
class Statevector:
    amplitudes: np.ndarray
    N: int

    def norm_sq(self) -> float:
        return float(np.real(np.vdot(self.amplitudes, self.amplitudes)))

    def probabilities(self) -> np.ndarray:
        a = self.amplitudes
        return (a.real * a.real + a.imag * a.imag)

    def copy(self) -> "Statevector":
        return Statevector(self.amplitudes.copy(), self.N)


def init_plus_state(N: int) -> Statevector:
    """Uniform superposition: all 2^N amplitudes equal to 2^(-N/2)."""
    if N < 1:
        raise ValueError("N must be >= 1")
    need = 16 * (1 << N)
    budget = memory_budget_bytes()
    if need > budget:
        raise ResourceLimitError(
            f"statevector for N={N} needs {need / 2**30:.1f} GiB, over the "
            f"{budget / 2**30:.1f} GiB budget (set LABS_MEM_BUDGET_GB to raise it)"
        )
    amp = np.full(1 << N, 2.0 ** (-N / 2.0), dtype=np.complex128)
    return Statevector(amp, N)


def _diagonal_for(diag, N: int) -> np.ndarray:
    if isinstance(diag, EnergyTable):
        if diag.N != N:
            raise ValueError(f"table N={diag.N} does not match state N={N}")
        return diag.hc_diagonal()
    arr = np.asarray(diag)
    if arr.shape[0] != (1 << N):
        raise ValueError("diagonal length does not match state dimension")
    return arr


def apply_phase(state: Statevector, diag, gamma: float) -> Statevector:
    """Multiply each amplitude by exp(-i*gamma*H_C(x)).

    ``diag`` is either an EnergyTable (its H_C diagonal is used) or a raw
    diagonal array. Note the convention: the exponent uses H_C, not the
    sidelobe energy; a schedule stated in the energy convention corresponds to
    gamma' = gamma/2 here, up to a global phase.
    """
    hc = _diagonal_for(diag, state.N)
    _kernels.apply_phase_inplace(state.amplitudes, hc, float(gamma))
    return state


def apply_mixer(state: Statevector, beta: float) -> Statevector:
    """Apply exp(-i*beta*X_j) on every qubit j, in place."""
    _kernels.apply_mixer_inplace(state.amplitudes, state.N, float(beta))
    return state


@dataclass
class QaoaResult:
    """Figures of merit extracted from a QAOA state."""

    N: int
    p: int
    betas: np.ndarray
    gammas: np.ndarray
    expected_merit_factor: float
    p_opt: float
    tts: float
    level_energies: np.ndarray
    level_probabilities: np.ndarray

    def to_json_dict(self) -> dict:
        return {
            "N": self.N,
            "p": self.p,
            "beta": [float(b) for b in self.betas],
            "gamma": [float(g) for g in self.gammas],
            "expected_merit_factor": self.expected_merit_factor,
            "p_opt": self.p_opt,
            "tts": self.tts,
            "levels": [
                {"energy": int(e), "probability": float(q)}
                for e, q in zip(self.level_energies, self.level_probabilities)
            ],
        }

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json_dict(), fh, indent=2)
            fh.write("\n")


def energy_level_distribution(state: Statevector, table: EnergyTable):
    """Aggregate probability mass per distinct energy, ascending.

    Returns (energies, probabilities); level index 0 is the ground level.
    """
    if table.N != state.N:
        raise ValueError("table/state size mismatch")
    energies, inverse = np.unique(table.energies, return_inverse=True)
    probs = np.bincount(inverse, weights=state.probabilities(), minlength=energies.shape[0])
    return energies, probs


def p_opt_of(state: Statevector, table: EnergyTable) -> float:
    """Probability mass on exactly optimal bitstrings (compensated sum).

    p_opt is exponentially small in N, so it is accumulated with math.fsum
    rather than a naive float loop.
    """
    a = state.amplitudes[table.optimal_indices]
    return math.fsum((a.real * a.real).tolist() + (a.imag * a.imag).tolist())


def expected_merit_factor(state: Statevector, table: EnergyTable) -> float:
    return float(np.dot(state.probabilities(), table.merit_factors()))


def evolve(state: Statevector, table: EnergyTable, betas, gammas) -> Statevector:
    betas = np.asarray(betas, dtype=np.float64)
    gammas = np.asarray(gammas, dtype=np.float64)
    if betas.shape != gammas.shape or betas.ndim != 1 or betas.shape[0] < 1:
        raise ValueError("betas and gammas must be equal-length 1-d arrays, p >= 1")
    hc = table.hc_diagonal()
    for beta, gamma in zip(betas, gammas):
        _kernels.apply_phase_inplace(state.amplitudes, hc, float(gamma))
        _kernels.apply_mixer_inplace(state.amplitudes, state.N, float(beta))
    return state


def run_qaoa(instance: ProblemInstance, schedule, table: EnergyTable,
             return_state: bool = False):
    """Simulate the full QAOA circuit and extract figures of merit.

    ``schedule`` is anything with ``betas``/``gammas`` attributes or a
    (betas, gammas) pair. Returns a QaoaResult; with return_state=True returns
    (result, state).
    """
    if instance.N != table.N:
        raise ValueError("instance/table size mismatch")
    if hasattr(schedule, "betas"):
        betas, gammas = schedule.betas, schedule.gammas
    else:
        betas, gammas = schedule
    state = init_plus_state(instance.N)
    evolve(state, table, betas, gammas)
    popt = p_opt_of(state, table)
    energies, probs = energy_level_distribution(state, table)
    result = QaoaResult(
        N=instance.N,
        p=len(betas),
        betas=np.asarray(betas, dtype=np.float64),
        gammas=np.asarray(gammas, dtype=np.float64),
        expected_merit_factor=expected_merit_factor(state, table),
        p_opt=popt,
        tts=(1.0 / popt) if popt > 0 else float("inf"),
        level_energies=energies,
        level_probabilities=probs,
    )
    if return_state:
        return result, state
    return result
