"""Small gate-level statevector simulator.

Used for circuit-equivalence checks and the explicit (ancilla-carrying)
simulation of checked circuits. Little-endian qubit order: bit j of the basis
index is qubit j. Not performance-critical; plain numpy throughout.
"""
from __future__ import annotations

import numpy as np

from .compiler import Circuit, Gate

_INV_SQRT2 = 1.0 / np.sqrt(2.0)


def zero_state(n: int) -> np.ndarray:
    psi = np.zeros(1 << n, dtype=np.complex128)
    psi[0] = 1.0
    return psi


def plus_state(n: int) -> np.ndarray:
    return np.full(1 << n, 2.0 ** (-n / 2.0), dtype=np.complex128)


def _bit(idx: np.ndarray, q: int) -> np.ndarray:
    return (idx >> q) & 1


def apply_gate(psi: np.ndarray, n: int, gate: Gate, rng=None):
    """Apply one gate in place; returns (psi, outcome) where outcome is the
    measured bit for MEASURE gates and None otherwise."""
    idx = np.arange(psi.shape[0])
    kind = gate.kind
    if kind == "H":
        (q,) = gate.qubits
        v = psi.reshape(-1, 2, 1 << q)
        a0 = v[:, 0, :].copy()
        a1 = v[:, 1, :]
        v[:, 0, :] = (a0 + a1) * _INV_SQRT2
        v[:, 1, :] = (a0 - a1) * _INV_SQRT2
    elif kind == "RX":
        (q,) = gate.qubits
        c = np.cos(gate.angle / 2.0)
        ms = -1j * np.sin(gate.angle / 2.0)
        v = psi.reshape(-1, 2, 1 << q)
        a0 = v[:, 0, :].copy()
        a1 = v[:, 1, :]
        v[:, 0, :] = c * a0 + ms * a1
        v[:, 1, :] = ms * a0 + c * a1
    elif kind == "X":
        (q,) = gate.qubits
        psi[:] = psi[idx ^ (1 << q)]
    elif kind == "Y":
        (q,) = gate.qubits
        src = idx ^ (1 << q)
        psi[:] = psi[src] * (1j * (1.0 - 2.0 * _bit(src, q)))
    elif kind == "Z":
        (q,) = gate.qubits
        psi[_bit(idx, q) == 1] *= -1.0
    elif kind == "RZ":
        (q,) = gate.qubits
        z = 1.0 - 2.0 * _bit(idx, q)
        psi *= np.exp(-0.5j * gate.angle * z)
    elif kind == "RZZ":
        a, b = gate.qubits
        z = 1.0 - 2.0 * (_bit(idx, a) ^ _bit(idx, b))
        psi *= np.exp(-0.5j * gate.angle * z)
    elif kind == "CZ":
        a, b = gate.qubits
        psi[(_bit(idx, a) & _bit(idx, b)) == 1] *= -1.0
    elif kind == "CNOT":
        c, t = gate.qubits
        sel = (_bit(idx, c) == 1) & (_bit(idx, t) == 0)
        lo = idx[sel]
        hi = lo | (1 << t)
        tmp = psi[lo].copy()
        psi[lo] = psi[hi]
        psi[hi] = tmp
    elif kind == "MEASURE":
        (q,) = gate.qubits
        mask = _bit(idx, q) == 1
        p1 = float(np.sum(np.abs(psi[mask]) ** 2))
        if rng is None:
            outcome = 1 if p1 > 0.5 else 0  # deterministic branch only
            if 1e-12 < p1 < 1.0 - 1e-12:
                raise ValueError("MEASURE on a non-deterministic qubit needs an rng")
        else:
            outcome = 1 if rng.random() < p1 else 0
        keep = mask if outcome == 1 else ~mask
        psi[~keep] = 0.0
        norm = np.sqrt(float(np.sum(np.abs(psi) ** 2)))
        if norm == 0.0:
            raise ValueError("measurement projected onto a zero-norm branch")
        psi /= norm
        return psi, outcome
    elif kind == "RESET":
        (q,) = gate.qubits
        _, outcome = apply_gate(psi, n, Gate("MEASURE", (q,)), rng)
        if outcome == 1:
            apply_gate(psi, n, Gate("X", (q,)), rng)
    else:
        raise ValueError(f"unknown gate kind {gate.kind!r}")
    return psi, None


def simulate_gates(gates, n: int, psi0: np.ndarray | None = None, rng=None):
    """Run a gate list; returns (final state, list of measurement outcomes)."""
    psi = zero_state(n) if psi0 is None else psi0.copy()
    outcomes = []
    for g in gates:
        psi, out = apply_gate(psi, n, g, rng)
        if out is not None:
            outcomes.append(out)
    return psi, outcomes


def simulate_circuit(circuit: Circuit, psi0: np.ndarray | None = None, rng=None):
    return simulate_gates(circuit.gates, circuit.n_qubits, psi0=psi0, rng=rng)


def gates_unitary(gates, n: int) -> np.ndarray:
    """Dense unitary of a measurement-free gate list (columns = basis images)."""
    dim = 1 << n
    U = np.zeros((dim, dim), dtype=np.complex128)
    for col in range(dim):
        psi = np.zeros(dim, dtype=np.complex128)
        psi[col] = 1.0
        for g in gates:
            if g.kind in ("MEASURE", "RESET"):
                raise ValueError("unitary undefined for circuits with measurements")
            apply_gate(psi, n, g)
        U[:, col] = psi
    return U


def states_equal_up_to_phase(a: np.ndarray, b: np.ndarray, tol: float = 1e-8) -> float:
    """Max amplitude deviation after aligning global phase; compares |a> ~ e^{i phi}|b>."""
    k = int(np.argmax(np.abs(b)))
    if abs(b[k]) == 0:
        return float(np.max(np.abs(a - b)))
    phase = a[k] / b[k]
    mag = abs(phase)
    if mag == 0:
        return float(np.max(np.abs(a - b)))
    phase /= mag
    return float(np.max(np.abs(a - phase * b)))
