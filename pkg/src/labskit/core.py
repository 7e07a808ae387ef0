"""LABS problem definitions: sequences, energies, interaction terms, symmetries.

Conventions used throughout the package:

* Spins are ±1, stored as int8 arrays, 0-based position ``j`` holding the
  sequence element ``s_{j+1}``.
* A spin sequence maps to a bitstring index little-endian: bit ``j`` of the
  index is ``b_j = (1 - s_{j+1}) / 2``, so bit 0 corresponds to sequence
  position 1 and bit value 0 to spin +1.
* Interaction terms are 1-based index tuples (matching the problem's
  summation ranges); they are converted to 0-based qubit indices only at the
  compiler boundary.
"""
from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import _kernels
from ._backend import USE_NUMBA
from .errors import ResourceLimitError, memory_budget_bytes


def as_spins(seq) -> np.ndarray:
    """Normalize a ±1 sequence (list, array, SpinSequence) to an int8 array."""
    if isinstance(seq, SpinSequence):
        return seq.spins
    arr = np.asarray(seq, dtype=np.int64)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError("spin sequence must be a non-empty 1-d array")
    if not np.all(np.abs(arr) == 1):
        raise ValueError("spins must be exactly +1 or -1")
    return arr.astype(np.int8)


@dataclass(frozen=True)
class SpinSequence:
    """An N-spin ±1 configuration."""

    spins: np.ndarray

    def __post_init__(self):
        arr = as_spins(self.spins) if not isinstance(self.spins, np.ndarray) else self.spins
        if arr.dtype != np.int8:
            arr = as_spins(arr)
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "spins", arr)

    @property
    def n(self) -> int:
        return int(self.spins.shape[0])

    @classmethod
    def from_string(cls, text: str) -> "SpinSequence":
        """Parse a '+-' string, first character = sequence position 1."""
        vals = []
        for ch in text:
            if ch == "+":
                vals.append(1)
            elif ch == "-":
                vals.append(-1)
            else:
                raise ValueError(f"invalid spin character {ch!r}")
        return cls(np.array(vals, dtype=np.int8))

    @classmethod
    def from_index(cls, x: int, N: int) -> "SpinSequence":
        return cls(spins_from_index(x, N))

    def to_index(self) -> int:
        return index_from_spins(self.spins)

    def to_string(self) -> str:
        return "".join("+" if s == 1 else "-" for s in self.spins)

    def __array__(self, dtype=None):
        return self.spins if dtype is None else self.spins.astype(dtype)

    def __len__(self) -> int:
        return self.n


def spins_from_index(x: int, N: int) -> np.ndarray:
    if not 0 <= x < (1 << N):
        raise ValueError(f"index {x} out of range for N={N}")
    bits = (x >> np.arange(N, dtype=np.uint64)) & 1
    return (1 - 2 * bits).astype(np.int8)


def index_from_spins(spins) -> int:
    s = as_spins(spins)
    bits = ((1 - s.astype(np.int64)) // 2).astype(np.uint64)
    return int((bits << np.arange(s.shape[0], dtype=np.uint64)).sum())


def indices_to_spin_matrix(indices: np.ndarray, N: int) -> np.ndarray:
    bits = (indices[:, None].astype(np.uint64) >> np.arange(N, dtype=np.uint64)[None, :]) & 1
    return (1 - 2 * bits).astype(np.int8)


# ---------------------------------------------------------------------------
# Energies
# ---------------------------------------------------------------------------


def autocorrelation(seq, k: int) -> int:
    """Aperiodic autocorrelation at shift k: sum_i s_i s_{i+k}, 1 <= k <= N-1."""
    s = as_spins(seq).astype(np.int64)
    N = s.shape[0]
    if not 1 <= k <= N - 1:
        raise ValueError(f"shift k={k} out of range [1, {N - 1}]")
    return int(np.dot(s[: N - k], s[k:]))


def autocorrelations(seq) -> np.ndarray:
    """All shifts as an int64 array of length N-1 (entry j = shift j+1)."""
    s = as_spins(seq).astype(np.int64)
    N = s.shape[0]
    return np.array([np.dot(s[: N - k], s[k:]) for k in range(1, N)], dtype=np.int64)


def sidelobe_energy(seq) -> int:
    """Sum of squared autocorrelations over all shifts (the LABS objective)."""
    a = autocorrelations(seq)
    return int(np.dot(a, a))


def merit_factor(seq) -> float:
    """N^2 / (2 E); undefined for N <= 1."""
    s = as_spins(seq)
    N = s.shape[0]
    if N <= 1:
        raise ValueError("merit factor undefined for N <= 1 (zero sidelobe energy)")
    e = sidelobe_energy(s)
    return N * N / (2.0 * e)


def merit_factor_from_energy(N: int, energy) -> float:
    return N * N / (2.0 * np.asarray(energy, dtype=np.float64))


# ---------------------------------------------------------------------------
# Interaction terms
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ProblemInstance:
    """Two- and four-spin interaction terms of the LABS cost Hamiltonian.

    Index tuples are 1-based and strictly increasing. Four-body terms carry
    coefficient 2, two-body terms coefficient 1; the sidelobe energy equals
    ``constant_offset + 2 * hamiltonian_value``.
    """

    N: int
    two_body_terms: tuple = field(repr=False)
    four_body_terms: tuple = field(repr=False)

    @property
    def constant_offset(self) -> int:
        return self.N * (self.N - 1) // 2


def enumerate_terms(N: int) -> ProblemInstance:
    """Generate the interaction index sets for an N-spin instance.

    Two-body pairs (i, i+2k) for i in [1, N-2], k in [1, floor((N-i)/2)];
    four-body quadruples (i, i+t, i+k, i+k+t) for i in [1, N-3],
    t in [1, floor((N-i-1)/2)], k in [t+1, N-i-t].
    """
    if N < 2:
        raise ValueError("N must be >= 2")
    two = []
    for i in range(1, N - 1):
        for k in range(1, (N - i) // 2 + 1):
            two.append((i, i + 2 * k))
    four = []
    for i in range(1, N - 2):
        for t in range(1, (N - i - 1) // 2 + 1):
            for k in range(t + 1, N - i - t + 1):
                four.append((i, i + t, i + k, i + k + t))
    for q in four:
        if not (q[0] < q[1] < q[2] < q[3] <= N):
            raise AssertionError(f"malformed four-body term {q}")
        if q[1] - q[0] != q[3] - q[2]:
            raise AssertionError(f"four-body term {q} violates j-i == l-k")
    if len(set(two)) != len(two) or len(set(four)) != len(four):
        raise AssertionError("duplicate interaction terms generated")
    return ProblemInstance(N=N, two_body_terms=tuple(two), four_body_terms=tuple(four))


def hamiltonian_value(instance: ProblemInstance, seq) -> int:
    """Cost-Hamiltonian value: 2*sum(four-body products) + sum(two-body products)."""
    s = as_spins(seq).astype(np.int64)
    if s.shape[0] != instance.N:
        raise ValueError(f"sequence length {s.shape[0]} != instance N {instance.N}")
    total = 0
    for (i, j) in instance.two_body_terms:
        total += s[i - 1] * s[j - 1]
    for (i, j, k, l) in instance.four_body_terms:
        total += 2 * s[i - 1] * s[j - 1] * s[k - 1] * s[l - 1]
    return int(total)


def term_products_value(terms: Iterable[tuple], coeffs: Iterable[int], seq) -> int:
    """Generic evaluator: sum_j coeff_j * prod_{i in term_j} s_i (1-based)."""
    s = as_spins(seq).astype(np.int64)
    total = 0
    for term, c in zip(terms, coeffs):
        p = 1
        for i in term:
            p *= s[i - 1]
        total += c * p
    return int(total)


# ---------------------------------------------------------------------------
# Symmetries
# ---------------------------------------------------------------------------


def negate(seq) -> np.ndarray:
    return (-as_spins(seq)).astype(np.int8)


def reverse(seq) -> np.ndarray:
    return as_spins(seq)[::-1].copy()


def alternate_flip(seq) -> np.ndarray:
    """s_i -> (-1)^i s_i (1-based positions; odd positions change sign)."""
    s = as_spins(seq).copy()
    s[0::2] *= -1
    return s


def symmetry_orbit(seq) -> list:
    """Orbit under the order-8 group generated by negation, reversal and
    alternating flip. Deterministic order (sorted by bitstring index)."""
    start = as_spins(seq)
    seen = {}
    frontier = [start]
    while frontier:
        cur = frontier.pop()
        key = index_from_spins(cur)
        if key in seen:
            continue
        seen[key] = cur
        frontier.extend([negate(cur), reverse(cur), alternate_flip(cur)])
    return [SpinSequence(seen[k]) for k in sorted(seen)]


def orbit_indices(x: int, N: int) -> list:
    return [s.to_index() for s in symmetry_orbit(spins_from_index(x, N))]


def complement_index(x, N: int):
    return x ^ ((1 << N) - 1)


def reverse_index_permutation(N: int) -> np.ndarray:
    """Permutation array r with r[x] = index of the reversed sequence."""
    idx = np.arange(1 << N, dtype=np.int64)
    out = np.zeros_like(idx)
    for j in range(N):
        out |= ((idx >> j) & 1) << (N - 1 - j)
    return out


def alternate_flip_mask(N: int) -> int:
    """XOR mask implementing the alternating flip on bitstring indices."""
    return sum(1 << j for j in range(0, N, 2))


def is_skew_symmetric(seq) -> bool:
    """True iff N is odd and s_{k+l} = (-1)^l s_{k-l} for all l, N = 2k-1."""
    s = as_spins(seq)
    N = s.shape[0]
    if N % 2 == 0:
        return False
    k = (N + 1) // 2
    for l in range(1, k):
        if s[k + l - 1] != (-1) ** l * s[k - l - 1]:
            return False
    return True


# ---------------------------------------------------------------------------
# Incremental single-flip update
# ---------------------------------------------------------------------------


def incremental_flip_delta(seq, autocorrs: np.ndarray, i: int, validate: bool = False):
    """Energy change and updated autocorrelations for flipping s_i (1-based).

    ``autocorrs`` must hold the current shift values for ``seq`` (length N-1,
    entry j = shift j+1). Returns (delta_energy, new_autocorrs) without
    mutating the inputs. With validate=True the autocorrelations are
    recomputed and checked first.
    """
    s = as_spins(seq).astype(np.int64)
    N = s.shape[0]
    if not 1 <= i <= N:
        raise ValueError(f"flip position {i} out of range [1, {N}]")
    A = np.asarray(autocorrs, dtype=np.int64)
    if A.shape[0] != N - 1:
        raise ValueError("autocorrs must have length N-1")
    if validate and not np.array_equal(A, autocorrelations(s)):
        raise RuntimeError("stale autocorrelations passed to incremental_flip_delta")
    j = i - 1
    new = A.copy()
    delta_e = 0
    for k in range(1, N):
        d = 0
        if j + k < N:
            d += s[j + k]
        if j - k >= 0:
            d += s[j - k]
        if d:
            a_new = A[k - 1] - 2 * s[j] * d
            new[k - 1] = a_new
            delta_e += a_new * a_new - A[k - 1] * A[k - 1]
    return int(delta_e), new


# ---------------------------------------------------------------------------
# Exhaustive energy table
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EnergyTable:
    """Sidelobe energies of all 2^N configurations, indexed by bitstring."""

    N: int
    energies: np.ndarray
    min_energy: int
    optimal_indices: np.ndarray

    @property
    def degeneracy(self) -> int:
        return int(self.optimal_indices.shape[0])

    @property
    def p0(self) -> float:
        """Random-guess success probability from the actual optimum count."""
        return self.degeneracy / float(2**self.N)

    def hc_diagonal(self) -> np.ndarray:
        """Cost-Hamiltonian diagonal: (E - N(N-1)/2) / 2, exact integers."""
        offset = self.N * (self.N - 1) // 2
        return (self.energies - offset) // 2

    def merit_factors(self) -> np.ndarray:
        return self.N * self.N / (2.0 * self.energies)


def build_energy_table(N: int, parallel: bool = False, workers: int = 4) -> EnergyTable:
    """Compute all 2^N sidelobe energies.

    The numba path enumerates bitstrings in Gray-code order with O(N)
    incremental updates per step; the numpy fallback evaluates index chunks
    directly. ``parallel=True`` partitions the index space over threads with a
    deterministic merge (disjoint writes), so the table is identical for any
    worker count.
    """
    if N < 2:
        raise ValueError("N must be >= 2")
    need = 8 * (1 << N)
    budget = memory_budget_bytes()
    if need > budget:
        raise ResourceLimitError(
            f"energy table for N={N} needs {need / 2**30:.1f} GiB, over the "
            f"{budget / 2**30:.1f} GiB budget (set LABS_MEM_BUDGET_GB to raise it)"
        )
    size = 1 << N
    out = np.empty(size, dtype=np.int64)
    if parallel and workers > 1 and N >= 16:
        from concurrent.futures import ThreadPoolExecutor

        bounds = np.linspace(0, size, workers + 1, dtype=np.int64)
        with ThreadPoolExecutor(max_workers=workers) as ex:
            futs = [
                ex.submit(_kernels.energy_table_range, N, int(a), int(b), out)
                for a, b in zip(bounds[:-1], bounds[1:])
                if a < b
            ]
            for f in futs:
                f.result()
    else:
        _kernels.energy_table_range(N, 0, size, out)
    min_e = int(out.min())
    optimal = np.flatnonzero(out == min_e).astype(np.int64)
    return EnergyTable(N=N, energies=out, min_energy=min_e, optimal_indices=optimal)


_MAGIC = b"LABS"
_VERSION = 1


def save_energy_table(table: EnergyTable, path) -> None:
    """Binary export: magic 'LABS', version u16, N u16, 2^N little-endian i64."""
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<HH", _VERSION, table.N))
        fh.write(table.energies.astype("<i8").tobytes())


def load_energy_table(path) -> EnergyTable:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != _MAGIC:
            raise ValueError(f"bad magic {magic!r}, expected {_MAGIC!r}")
        version, N = struct.unpack("<HH", fh.read(4))
        if version != _VERSION:
            raise ValueError(f"unsupported table version {version}")
        energies = np.frombuffer(fh.read(8 * (1 << N)), dtype="<i8").astype(np.int64)
    min_e = int(energies.min())
    optimal = np.flatnonzero(energies == min_e).astype(np.int64)
    return EnergyTable(N=N, energies=energies, min_energy=min_e, optimal_indices=optimal)


def table_summary(table: EnergyTable) -> dict:
    hex_width = (table.N + 3) // 4
    return {
        "N": table.N,
        "min_energy": table.min_energy,
        "optimal_merit_factor": table.N * table.N / (2.0 * table.min_energy),
        "optimal_count": table.degeneracy,
        "optimal_bitstrings_hex": [f"{int(x):0{hex_width}x}" for x in table.optimal_indices],
        "p0": table.p0,
        "p0_single_orbit": 8 / float(2**table.N),
    }


def save_table_summary(table: EnergyTable, path) -> None:
    with open(path, "w") as fh:
        json.dump(table_summary(table), fh, indent=2)
        fh.write("\n")
