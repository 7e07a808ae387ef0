"""Hot numeric kernels with numba and pure-numpy twins.

Each public ``xxx`` dispatches to ``xxx_numba`` or ``xxx_numpy`` depending on
the backend selected in :mod:`labskit._backend`. The two paths are
semantically identical: integer kernels agree bitwise, floating-point kernels
agree to rounding (different summation order). Kernels are single-threaded so
results never depend on a thread count; callers parallelise across disjoint
slices or independent cells.

Gate arrays for the trajectory kernel use the integer codes in GATE_CNOT,
GATE_RZZ, GATE_RZ; Pauli injections use PAULI_X/Y/Z.
"""
from __future__ import annotations

import numpy as np

from ._backend import NUMBA_AVAILABLE, USE_NUMBA

GATE_CNOT = 0
GATE_RZZ = 1
GATE_RZ = 2

PAULI_X = 1
PAULI_Y = 2
PAULI_Z = 3

# ---------------------------------------------------------------------------
# Energy table over all bitstrings (Gray-code enumeration, incremental update)
# ---------------------------------------------------------------------------


def _energy_table_range_py(N, start, stop, out):
    # Fills out[g(n)] for n in [start, stop) where g(n) = n ^ (n >> 1).
    # Consecutive Gray codes differ in bit ctz(n); flipping one spin updates
    # each autocorrelation A_k in O(1), so the whole range costs O(N * len).
    spins = np.empty(N, np.int8)
    A = np.zeros(N, np.int64)
    g0 = start ^ (start >> 1)
    for j in range(N):
        spins[j] = 1 - 2 * ((g0 >> j) & 1)
    E = 0
    for k in range(1, N):
        a = 0
        for i in range(N - k):
            a += spins[i] * spins[i + k]
        A[k] = a
        E += a * a
    out[g0] = E
    for n in range(start + 1, stop):
        j = 0
        nn = n
        while nn & 1 == 0:
            nn >>= 1
            j += 1
        sj = spins[j]
        for k in range(1, N):
            d = 0
            if j + k < N:
                d += spins[j + k]
            if j - k >= 0:
                d += spins[j - k]
            if d != 0:
                a_old = A[k]
                a_new = a_old - 2 * sj * d
                A[k] = a_new
                E += a_new * a_new - a_old * a_old
        spins[j] = -sj
        out[n ^ (n >> 1)] = E
    return out


def _min_scan_py(N, shift):
    # Gray-code scan of 2**(N - shift) indices with the lowest `shift` bits
    # pinned to zero. Returns (min_energy, argmin_index, steps_to_best, steps).
    M = N - shift
    spins = np.ones(N, np.int8)
    A = np.zeros(N, np.int64)
    E = 0
    for k in range(1, N):
        A[k] = N - k
        E += A[k] * A[k]
    best_e = E
    best_x = 0
    steps = 1
    steps_to_best = 1
    for n in range(1, 1 << M):
        j = 0
        nn = n
        while nn & 1 == 0:
            nn >>= 1
            j += 1
        j += shift
        sj = spins[j]
        for k in range(1, N):
            d = 0
            if j + k < N:
                d += spins[j + k]
            if j - k >= 0:
                d += spins[j - k]
            if d != 0:
                a_old = A[k]
                a_new = a_old - 2 * sj * d
                A[k] = a_new
                E += a_new * a_new - a_old * a_old
        spins[j] = -sj
        steps += 1
        if E < best_e:
            best_e = E
            best_x = (n ^ (n >> 1)) << shift
            steps_to_best = steps
    return best_e, best_x, steps_to_best, steps


def energy_table_range_numpy(N, start, stop, out, chunk=1 << 16):
    # Vectorised over index chunks: O(N^2) per index instead of O(N), but all
    # work happens in numpy. Fills out[x] = E(x) directly for x in [start, stop)
    # of *natural* order; combined with a full range this equals the Gray fill.
    bits = np.arange(N, dtype=np.uint64)
    for lo in range(start, stop, chunk):
        hi = min(lo + chunk, stop)
        idx = np.arange(lo, hi, dtype=np.uint64)
        s = 1 - 2 * ((idx[:, None] >> bits[None, :]) & 1).astype(np.int64)
        e = np.zeros(idx.shape[0], dtype=np.int64)
        for k in range(1, N):
            a = np.einsum("ij,ij->i", s[:, : N - k], s[:, k:])
            e += a * a
        out[lo:hi] = e
    return out


def min_scan_numpy(N, shift, chunk=1 << 16):
    size = 1 << (N - shift)
    bits = np.arange(N, dtype=np.uint64)
    best_e = np.iinfo(np.int64).max
    best_x = 0
    steps_to_best = 0
    for lo in range(0, size, chunk):
        hi = min(lo + chunk, size)
        idx = np.arange(lo, hi, dtype=np.uint64) << np.uint64(shift)
        s = 1 - 2 * ((idx[:, None] >> bits[None, :]) & 1).astype(np.int64)
        e = np.zeros(idx.shape[0], dtype=np.int64)
        for k in range(1, N):
            a = np.einsum("ij,ij->i", s[:, : N - k], s[:, k:])
            e += a * a
        j = int(np.argmin(e))
        if e[j] < best_e:
            best_e = int(e[j])
            best_x = int(idx[j])
            steps_to_best = lo + j + 1
    return best_e, best_x, steps_to_best, size


# ---------------------------------------------------------------------------
# Statevector kernels
# ---------------------------------------------------------------------------


def _apply_phase_py(psi, hc, gamma):
    for x in range(psi.shape[0]):
        ang = -gamma * hc[x]
        psi[x] = psi[x] * complex(np.cos(ang), np.sin(ang))
    return psi


def _apply_mixer_py(psi, N, beta):
    c = np.cos(beta)
    ms = -1j * np.sin(beta)
    n = psi.shape[0]
    for j in range(N):
        stride = 1 << j
        step = stride << 1
        for base in range(0, n, step):
            for off in range(base, base + stride):
                i1 = off + stride
                a0 = psi[off]
                a1 = psi[i1]
                psi[off] = c * a0 + ms * a1
                psi[i1] = ms * a0 + c * a1
    return psi


def apply_phase_numpy(psi, hc, gamma):
    psi *= np.exp((-1j * gamma) * hc)
    return psi


def apply_mixer_numpy(psi, N, beta):
    c = np.cos(beta)
    ms = -1j * np.sin(beta)
    for j in range(N):
        v = psi.reshape(-1, 2, 1 << j)
        a0 = v[:, 0, :].copy()
        a1 = v[:, 1, :]
        v[:, 0, :] = c * a0 + ms * a1
        v[:, 1, :] = ms * a0 + c * a1
    return psi


# ---------------------------------------------------------------------------
# Tabu search (integer arithmetic throughout, deterministic tie-breaks)
# ---------------------------------------------------------------------------


def _tabu_run_py(spins, A, E, best_spins, tenure, max_iters, target, budget,
                 stall_limit):
    # Single tabu run. spins/A hold the walker state and are left at the final
    # position; best_spins receives the best configuration seen. Each neighbour
    # delta costs one evaluation; the scan stops mid-iteration if the budget
    # runs out, and the run ends early after stall_limit iterations without a
    # best improvement (0 disables). Returns (best_E, evals, evals_to_best,
    # hit, iters).
    N = spins.shape[0]
    tabu_until = np.zeros(N, np.int64)
    best_E = E
    for j in range(N):
        best_spins[j] = spins[j]
    evals = 0
    evals_to_best = 0
    if best_E <= target:
        return best_E, 0, 0, True, 0
    hit = False
    iters = 0
    stall = 0
    for it in range(1, max_iters + 1):
        move = -1
        move_E = np.int64(2) ** 62
        exhausted = False
        for i in range(N):
            if evals >= budget:
                exhausted = True
                break
            si = spins[i]
            dE = 0
            for k in range(1, N):
                d = 0
                if i + k < N:
                    d += spins[i + k]
                if i - k >= 0:
                    d += spins[i - k]
                if d != 0:
                    a = A[k]
                    an = a - 2 * si * d
                    dE += an * an - a * a
            evals += 1
            cand = E + dE
            if (tabu_until[i] < it or cand < best_E) and cand < move_E:
                move_E = cand
                move = i
        if move < 0:
            break
        iters = it
        si = spins[move]
        for k in range(1, N):
            d = 0
            if move + k < N:
                d += spins[move + k]
            if move - k >= 0:
                d += spins[move - k]
            if d != 0:
                A[k] = A[k] - 2 * si * d
        spins[move] = -si
        E = move_E
        tabu_until[move] = it + tenure
        if E < best_E:
            best_E = E
            for j in range(N):
                best_spins[j] = spins[j]
            evals_to_best = evals
            stall = 0
            if best_E <= target:
                hit = True
                break
        else:
            stall += 1
            if stall_limit > 0 and stall >= stall_limit:
                break
        if exhausted:
            break
    return best_E, evals, evals_to_best, hit, iters


def tabu_run_numpy(spins, A, E, best_spins, tenure, max_iters, target, budget,
                   stall_limit):
    # Vectorised twin of _tabu_run_py; replicates move selection exactly
    # (integer energies, first-minimum tie-break, mid-scan budget cut).
    N = spins.shape[0]
    tabu_until = np.zeros(N, np.int64)
    best_E = int(E)
    best_spins[:] = spins
    evals = 0
    evals_to_best = 0
    if best_E <= target:
        return best_E, 0, 0, True, 0
    hit = False
    iters = 0
    stall = 0
    E = int(E)
    for it in range(1, max_iters + 1):
        n_eval = min(N, budget - evals)
        if n_eval <= 0:
            break
        s64 = spins.astype(np.int64)
        D = np.zeros((N, N), np.int64)
        for k in range(1, N):
            D[: N - k, k] += s64[k:]
            D[k:, k] += s64[:-k]
        dA = -2 * s64[:, None] * D
        dE = (dA * dA + 2 * A[None, :] * dA).sum(axis=1)
        evals += n_eval
        cand = E + dE[:n_eval]
        allowed = (tabu_until[:n_eval] < it) | (cand < best_E)
        if not allowed.any():
            break
        masked = np.where(allowed, cand, np.int64(2) ** 62)
        move = int(np.argmin(masked))
        move_E = int(masked[move])
        if move_E >= np.int64(2) ** 62:
            break
        iters = it
        A += dA[move]
        spins[move] = -spins[move]
        E = move_E
        tabu_until[move] = it + tenure
        if E < best_E:
            best_E = E
            best_spins[:] = spins
            evals_to_best = evals
            stall = 0
            if best_E <= target:
                hit = True
                break
        else:
            stall += 1
            if stall_limit > 0 and stall >= stall_limit:
                break
        if n_eval < N:
            break
    return best_E, evals, evals_to_best, hit, iters


# ---------------------------------------------------------------------------
# Permutation/phase evolution for CNOT+RZZ+RZ circuits with Pauli injections
# ---------------------------------------------------------------------------


def _perm_phase_py(kinds, qa, qb, angles, err_after, err_pauli, err_qubit, N):
    # Basis-state tracking: every gate in the compiled phase circuit maps
    # computational basis states to basis states with a phase, as do injected
    # Paulis. y[x] is the image of x, phi[x] the accumulated phase angle.
    size = 1 << N
    y = np.arange(size, dtype=np.int64)
    phi = np.zeros(size, np.float64)
    n_err = err_after.shape[0]
    e = 0
    pi = np.pi
    for g in range(kinds.shape[0]):
        kind = kinds[g]
        if kind == GATE_CNOT:
            c = qa[g]
            t = qb[g]
            for x in range(size):
                y[x] ^= ((y[x] >> c) & 1) << t
        elif kind == GATE_RZZ:
            q1 = qa[g]
            q2 = qb[g]
            half = 0.5 * angles[g]
            for x in range(size):
                b = ((y[x] >> q1) ^ (y[x] >> q2)) & 1
                phi[x] -= half * (1 - 2 * b)
        else:  # GATE_RZ
            q1 = qa[g]
            half = 0.5 * angles[g]
            for x in range(size):
                b = (y[x] >> q1) & 1
                phi[x] -= half * (1 - 2 * b)
        while e < n_err and err_after[e] == g:
            p = err_pauli[e]
            q = err_qubit[e]
            mask = 1 << q
            if p == PAULI_X:
                for x in range(size):
                    y[x] ^= mask
            elif p == PAULI_Z:
                for x in range(size):
                    phi[x] += pi * ((y[x] >> q) & 1)
            else:  # PAULI_Y
                for x in range(size):
                    phi[x] += 0.5 * pi + pi * ((y[x] >> q) & 1)
                    y[x] ^= mask
            e += 1
    return y, phi


def perm_phase_numpy(kinds, qa, qb, angles, err_after, err_pauli, err_qubit, N):
    size = 1 << N
    y = np.arange(size, dtype=np.int64)
    phi = np.zeros(size, np.float64)
    n_err = err_after.shape[0]
    e = 0
    for g in range(kinds.shape[0]):
        kind = kinds[g]
        if kind == GATE_CNOT:
            y ^= ((y >> qa[g]) & 1) << qb[g]
        elif kind == GATE_RZZ:
            b = ((y >> qa[g]) ^ (y >> qb[g])) & 1
            phi -= (0.5 * angles[g]) * (1 - 2 * b)
        else:
            b = (y >> qa[g]) & 1
            phi -= (0.5 * angles[g]) * (1 - 2 * b)
        while e < n_err and err_after[e] == g:
            p = err_pauli[e]
            mask = np.int64(1) << np.int64(err_qubit[e])
            if p == PAULI_X:
                y ^= mask
            elif p == PAULI_Z:
                phi += np.pi * ((y >> err_qubit[e]) & 1)
            else:
                phi += 0.5 * np.pi + np.pi * ((y >> err_qubit[e]) & 1)
                y ^= mask
            e += 1
    return y, phi


# ---------------------------------------------------------------------------
# numba compilation and dispatch
# ---------------------------------------------------------------------------

if NUMBA_AVAILABLE:
    from numba import njit

    _jit = njit(cache=True, nogil=True)
    energy_table_range_numba = _jit(_energy_table_range_py)
    min_scan_numba = _jit(_min_scan_py)
    apply_phase_numba = _jit(_apply_phase_py)
    apply_mixer_numba = _jit(_apply_mixer_py)
    tabu_run_numba = _jit(_tabu_run_py)
    perm_phase_numba = _jit(_perm_phase_py)

if USE_NUMBA:
    energy_table_range = energy_table_range_numba
    min_scan = min_scan_numba
    apply_phase_inplace = apply_phase_numba
    apply_mixer_inplace = apply_mixer_numba
    tabu_run = tabu_run_numba
    perm_phase = perm_phase_numba
else:
    energy_table_range = energy_table_range_numpy
    min_scan = min_scan_numpy
    apply_phase_inplace = apply_phase_numpy
    apply_mixer_inplace = apply_mixer_numpy
    tabu_run = tabu_run_numpy
    perm_phase = perm_phase_numpy
