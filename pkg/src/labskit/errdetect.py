"""Parity-check error detection for compiled phase circuits.

A checked circuit sandwiches each of m segments of the phase operator between
a Z-parity and an X-parity check (ancilla-mapped controlled parities: CZ
chains for the Z parity, CNOT chains for the X parity, Hadamards around each
ancilla; Z check outermost). Segment boundaries sit only where the running
prefix of the gate list is a product of complete diagonal terms (empty
open-CNOT set), so each segment commutes with both parity operators and
noiseless syndromes are identically zero.

Simulation model: a faulty segment (CNOT/RZZ/RZ gates plus definite injected
Paulis) maps computational basis states to basis states with phases, so it is
represented exactly by a permutation array y and phase array phi. The nested
pair of parity checks then acts as a four-outcome projective measurement with
branch operators (Z^N)^a (X^N)^b V (X^N)^b (Z^N)^a, all four of which are
cheap array transformations of (y, phi). This is exact: mid-gadget errors,
whose syndromes are genuinely probabilistic, collapse the data register
accordingly.

Noise model: after each two-qubit gate of the base circuit, with probability
p2 a uniformly chosen Pauli hits a uniformly chosen qubit of that gate. Check
sub-circuits are noiseless by default; noisy_checks=True simulates the
expanded circuit gate by gate, ancillas included.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .compiler import Circuit, Gate, TWO_QUBIT_KINDS
from .core import EnergyTable, ProblemInstance
from .gatesim import plus_state, simulate_gates


@dataclass
class NoiseModel:
    p2: float = 2e-3
    pauli_weights: tuple = (1 / 3, 1 / 3, 1 / 3)  # X, Y, Z
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.p2 <= 1.0:
            raise ValueError("p2 must be in [0, 1]")
        if abs(sum(self.pauli_weights) - 1.0) > 1e-12 or min(self.pauli_weights) < 0:
            raise ValueError("pauli_weights must be a distribution over X, Y, Z")


@dataclass
class CheckedCircuit:
    base: Circuit
    m: int
    # split_points[i] is the gate index where segment i ends (exclusive);
    # split_points[m-1] == len(base.gates)
    split_points: list
    split_two_qubit_counts: list
    n_ancilla: int = 2  # one Z ancilla + one X ancilla, reset and reused

    @property
    def n_data(self) -> int:
        return self.base.n_data

    def segments(self) -> list:
        out = []
        start = 0
        for end in self.split_points:
            out.append(self.base.gates[start:end])
            start = end
        return out

    def segment_of(self, gate_index: int) -> int:
        for i, end in enumerate(self.split_points):
            if gate_index < end:
                return i
        raise IndexError(gate_index)

    def to_json_dict(self) -> dict:
        return {
            "base": self.base.to_json_dict(),
            "m": self.m,
            "split_points": list(self.split_points),
            "split_two_qubit_counts": list(self.split_two_qubit_counts),
            "n_ancilla": self.n_ancilla,
        }

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json_dict(), fh, indent=2)
            fh.write("\n")


def valid_cut_points(gates) -> list:
    """Gate indices at which the prefix is a product of whole diagonal terms.

    Tracks the multiset of open CNOT conjugations; a cut before gate i is
    valid when it is empty."""
    open_set: set = set()
    valid = [0]
    for i, g in enumerate(gates):
        if g.kind == "CNOT":
            if g.qubits in open_set:
                open_set.remove(g.qubits)
            else:
                open_set.add(g.qubits)
        if not open_set:
            valid.append(i + 1)
    return sorted(set(valid))


def insert_checks(circuit: Circuit, m: int) -> CheckedCircuit:
    """Partition the phase circuit into m parity-checked segments.

    Split points are chosen among valid cut positions to balance per-segment
    two-qubit gate counts (within one gate whenever the valid positions allow
    it; the achieved counts are recorded on the result).
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    gates = circuit.gates
    total_2q = circuit.two_qubit_count()
    if m > total_2q:
        raise ValueError(f"m={m} exceeds the two-qubit gate count {total_2q}")
    is2q = np.array([1 if g.kind in TWO_QUBIT_KINDS else 0 for g in gates], dtype=np.int64)
    prefix = np.concatenate([[0], np.cumsum(is2q)])
    valid = [c for c in valid_cut_points(gates) if 0 < c < len(gates)]
    # Cuts must sit where the prefix commutes with both parities, so exact
    # balance is not generally reachable; minimize the largest segment count
    # over the valid positions by dynamic programming.
    positions = [0] + valid + [len(gates)]
    counts_at = [int(prefix[c]) for c in positions]
    n_pos = len(positions)
    INF = float("inf")
    memo: dict = {}

    def best_cut(idx: int, k: int):
        # minimal max-part splitting positions[idx:] into k parts
        if (idx, k) in memo:
            return memo[(idx, k)]
        if k == 1:
            res = (counts_at[-1] - counts_at[idx], [])
        else:
            res = (INF, [])
            for nxt in range(idx + 1, n_pos - 1):
                part = counts_at[nxt] - counts_at[idx]
                if part >= res[0]:
                    break  # parts only grow with nxt
                sub_max, sub_cuts = best_cut(nxt, k - 1)
                cand = max(part, sub_max)
                if cand < res[0]:
                    res = (cand, [positions[nxt]] + sub_cuts)
        memo[(idx, k)] = res
        return res

    _, cuts = best_cut(0, m)
    split_points = cuts + [len(gates)]
    counts = []
    start = 0
    for end in split_points:
        counts.append(int(prefix[end] - prefix[start]))
        start = end
    return CheckedCircuit(
        base=circuit,
        m=len(split_points),
        split_points=split_points,
        split_two_qubit_counts=counts,
    )


def expand_checks(checked: CheckedCircuit, reuse_ancillas: bool = True) -> list:
    """Explicit gate list with ancillas appended after the data register.

    With reuse_ancillas=True two ancillas (Z at index N, X at N+1) are
    measured and reset after each segment; with False each segment gets a
    fresh pair and measurements are deferred (no MEASURE gates emitted), which
    keeps the list unitary for validation.
    """
    N = checked.n_data
    gates: list = []
    for s, segment in enumerate(checked.segments()):
        az, ax = (N, N + 1) if reuse_ancillas else (N + 2 * s, N + 2 * s + 1)
        gates.append(Gate("H", (az,)))
        for d in range(N):
            gates.append(Gate("CZ", (az, d)))
        gates.append(Gate("H", (ax,)))
        for d in range(N):
            gates.append(Gate("CNOT", (ax, d)))
        gates.extend(segment)
        for d in range(N):
            gates.append(Gate("CNOT", (ax, d)))
        gates.append(Gate("H", (ax,)))
        for d in range(N):
            gates.append(Gate("CZ", (az, d)))
        gates.append(Gate("H", (az,)))
        if reuse_ancillas:
            gates.append(Gate("MEASURE", (az,)))
            gates.append(Gate("MEASURE", (ax,)))
            gates.append(Gate("RESET", (az,)))
            gates.append(Gate("RESET", (ax,)))
    return gates


# ---------------------------------------------------------------------------
# Exact trajectory simulation on the data register
# ---------------------------------------------------------------------------

_KIND_CODE = {"CNOT": _kernels.GATE_CNOT, "RZZ": _kernels.GATE_RZZ, "RZ": _kernels.GATE_RZ}
_PAULI_CODE = {"X": _kernels.PAULI_X, "Y": _kernels.PAULI_Y, "Z": _kernels.PAULI_Z}


def _encode_gates(gates) -> tuple:
    kinds = np.empty(len(gates), np.int64)
    qa = np.empty(len(gates), np.int64)
    qb = np.empty(len(gates), np.int64)
    ang = np.zeros(len(gates), np.float64)
    for i, g in enumerate(gates):
        if g.kind not in _KIND_CODE:
            raise ValueError(f"phase circuit may only contain CNOT/RZZ/RZ, got {g.kind}")
        kinds[i] = _KIND_CODE[g.kind]
        qa[i] = g.qubits[0]
        qb[i] = g.qubits[1] if len(g.qubits) > 1 else g.qubits[0]
        ang[i] = g.angle if g.angle is not None else 0.0
    return kinds, qa, qb, ang


def _segment_perm_phase(encoded, N: int, injections):
    """(y, phi) of one segment with injections [(rel_gate_idx, pauli, qubit)];
    rel index -1 means before the first gate."""
    kinds, qa, qb, ang = encoded
    pre = [e for e in injections if e[0] < 0]
    rest = sorted([e for e in injections if e[0] >= 0], key=lambda e: e[0])
    err_after = np.array([e[0] for e in rest], dtype=np.int64)
    err_pauli = np.array([_PAULI_CODE[e[1]] for e in rest], dtype=np.int64)
    err_qubit = np.array([e[2] for e in rest], dtype=np.int64)
    y, phi = _kernels.perm_phase(kinds, qa, qb, ang, err_after, err_pauli, err_qubit, N)
    for _, pauli, q in pre:
        y0, phi0 = _pauli_perm_phase(pauli, q, N)
        # apply the Pauli first, then the segment map
        phi = phi0 + phi[y0]
        y = y[y0]
    return y, phi


def _pauli_perm_phase(pauli: str, q: int, N: int):
    size = 1 << N
    x = np.arange(size, dtype=np.int64)
    if pauli == "X":
        return x ^ (1 << q), np.zeros(size)
    if pauli == "Z":
        return x.copy(), np.pi * ((x >> q) & 1).astype(np.float64)
    if pauli == "Y":
        return x ^ (1 << q), 0.5 * np.pi + np.pi * ((x >> q) & 1).astype(np.float64)
    raise ValueError(pauli)


def _check_branches(psi: np.ndarray, y: np.ndarray, phi: np.ndarray):
    """Four unnormalized post-measurement branches (bz, bx) of the nested
    Z/X parity checks around a segment with perm-phase map (y, phi)."""
    size = psi.shape[0]
    full = size - 1
    x = np.arange(size, dtype=np.int64)
    w_src = np.bitwise_count(x.astype(np.uint64)).astype(np.int64) & 1
    w_dst = np.bitwise_count(y.astype(np.uint64)).astype(np.int64) & 1
    sz = (1.0 - 2.0 * ((w_src ^ w_dst).astype(np.float64)))
    amp = np.exp(1j * phi)
    v = np.zeros_like(psi)
    v[y] = amp * psi
    vz = np.zeros_like(psi)
    vz[y] = (sz * amp) * psi
    psi_comp = psi[::-1]  # psi[full ^ u] for ascending u
    vx = np.zeros_like(psi)
    vx[full - y] = amp * psi_comp
    vzx = np.zeros_like(psi)
    vzx[full - y] = (sz * amp) * psi_comp
    branches = {}
    for bz in (0, 1):
        for bx in (0, 1):
            branches[(bz, bx)] = (
                v + ((-1) ** bx) * vx + ((-1) ** bz) * vz + ((-1) ** (bz + bx)) * vzx
            ) / 4.0
    return branches


def _measure_segment(psi: np.ndarray, y: np.ndarray, phi: np.ndarray, rng):
    """Sample (bz, bx) for one checked segment and collapse psi in place."""
    branches = _check_branches(psi, y, phi)
    norms = {k: float(np.real(np.vdot(b, b))) for k, b in branches.items()}
    total = sum(norms.values())
    r = rng.random() * total
    acc = 0.0
    for k in ((0, 0), (0, 1), (1, 0), (1, 1)):
        acc += norms[k]
        if r < acc or k == (1, 1):
            if norms[k] <= 0:
                continue
            out = branches[k] / math.sqrt(norms[k])
            return k, out
    raise AssertionError("unreachable")


@dataclass
class PostSelectionStats:
    N: int
    m: int
    p2: float
    shots_total: int
    shots_kept: int
    ratio: float
    mf_all: float
    mf_kept: float
    detections_per_check: list  # [z1, x1, z2, x2, ...] detection counts
    beta: float | None = None
    gamma: float | None = None

    def to_json_dict(self, p: int = 1) -> dict:
        return {
            "N": self.N,
            "p": p,
            "m": self.m,
            "p2": self.p2,
            "shots": self.shots_total,
            "kept": self.shots_kept,
            "ratio": self.ratio,
            "mf_all": self.mf_all,
            "mf_kept": self.mf_kept,
            "detections_per_check": self.detections_per_check,
        }

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json_dict(), fh, indent=2)
            fh.write("\n")


class _CheckedSimulator:
    """Shared machinery for trajectory runs over one checked circuit."""

    def __init__(self, checked: CheckedCircuit, beta: float | None):
        self.checked = checked
        self.N = checked.n_data
        self.beta = beta
        self.segments = checked.segments()
        self.encoded = [_encode_gates(seg) for seg in self.segments]
        self.two_q_global = [
            i for i, g in enumerate(checked.base.gates) if g.kind in TWO_QUBIT_KINDS
        ]
        size = 1 << self.N
        self.ideal_phi = []
        x = np.arange(size, dtype=np.int64)
        for enc in self.encoded:
            y, phi = _segment_perm_phase(enc, self.N, [])
            if not np.array_equal(y, x):
                raise AssertionError("fault-free segment is not diagonal")
            self.ideal_phi.append(phi)

    def rel_injections(self, injections):
        """Group absolute (gate_idx, pauli, qubit) by segment, gate index
        relative to the segment start."""
        by_seg: dict = {}
        bounds = self.checked.split_points
        start = 0
        for s, end in enumerate(bounds):
            for g_idx, pauli, q in injections:
                if start <= g_idx < end:
                    by_seg.setdefault(s, []).append((g_idx - start, pauli, q))
            start = end
        return by_seg

    def run_shot(self, injections, rng, by_seg=None):
        """Evolve one trajectory; returns (final probabilities, z list, x list).

        `injections` hold absolute (gate_idx, pauli, qubit) triples; segment-
        relative placements (rel index -1 = before the segment's first gate)
        may be passed directly via `by_seg`."""
        if by_seg is None:
            by_seg = self.rel_injections(injections)
        psi = plus_state(self.N)
        z_out, x_out = [], []
        for s in range(self.checked.m):
            if s not in by_seg:
                psi = psi * np.exp(1j * self.ideal_phi[s])
                z_out.append(0)
                x_out.append(0)
                continue
            y, phi = _segment_perm_phase(self.encoded[s], self.N, by_seg[s])
            (bz, bx), psi = _measure_segment(psi, y, phi, rng)
            z_out.append(bz)
            x_out.append(bx)
        if self.beta is not None:
            psi = psi.copy()
            _kernels.apply_mixer_inplace(psi, self.N, float(self.beta))
        return np.abs(psi) ** 2, z_out, x_out

    def joint_distribution(self, injections):
        """Exact joint distribution over syndrome patterns: list of
        ((z tuple, x tuple), probability, data distribution)."""
        by_seg = self.rel_injections(injections)
        leaves = [((), (), 1.0, plus_state(self.N))]
        for s in range(self.checked.m):
            new = []
            if s not in by_seg:
                for z, x, w, psi in leaves:
                    new.append((z + (0,), x + (0,), w, psi * np.exp(1j * self.ideal_phi[s])))
            else:
                y, phi = _segment_perm_phase(self.encoded[s], self.N, by_seg[s])
                for z, x, w, psi in leaves:
                    for (bz, bx), branch in _check_branches(psi, y, phi).items():
                        nrm = float(np.real(np.vdot(branch, branch)))
                        if nrm < 1e-14:
                            continue
                        new.append(
                            (z + (bz,), x + (bx,), w * nrm, branch / math.sqrt(nrm))
                        )
            leaves = new
        out = []
        for z, x, w, psi in leaves:
            if self.beta is not None:
                psi = psi.copy()
                _kernels.apply_mixer_inplace(psi, self.N, float(self.beta))
            out.append(((z, x), w, np.abs(psi) ** 2))
        return out


def simulate_noisy(checked: CheckedCircuit, noise: NoiseModel, shots: int,
                   table: EnergyTable, beta: float | None = None,
                   noisy_checks: bool = False,
                   shot_log: list | None = None) -> PostSelectionStats:
    """Sample trajectories of the checked circuit under the noise model.

    Each shot draws Pauli injections after the base circuit's two-qubit
    gates, evolves the data register through the checked segments (sampling
    and collapsing each parity-check outcome), applies the mixer when beta is
    given, and samples one final measurement. Kept shots have all-zero
    syndromes. When shot_log is a list, one (bitstring_hex, kept, syndrome
    bits) record per shot is appended.
    """
    if table.N != checked.n_data:
        raise ValueError("table size mismatch")
    if noisy_checks:
        return _simulate_noisy_explicit(checked, noise, shots, table, beta)
    rng = np.random.default_rng(noise.seed)
    sim = _CheckedSimulator(checked, beta)
    gates = checked.base.gates
    two_q = np.array(sim.two_q_global, dtype=np.int64)
    mf = table.merit_factors()
    ideal_probs, _, _ = sim.run_shot([], rng)
    ideal_cdf = np.cumsum(ideal_probs)
    pauli_names = ("X", "Y", "Z")
    pw = np.cumsum(noise.pauli_weights)
    hex_width = (checked.n_data + 3) // 4
    kept = 0
    mf_sum_all = 0.0
    mf_sum_kept = 0.0
    det = np.zeros((checked.m, 2), dtype=np.int64)
    for _ in range(shots):
        hits = two_q[rng.random(two_q.shape[0]) < noise.p2]
        if hits.shape[0] == 0:
            x = int(np.searchsorted(ideal_cdf, rng.random(), side="right"))
            mf_sum_all += mf[x]
            kept += 1
            mf_sum_kept += mf[x]
            if shot_log is not None:
                shot_log.append((f"{x:0{hex_width}x}", 1, "0" * (2 * checked.m)))
            continue
        injections = []
        for g_idx in hits:
            pauli = pauli_names[int(np.searchsorted(pw, rng.random(), side="right"))]
            qubits = gates[g_idx].qubits
            q = int(qubits[int(rng.integers(0, len(qubits)))])
            injections.append((int(g_idx), pauli, q))
        probs, z_list, x_list = sim.run_shot(injections, rng)
        x = int(np.searchsorted(np.cumsum(probs), rng.random(), side="right"))
        mf_sum_all += mf[x]
        det[:, 0] += z_list
        det[:, 1] += x_list
        is_kept = not any(z_list) and not any(x_list)
        if is_kept:
            kept += 1
            mf_sum_kept += mf[x]
        if shot_log is not None:
            bits = "".join(str(b) for pair in zip(z_list, x_list) for b in pair)
            shot_log.append((f"{x:0{hex_width}x}", int(is_kept), bits))
    return PostSelectionStats(
        N=checked.n_data,
        m=checked.m,
        p2=noise.p2,
        shots_total=shots,
        shots_kept=kept,
        ratio=kept / shots,
        mf_all=mf_sum_all / shots,
        mf_kept=(mf_sum_kept / kept) if kept else float("nan"),
        detections_per_check=det.flatten().tolist(),
        beta=beta,
        gamma=checked.base.metadata.get("gamma"),
    )


def _simulate_noisy_explicit(checked: CheckedCircuit, noise: NoiseModel, shots: int,
                             table: EnergyTable, beta: float | None) -> PostSelectionStats:
    """Gate-level trajectory simulation with ancillas; noise hits every
    two-qubit gate including the check chains. Slow; intended for small N."""
    from .gatesim import apply_gate

    rng = np.random.default_rng(noise.seed)
    N = checked.n_data
    n = N + 2
    expanded = expand_checks(checked)
    if beta is not None:
        expanded = expanded + [Gate("RX", (q,), 2.0 * beta) for q in range(N)]
    mf = table.merit_factors()
    pauli_names = ("X", "Y", "Z")
    pw = np.cumsum(noise.pauli_weights)
    kept = 0
    mf_sum_all = 0.0
    mf_sum_kept = 0.0
    det = np.zeros(2 * checked.m, dtype=np.int64)
    anc0 = np.zeros(4, dtype=np.complex128)
    anc0[0] = 1.0
    for _ in range(shots):
        psi = np.kron(anc0, plus_state(N))
        outcomes = []
        for g in expanded:
            psi, out = apply_gate(psi, n, g, rng)
            if out is not None:
                outcomes.append(out)
            if g.kind in TWO_QUBIT_KINDS and rng.random() < noise.p2:
                pauli = pauli_names[int(np.searchsorted(pw, rng.random(), side="right"))]
                q = int(g.qubits[int(rng.integers(0, len(g.qubits)))])
                apply_gate(psi, n, Gate(pauli, (q,)), rng)
        probs = np.abs(psi) ** 2
        full = int(np.searchsorted(np.cumsum(probs), rng.random(), side="right"))
        x = full & ((1 << N) - 1)
        mf_sum_all += mf[x]
        for i, s in enumerate(outcomes):
            det[i] += s
        if not any(outcomes):
            kept += 1
            mf_sum_kept += mf[x]
    return PostSelectionStats(
        N=N,
        m=checked.m,
        p2=noise.p2,
        shots_total=shots,
        shots_kept=kept,
        ratio=kept / shots,
        mf_all=mf_sum_all / shots,
        mf_kept=(mf_sum_kept / kept) if kept else float("nan"),
        detections_per_check=det.tolist(),
        beta=beta,
        gamma=checked.base.metadata.get("gamma"),
    )


def forced_injection_syndromes(checked: CheckedCircuit, segment: int, rel: int,
                               pauli: str, qubit: int, seed: int = 0) -> tuple:
    """Gate-level syndrome readout for one Pauli injected inside `segment`
    after its `rel`-th gate (-1 = right after the segment's opening checks).
    Independent of the fast path: simulates the expanded circuit with explicit
    ancillas, sampling any probabilistic outcomes with `seed`."""
    N = checked.n_data
    n = N + 2
    injected = Gate(pauli, (qubit,))
    gates = []
    for s, seg in enumerate(checked.segments()):
        az, ax = N, N + 1
        gates.append(Gate("H", (az,)))
        gates.extend(Gate("CZ", (az, d)) for d in range(N))
        gates.append(Gate("H", (ax,)))
        gates.extend(Gate("CNOT", (ax, d)) for d in range(N))
        if s == segment and rel == -1:
            gates.append(injected)
        for r, g in enumerate(seg):
            gates.append(g)
            if s == segment and r == rel:
                gates.append(injected)
        gates.extend(Gate("CNOT", (ax, d)) for d in range(N))
        gates.append(Gate("H", (ax,)))
        gates.extend(Gate("CZ", (az, d)) for d in range(N))
        gates.append(Gate("H", (az,)))
        gates.append(Gate("MEASURE", (az,)))
        gates.append(Gate("MEASURE", (ax,)))
        gates.append(Gate("RESET", (az,)))
        gates.append(Gate("RESET", (ax,)))
    anc0 = np.zeros(4, dtype=np.complex128)
    anc0[0] = 1.0
    psi0 = np.kron(anc0, plus_state(N))
    _, outcomes = simulate_gates(gates, n, psi0=psi0, rng=np.random.default_rng(seed))
    return outcomes[0::2], outcomes[1::2]


def clean_injection_sites(checked: CheckedCircuit) -> list:
    """Injection sites between whole diagonal terms, as (segment, rel) pairs.

    rel means 'after the segment's rel-th gate'; rel = -1 is the position
    right after the segment's opening checks. A single-qubit Pauli injected at
    one of these positions keeps weight one at the segment boundary, so the
    segment's check pair is guaranteed to flag it."""
    cuts = set(valid_cut_points(checked.base.gates))
    out = []
    start = 0
    for s, end in enumerate(checked.split_points):
        for c in sorted(cuts):
            if start <= c <= end:
                out.append((s, c - start - 1))
        start = end
    return out


def detection_theorem_check(checked: CheckedCircuit, trials: int | None = None,
                            seed: int = 0, gate_level: bool = False) -> float:
    """Detected fraction for single Paulis injected between whole terms.

    With trials=None every (site, qubit, Pauli) combination is enumerated;
    otherwise `trials` random injections are drawn. Checks are noiseless.
    gate_level=True uses the explicit ancilla simulation instead of the fast
    path (slower; used for cross-validation).
    """
    N = checked.n_data
    sites = clean_injection_sites(checked)
    combos = []
    if trials is None:
        for s, rel in sites:
            for q in range(N):
                for pauli in ("X", "Y", "Z"):
                    combos.append((s, rel, pauli, q))
    else:
        rng = np.random.default_rng(seed)
        for _ in range(trials):
            s, rel = sites[int(rng.integers(0, len(sites)))]
            combos.append(
                (s, rel, ("X", "Y", "Z")[int(rng.integers(0, 3))], int(rng.integers(0, N)))
            )
    sim = None if gate_level else _CheckedSimulator(checked, beta=None)
    rng = np.random.default_rng(seed + 1)
    detected = 0
    for s, rel, pauli, q in combos:
        if gate_level:
            z, x = forced_injection_syndromes(checked, s, rel, pauli, q)
        else:
            _, z, x = sim.run_shot([], rng, by_seg={s: [(rel, pauli, q)]})
        if any(z) or any(x):
            detected += 1
    return detected / len(combos)


# ---------------------------------------------------------------------------
# Average-time models and symmetry commutation
# ---------------------------------------------------------------------------


def avg_time_models(t0: float, p_list) -> tuple:
    """(t1_bar, t2_bar): repeat-until-clean time without and with mid-circuit
    early stopping. p_list holds the per-segment no-error probabilities
    p_1..p_m; p_0 = 1 by convention."""
    p = np.asarray(p_list, dtype=np.float64)
    if np.any(p < 0.0) or np.any(p > 1.0):
        raise ValueError("segment probabilities must lie in [0, 1]")
    if np.any(p == 0.0):
        return float("inf"), float("inf")
    m = p.shape[0]
    t1 = t0 / float(np.prod(p))
    if m == 1:
        return t1, t1
    # early-stop factor: sum_{i=1}^{m-1} (prod_{j=0}^{i-1} p_j)(1-p_i)(i/m)
    #                    + prod_{k=1}^{m-1} p_k
    acc = 0.0
    for i in range(1, m):
        prefix = 1.0
        for j in range(1, i):  # j = 0 contributes p_0 = 1
            prefix *= p[j - 1]
        acc += prefix * (1.0 - p[i - 1]) * (i / m)
    tail = float(np.prod(p[: m - 1]))
    t2 = t1 * (acc + tail)
    return t1, t2


def hc_from_terms(terms, coeffs, N: int) -> np.ndarray:
    """Diagonal of a Z-product Hamiltonian over all 2^N basis states.

    The spin product over a term equals (-1)^popcount(x & mask)."""
    size = 1 << N
    out = np.zeros(size, dtype=np.int64)
    idx = np.arange(size, dtype=np.uint64)
    for term, c in zip(terms, coeffs):
        mask = np.uint64(0)
        for q in term:
            mask |= np.uint64(1) << np.uint64(q - 1)
        parity = (np.bitwise_count(idx & mask) & 1).astype(np.int64)
        out += c * (1 - 2 * parity)
    return out


def symmetry_commutation_check(instance: ProblemInstance, extra_terms=None,
                               extra_coeffs=None) -> bool:
    """True iff the instance's diagonal is invariant under global bit
    complement (X-parity commutation); Z-parity commutation is trivial for a
    diagonal operator. Extra terms allow corrupted-instance negative controls."""
    N = instance.N
    terms = list(instance.two_body_terms) + list(instance.four_body_terms)
    coeffs = [1] * len(instance.two_body_terms) + [2] * len(instance.four_body_terms)
    if extra_terms:
        terms += list(extra_terms)
        coeffs += list(extra_coeffs or [1] * len(extra_terms))
    hc = hc_from_terms(terms, coeffs, N)
    return bool(np.array_equal(hc, hc[::-1]))  # complement(x) = (2^N-1) - x
