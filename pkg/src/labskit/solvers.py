"""Classical LABS baselines with evaluation-count accounting.

All solvers charge exactly one evaluation per energy computed or
incrementally updated; counts, not wall time, are the time-to-solution proxy.
Runs are single-threaded and fully reproducible from (config, seed).
"""
from __future__ import annotations

import csv
import json
import time
from dataclasses import dataclass, field, asdict
from typing import Iterable, Sequence

import numpy as np

from . import _kernels
from .core import (
    SpinSequence,
    as_spins,
    autocorrelations,
    index_from_spins,
    is_skew_symmetric,
    sidelobe_energy,
    spins_from_index,
    symmetry_orbit,
)
from .errors import ResourceLimitError

EXHAUSTIVE_N_ADVISORY = 28


@dataclass
class SolverConfig:
    kind: str = "tabu"  # exhaustive | tabu | memetic_tabu
    seed: int = 0
    target_energy: int | None = None
    budget: int = 10**9
    tenure_range: tuple | None = None  # default [N//10+1, N//2+1]
    tabu_iters: int | None = None  # default 10*N per run
    tabu_stall: int | None = None  # end a run after this many non-improving
                                   # iterations; default 2*N, 0 disables
    population: int = 20
    tournament: int = 2
    crossover_rate: float = 0.9
    mutation_rate: float | None = None  # default 1/N per spin
    skew_symmetric_only: bool = False
    restrict_domain: bool = False  # exhaustive: fix first two spins

    def __post_init__(self):
        if self.budget <= 0:
            raise ValueError("budget must be positive")
        if self.kind == "memetic_tabu" and self.population < 2:
            raise ValueError("memetic population must be >= 2")


@dataclass
class SolveResult:
    best_sequence: SpinSequence
    best_energy: int
    evaluations_to_best: int
    evaluations_total: int
    wall_time: float
    hit_target: bool
    config: dict = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        return {
            "best_sequence": self.best_sequence.to_string(),
            "best_index": self.best_sequence.to_index(),
            "best_energy": self.best_energy,
            "merit_factor": self.best_sequence.n**2 / (2.0 * self.best_energy),
            "evaluations_to_best": self.evaluations_to_best,
            "evaluations_total": self.evaluations_total,
            "wall_time": self.wall_time,
            "hit_target": self.hit_target,
            "config": self.config,
        }


def _config_echo(N: int, config: SolverConfig) -> dict:
    d = asdict(config)
    d["N"] = N
    return d


def solve_exhaustive(N: int, config: SolverConfig | None = None) -> SolveResult:
    """Gray-code enumeration with incremental updates; exact global minimum.

    With restrict_domain=True only sequences with the first two spins fixed to
    +1 are enumerated (every symmetry orbit contains such a member), and the
    reported optimum is identical.
    """
    config = config or SolverConfig(kind="exhaustive")
    if N > EXHAUSTIVE_N_ADVISORY:
        raise ResourceLimitError(
            f"exhaustive search at N={N} exceeds the advisory bound "
            f"{EXHAUSTIVE_N_ADVISORY}; run the table builder explicitly if intended"
        )
    t0 = time.perf_counter()
    shift = 2 if config.restrict_domain and N > 2 else 0
    best_e, best_x, steps_to_best, steps = _kernels.min_scan(N, shift)
    wall = time.perf_counter() - t0
    target = config.target_energy if config.target_energy is not None else best_e
    return SolveResult(
        best_sequence=SpinSequence.from_index(int(best_x), N),
        best_energy=int(best_e),
        evaluations_to_best=int(steps_to_best),
        evaluations_total=int(steps),
        wall_time=wall,
        hit_target=best_e <= target,
        config=_config_echo(N, config),
    )


def optimal_set(N: int, restrict_domain: bool = True) -> tuple:
    """(min_energy, sorted indices of all optimal bitstrings).

    Enumerates a fundamental domain and expands the symmetry orbits of the
    optima found there; orbit closure makes the expansion exhaustive.
    """
    res = solve_exhaustive(N, SolverConfig(kind="exhaustive", restrict_domain=restrict_domain))
    min_e = res.best_energy
    if not restrict_domain or N <= 2:
        from .core import build_energy_table

        table = build_energy_table(N)
        return table.min_energy, [int(x) for x in table.optimal_indices]
    found = set()
    size = 1 << (N - 2)
    spins = np.ones(N, dtype=np.int8)
    a = autocorrelations(spins)
    e = int(np.dot(a, a))
    if e == min_e:
        found.add(0)
    # second Gray pass over the domain collecting argmins
    for n in range(1, size):
        j = ((n & -n).bit_length() - 1) + 2
        de, a = _incr(spins, a, j)
        e += de
        spins[j] = -spins[j]
        if e == min_e:
            found.add((((n ^ (n >> 1))) << 2))
    full = set()
    for x in found:
        full.update(orbit_of_index(x, N))
    return min_e, sorted(full)


def orbit_of_index(x: int, N: int) -> list:
    return [s.to_index() for s in symmetry_orbit(spins_from_index(x, N))]


def _incr(spins: np.ndarray, A: np.ndarray, j: int):
    s = spins.astype(np.int64)
    N = s.shape[0]
    new = A.copy()
    delta = 0
    for k in range(1, N):
        d = 0
        if j + k < N:
            d += s[j + k]
        if j - k >= 0:
            d += s[j - k]
        if d:
            an = A[k - 1] - 2 * s[j] * d
            new[k - 1] = an
            delta += an * an - A[k - 1] * A[k - 1]
    return int(delta), new


def _skew_complete(half: np.ndarray, N: int) -> np.ndarray:
    """Build the full odd-length sequence from its free half s_1..s_k."""
    k = (N + 1) // 2
    s = np.empty(N, dtype=np.int8)
    s[:k] = half
    for l in range(1, k):
        s[k + l - 1] = (-1) ** l * s[k - l - 1]
    return s


def _random_start(N: int, rng: np.random.Generator, skew_only: bool) -> np.ndarray:
    if skew_only:
        if N % 2 == 0:
            raise ValueError("skew-symmetric restriction requires odd N")
        half = (1 - 2 * rng.integers(0, 2, (N + 1) // 2)).astype(np.int8)
        return _skew_complete(half, N)
    return (1 - 2 * rng.integers(0, 2, N)).astype(np.int8)


def _tabu_once(spins, tenure, max_iters, target, budget_left, stall):
    """Run the tabu kernel from `spins`; returns (best_spins, best_E, evals,
    evals_to_best, hit)."""
    a = autocorrelations(spins)
    A = np.zeros(spins.shape[0], dtype=np.int64)
    A[1:] = a
    E = int(np.dot(a, a))
    best = np.empty_like(spins)
    work = spins.copy()
    best_E, evals, evals_to_best, hit, _ = _kernels.tabu_run(
        work, A, E, best, int(tenure), int(max_iters), int(target),
        int(max(0, budget_left - 1)), int(stall),
    )
    if hit and evals == 0:
        # start already met the target: nothing was evaluated
        return best, int(best_E), 0, 0, True
    # the start configuration itself costs one evaluation
    return best, int(best_E), int(evals) + 1, int(evals_to_best) + 1, bool(hit)


def _draw_tenure(N: int, rng: np.random.Generator, config: SolverConfig) -> int:
    lo, hi = config.tenure_range or (N // 10 + 1, N // 2 + 1)
    hi = min(hi, N - 1)  # keep at least one non-tabu move available
    lo = min(lo, hi)
    return int(rng.integers(lo, hi + 1))


def solve_tabu(N: int, config: SolverConfig | None = None,
               start: SpinSequence | None = None) -> SolveResult:
    """Restarted tabu search over the single-flip neighborhood.

    Each iteration evaluates all N neighbors incrementally (N evaluations),
    moves to the best non-tabu one (tabu moves allowed when they would improve
    the global best), and marks the flipped index tabu for `tenure`
    iterations. Restarts from fresh random sequences until the target is hit
    or the budget runs out.
    """
    config = config or SolverConfig(kind="tabu")
    rng = np.random.default_rng(config.seed)
    target = config.target_energy if config.target_energy is not None else -1
    max_iters = config.tabu_iters or 10 * N
    stall = config.tabu_stall if config.tabu_stall is not None else 2 * N
    t0 = time.perf_counter()
    total = 0
    best_spins = None
    best_e = None
    best_at = 0
    hit = False
    first = True
    while total < config.budget and not hit:
        if first and start is not None:
            spins = as_spins(start).copy()
            first = False
        else:
            spins = _random_start(N, rng, config.skew_symmetric_only)
            first = False
        if config.skew_symmetric_only:
            cand, cand_e, evals, to_best, hit = _skew_tabu_once(
                spins, N, rng, config, max_iters, target, config.budget - total
            )
        else:
            tenure = _draw_tenure(N, rng, config)
            cand, cand_e, evals, to_best, hit = _tabu_once(
                spins, tenure, max_iters, target, config.budget - total, stall
            )
        if best_e is None or cand_e < best_e:
            best_e = cand_e
            best_spins = cand
            best_at = total + to_best
        total += evals
    wall = time.perf_counter() - t0
    return SolveResult(
        best_sequence=SpinSequence(best_spins),
        best_energy=int(best_e),
        evaluations_to_best=int(best_at),
        evaluations_total=int(total),
        wall_time=wall,
        hit_target=bool(best_e <= target) if config.target_energy is not None else False,
        config=_config_echo(N, config),
    )


def _skew_tabu_once(spins, N, rng, config, max_iters, target, budget_left):
    """Tabu over the skew-symmetric subspace: moves flip one free half-spin
    (which flips its mirrored partner), energies always of the full sequence."""
    k = (N + 1) // 2
    half = spins[:k].copy()
    cur = _skew_complete(half, N)
    cur_e = sidelobe_energy(cur)
    evals = 1
    best = cur.copy()
    best_e = cur_e
    to_best = 1
    tenure = _draw_tenure(k, rng, config)
    tabu_until = np.zeros(k, dtype=np.int64)
    it = 0
    hit = best_e <= target
    while it < max_iters and evals < budget_left and not hit:
        it += 1
        move, move_e = -1, None
        for i in range(k):
            if evals >= budget_left:
                break
            half[i] = -half[i]
            cand = _skew_complete(half, N)
            e = sidelobe_energy(cand)
            evals += 1
            half[i] = -half[i]
            if (tabu_until[i] < it or e < best_e) and (move_e is None or e < move_e):
                move, move_e = i, e
        if move < 0:
            break
        half[move] = -half[move]
        cur = _skew_complete(half, N)
        cur_e = move_e
        tabu_until[move] = it + tenure
        if cur_e < best_e:
            best_e = cur_e
            best = cur.copy()
            to_best = evals
            if best_e <= target:
                hit = True
    return best, int(best_e), evals, to_best, hit


def solve_memetic_tabu(N: int, config: SolverConfig | None = None) -> SolveResult:
    """Steady-state memetic algorithm with tabu refinement.

    Population of random sequences, each refined by tabu search. Per
    generation: tournament selection of two parents, uniform crossover,
    per-spin mutation, tabu refinement of the offspring, and replacement of
    the worst member when the offspring improves on it.
    """
    config = config or SolverConfig(kind="memetic_tabu")
    if config.population < 2:
        raise ValueError("population must be >= 2")
    rng = np.random.default_rng(config.seed)
    target = config.target_energy if config.target_energy is not None else -1
    max_iters = config.tabu_iters or 10 * N
    stall = config.tabu_stall if config.tabu_stall is not None else 2 * N
    mut = config.mutation_rate if config.mutation_rate is not None else 1.0 / N
    t0 = time.perf_counter()
    total = 0
    pop: list[np.ndarray] = []
    energies: list[int] = []
    best_spins, best_e, best_at = None, None, 0
    hit = False

    def refine(spins):
        nonlocal total, best_spins, best_e, best_at, hit
        tenure = _draw_tenure(N, rng, config)
        cand, cand_e, evals, to_best, h = _tabu_once(
            spins, tenure, max_iters, target, config.budget - total, stall
        )
        if best_e is None or cand_e < best_e:
            best_e, best_spins = cand_e, cand
            best_at = total + to_best
        total += evals
        hit = hit or h
        return cand, cand_e

    for _ in range(config.population):
        if total >= config.budget or hit:
            break
        ind, e = refine(_random_start(N, rng, config.skew_symmetric_only))
        pop.append(ind)
        energies.append(e)
    while total < config.budget and not hit and len(pop) >= 2:
        p1 = _tournament(pop, energies, rng, config.tournament)
        p2 = _tournament(pop, energies, rng, config.tournament)
        if rng.random() < config.crossover_rate:
            mask = rng.integers(0, 2, N).astype(bool)
            child = np.where(mask, pop[p1], pop[p2]).astype(np.int8)
        else:
            child = pop[p1].copy()
        flip = rng.random(N) < mut
        child[flip] = -child[flip]
        if np.array_equal(child, pop[p1]) or np.array_equal(child, pop[p2]):
            # refining an unmutated copy wastes a full tabu run
            child[int(rng.integers(0, N))] *= -1
        if config.skew_symmetric_only:
            child = _skew_complete(child[: (N + 1) // 2], N)
        child, child_e = refine(child)
        worst = int(np.argmax(energies))
        if child_e <= energies[worst]:
            pop[worst] = child
            energies[worst] = child_e
    wall = time.perf_counter() - t0
    return SolveResult(
        best_sequence=SpinSequence(best_spins),
        best_energy=int(best_e),
        evaluations_to_best=int(best_at),
        evaluations_total=int(total),
        wall_time=wall,
        hit_target=bool(best_e <= target) if config.target_energy is not None else False,
        config=_config_echo(N, config),
    )


def _tournament(pop, energies, rng, size) -> int:
    picks = rng.integers(0, len(pop), size)
    return int(min(picks, key=lambda i: energies[i]))


_SOLVERS = {
    "exhaustive": lambda N, cfg: solve_exhaustive(N, cfg),
    "tabu": lambda N, cfg: solve_tabu(N, cfg),
    "memetic_tabu": lambda N, cfg: solve_memetic_tabu(N, cfg),
}


def solve(N: int, config: SolverConfig) -> SolveResult:
    try:
        fn = _SOLVERS[config.kind]
    except KeyError:
        raise ValueError(f"unknown solver kind {config.kind!r}") from None
    return fn(N, config)


@dataclass
class TtsRow:
    N: int
    seed: int
    evaluations_to_best: int
    hit_target: bool
    wall_ms: float


def measure_tts(solver_kind: str, sizes: Iterable[int], seeds: int,
                base_config: SolverConfig | None = None,
                targets: dict | None = None) -> list:
    """Run a solver to the exact optimum for each (N, seed) cell.

    Targets default to exhaustive ground truth. Returns TtsRow records;
    rows that miss the target within budget are flagged (hit_target=False)
    and should be excluded from scaling fits.
    """
    rows = []
    for N in sizes:
        if targets and N in targets:
            target = targets[N]
        else:
            target = solve_exhaustive(N, SolverConfig(kind="exhaustive", restrict_domain=True)).best_energy
        for s in range(seeds):
            cfg = SolverConfig(
                kind=solver_kind,
                seed=_cell_seed(base_config.seed if base_config else 0, N, s),
                target_energy=target,
                budget=base_config.budget if base_config else 10**9,
                tenure_range=base_config.tenure_range if base_config else None,
                tabu_iters=base_config.tabu_iters if base_config else None,
                tabu_stall=base_config.tabu_stall if base_config else None,
                population=base_config.population if base_config else 20,
                tournament=base_config.tournament if base_config else 2,
                crossover_rate=base_config.crossover_rate if base_config else 0.9,
                mutation_rate=base_config.mutation_rate if base_config else None,
                skew_symmetric_only=base_config.skew_symmetric_only if base_config else False,
            )
            res = solve(N, cfg)
            rows.append(TtsRow(
                N=N,
                seed=s,
                evaluations_to_best=res.evaluations_to_best if res.hit_target else res.evaluations_total,
                hit_target=res.hit_target,
                wall_ms=res.wall_time * 1e3,
            ))
    return rows


def _cell_seed(global_seed: int, N: int, seed_index: int) -> int:
    ss = np.random.SeedSequence([int(global_seed), int(N), int(seed_index)])
    return int(ss.generate_state(1, dtype=np.uint64)[0] & 0x7FFFFFFFFFFFFFFF)


def write_tts_csv(rows: Sequence[TtsRow], path, sidecar_config: dict | None = None) -> None:
    rows = sorted(rows, key=lambda r: (r.N, r.seed))
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["N", "seed", "evaluations_to_best", "hit_target", "wall_ms"])
        for r in rows:
            w.writerow([r.N, r.seed, r.evaluations_to_best, int(r.hit_target), f"{r.wall_ms:.3f}"])
    if sidecar_config is not None:
        with open(str(path) + ".config.json", "w") as fh:
            json.dump(sidecar_config, fh, indent=2)
            fh.write("\n")


def mean_tts_by_size(rows: Sequence[TtsRow]) -> list:
    """(N, mean evaluations over hitting seeds) pairs, misses excluded."""
    out = {}
    for r in rows:
        if r.hit_target:
            out.setdefault(r.N, []).append(r.evaluations_to_best)
    return [(N, float(np.mean(v))) for N, v in sorted(out.items())]
