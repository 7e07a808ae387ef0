"""Amplitude-amplification success model and Monte-Carlo simulation of
threshold-descent quantum minimum finding seeded by a QAOA output state.

The search subroutine is modeled as an ideal conditional sampler with
deterministic cost charging: a search below threshold mass P charges
ceil(2*C*N/sqrt(P)) query units, each inner loop stops at a budget of 3*C*M*N
charged units, and the loop repeats ceil(ln(1/delta)) times. Thresholds are
tracked at the granularity of distinct energies; the chain law (probability
that a level ever appears equals P(E = e)/P(E <= e)) holds unchanged under
this aggregation.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .core import EnergyTable


def aa_success_probability(p0: float, steps: int) -> float:
    """sin^2((2*steps+1) * arcsin(sqrt(p0))); steps=0 returns p0 exactly."""
    if not 0.0 < p0 <= 1.0:
        raise ValueError("p0 must be in (0, 1]")
    if steps < 0:
        raise ValueError("steps must be >= 0")
    if steps == 0:
        return float(p0)
    theta = math.asin(math.sqrt(p0))
    return math.sin((2 * steps + 1) * theta) ** 2


def aa_gain_curve(p0: float, max_steps: int) -> np.ndarray:
    """Per-step success-probability gains; entry p-1 is success(p)/success(p-1)."""
    succ = np.array([aa_success_probability(p0, s) for s in range(max_steps + 1)])
    return succ[1:] / succ[:-1]


def qmf_tts(p_opt: float) -> float:
    """Expected-query scaling of minimum finding: 1/sqrt(p_opt).

    Bare form, used for scaling fits (prefactors do not move the exponent);
    see qmf_tts_with_prefactor for the C*N-scaled count."""
    if not 0.0 < p_opt <= 1.0:
        raise ValueError("p_opt must be in (0, 1]")
    return 1.0 / math.sqrt(p_opt)


def qmf_tts_with_prefactor(p_opt: float, N: int, C: float = 1.0) -> float:
    """C*N/sqrt(p_opt): the expected-query count with the search prefactor."""
    return C * N * qmf_tts(p_opt)


@dataclass
class QmfRun:
    delta: float = 0.1
    M: float = 1.0
    C: float = 1.0
    trials: int = 500
    seed: int = 0
    record_chains: bool = False
    # model the search subroutine's own failure probability 1/(6*2^N): a
    # failed search charges its cost but returns no sample. Off by default
    # (negligible at desk sizes; the analysis treats it as a correction term).
    model_search_failures: bool = False

    def __post_init__(self):
        if not 0.0 < self.delta < 1.0:
            raise ValueError("delta must be in (0, 1)")
        if self.M <= 0 or self.C <= 0:
            raise ValueError("M and C must be positive")

    @property
    def repetitions(self) -> int:
        return math.ceil(math.log(1.0 / self.delta))

    def budget_per_repetition(self, N: int) -> int:
        return math.ceil(3.0 * self.C * self.M * N)

    def total_budget(self, N: int) -> int:
        return self.repetitions * self.budget_per_repetition(N)


@dataclass
class QmfOutcome:
    N: int
    delta: float
    M: float
    C: float
    trials: int
    success_rate: float
    mean_queries: float
    max_queries: int
    budget: int
    mean_queries_to_solution: float = float("nan")
    chains: list = field(default_factory=list)

    def to_json_dict(self, p: int | None = None) -> dict:
        return {
            "N": self.N,
            "p": p,
            "delta": self.delta,
            "M": self.M,
            "C": self.C,
            "trials": self.trials,
            "success_rate": self.success_rate,
            "mean_queries": self.mean_queries,
            "budget": self.budget,
        }

    def save(self, path, p: int | None = None) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json_dict(p), fh, indent=2)
            fh.write("\n")


def _level_aggregate(probabilities: np.ndarray, table: EnergyTable):
    """(level energies ascending, level masses, cumulative masses)."""
    if probabilities.shape[0] != table.energies.shape[0]:
        raise ValueError("distribution length does not match table")
    energies, inverse = np.unique(table.energies, return_inverse=True)
    masses = np.bincount(inverse, weights=probabilities, minlength=energies.shape[0])
    return energies, masses, np.cumsum(masses)


def simulate_qmf(probabilities: np.ndarray, table: EnergyTable, run: QmfRun) -> QmfOutcome:
    """Monte-Carlo the threshold-descent minimum finder.

    Per repetition: starting from an infinite threshold, repeatedly charge the
    search cost and sample an energy level strictly below the threshold until
    the conditional support is empty (the chain bottomed out) or the budget is
    spent. A search whose charge would overrun the remaining budget is
    abandoned: the budget is charged in full but no sample is returned, so no
    trial ever exceeds repetitions * 3*C*M*N charged units. A trial succeeds
    if the ground level appears in any repetition.
    """
    N = table.N
    energies, masses, cum = _level_aggregate(np.asarray(probabilities, float), table)
    if abs(cum[-1] - 1.0) > 1e-9:
        raise ValueError("probabilities must sum to 1")
    n_levels = energies.shape[0]
    budget = run.budget_per_repetition(N)
    reps = run.repetitions
    rng = np.random.default_rng(run.seed)
    successes = 0
    totals = np.empty(run.trials, dtype=np.int64)
    to_solution = []
    chains_out = []
    two_cn = 2.0 * run.C * N
    fail_p = 1.0 / (6.0 * 2.0**N) if run.model_search_failures else 0.0
    for trial in range(run.trials):
        found = False
        total = 0
        chain_rec = [] if run.record_chains else None
        for _ in range(reps):
            level = n_levels  # threshold above every level
            charged = 0
            rep_chain = [] if chain_rec is not None else None
            while True:
                mass_below = cum[level - 1] if level > 0 else 0.0
                if mass_below <= 0.0:
                    break  # chain bottomed out: nothing below threshold
                cost = math.ceil(two_cn / math.sqrt(mass_below))
                if charged >= budget:
                    break
                if charged + cost > budget:
                    charged = budget  # search abandoned mid-flight
                    break
                charged += cost
                if fail_p > 0.0 and rng.random() < fail_p:
                    continue  # search failed: cost spent, no sample returned
                u = rng.random() * mass_below
                new_level = int(np.searchsorted(cum[:level], u, side="right"))
                if new_level >= level:
                    new_level = level - 1  # float-edge guard
                level = new_level
                if rep_chain is not None:
                    rep_chain.append(int(energies[level]))
                if level == 0 and not found:
                    found = True
                    to_solution.append(total + charged)
            total += charged
            if chain_rec is not None:
                chain_rec.append(rep_chain)
        successes += found
        totals[trial] = total
        if chain_rec is not None:
            chains_out.append(chain_rec)
    return QmfOutcome(
        N=N,
        delta=run.delta,
        M=run.M,
        C=run.C,
        trials=run.trials,
        success_rate=successes / run.trials,
        mean_queries=float(totals.mean()),
        max_queries=int(totals.max()),
        budget=run.total_budget(N),
        mean_queries_to_solution=float(np.mean(to_solution)) if to_solution else float("nan"),
        chains=chains_out,
    )


def sample_chain_law_check(probabilities: np.ndarray, table: EnergyTable,
                           trials: int, seed: int = 0) -> float:
    """Empirical check of the threshold-chain law.

    Runs the unbudgeted descent chain `trials` times and compares, per level,
    the frequency with which the level ever appears against
    P(E = e) / P(E <= e). Returns the largest absolute deviation.
    """
    energies, masses, cum = _level_aggregate(np.asarray(probabilities, float), table)
    n_levels = energies.shape[0]
    rng = np.random.default_rng(seed)
    hits = np.zeros(n_levels, dtype=np.int64)
    for _ in range(trials):
        level = n_levels
        while True:
            mass_below = cum[level - 1] if level > 0 else 0.0
            if mass_below <= 0.0:
                break
            u = rng.random() * mass_below
            level = int(np.searchsorted(cum[:level], u, side="right"))
            hits[level] += 1
    expected = np.where(masses > 0, masses / cum, 0.0)
    observed = hits / trials
    dev = np.abs(observed - expected)
    return float(dev[masses > 0].max())
