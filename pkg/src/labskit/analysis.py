"""Scaling fits, fit diagnostics, landscape correlation, and gain curves."""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from scipy import stats as sstats

from .core import EnergyTable, ProblemInstance
from .minfind import aa_gain_curve
from .schedules import FixedParams, instantiate_fixed
from .simulator import run_qaoa


@dataclass
class ScalingFit:
    """Exponential fit tts ~ b^N from OLS of ln(tts) on N."""

    base: float
    log_intercept: float
    ci_low: float
    ci_high: float
    r_squared: float
    n_points: int
    n_min: int

    def to_json_dict(self) -> dict:
        return {
            "base": self.base,
            "ci": [self.ci_low, self.ci_high],
            "r2": self.r_squared,
            "n": self.n_points,
            "N_min": self.n_min,
            "log_intercept": self.log_intercept,
        }

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json_dict(), fh, indent=2)
            fh.write("\n")


def fit_exponential(points, n_min: int = 0) -> ScalingFit:
    """Least-squares regression of ln(tts) on N with a 95% Student-t interval
    on the exponentiated slope. Points with N < n_min are excluded."""
    pts = [(int(N), float(t)) for N, t in points if N >= n_min]
    if len(pts) < 3:
        raise ValueError("need at least 3 points with N >= n_min")
    if any(t <= 0 for _, t in pts):
        raise ValueError("tts values must be positive")
    x = np.array([p[0] for p in pts], dtype=np.float64)
    y = np.log(np.array([p[1] for p in pts], dtype=np.float64))
    n = x.shape[0]
    xm = x.mean()
    ym = y.mean()
    sxx = float(np.sum((x - xm) ** 2))
    if sxx == 0:
        raise ValueError("need at least two distinct N values")
    slope = float(np.sum((x - xm) * (y - ym)) / sxx)
    intercept = ym - slope * xm
    resid = y - (intercept + slope * x)
    sse = float(np.sum(resid**2))
    sst = float(np.sum((y - ym) ** 2))
    r2 = 1.0 - sse / sst if sst > 0 else 1.0
    se = np.sqrt(sse / (n - 2) / sxx) if n > 2 else 0.0
    tq = float(sstats.t.ppf(0.975, n - 2))
    return ScalingFit(
        base=float(np.exp(slope)),
        log_intercept=intercept,
        ci_low=float(np.exp(slope - tq * se)),
        ci_high=float(np.exp(slope + tq * se)),
        r_squared=r2,
        n_points=n,
        n_min=n_min,
    )


def fit_quality_sweep(points, n_min_range) -> list:
    """Fit per minimum-N cutoff; rows of (n_min, r_squared, base)."""
    out = []
    for n_min in n_min_range:
        try:
            fit = fit_exponential(points, n_min)
        except ValueError:
            continue
        out.append((n_min, fit.r_squared, fit.base))
    return out


def hamming_objective_correlation(table: EnergyTable, reference_indices=None) -> float:
    """Pearson correlation between the Hamming distance to the nearest optimal
    bitstring and the sidelobe energy, over all 2^N bitstrings.

    reference_indices overrides the distance reference set (default: the
    table's optimal bitstrings)."""
    if table.N > 20:
        raise ValueError("exhaustive correlation limited to N <= 20")
    idx = np.arange(1 << table.N, dtype=np.uint64)
    opt = np.asarray(
        table.optimal_indices if reference_indices is None else reference_indices
    ).astype(np.uint64)
    dist = np.full(idx.shape[0], table.N + 1, dtype=np.int64)
    for o in opt:
        np.minimum(dist, np.bitwise_count(idx ^ o).astype(np.int64), out=dist)
    e = table.energies.astype(np.float64)
    if np.all(e == e[0]):
        raise ValueError("degenerate energy table: correlation undefined")
    return float(np.corrcoef(dist.astype(np.float64), e)[0, 1])


def gain_comparison(instance: ProblemInstance, table: EnergyTable,
                    fixed_by_p, max_p: int) -> list:
    """Per-step success-probability gains: QAOA layers vs amplitude
    amplification from the actual random-guess probability.

    fixed_by_p maps depth -> FixedParams (a single FixedParams is truncated to
    each depth). Rows: (step, qaoa_p_opt, qaoa_gain, aa_gain).
    """
    p0 = table.p0
    aa = aa_gain_curve(p0, max_p)
    rows = []
    prev = p0
    for p in range(1, max_p + 1):
        if isinstance(fixed_by_p, FixedParams):
            fp = FixedParams(
                fixed_by_p.beta_fixed[:p],
                fixed_by_p.gamma_fixed_scaled[:p],
                fixed_by_p.source_sizes,
            )
        else:
            fp = fixed_by_p[p]
        sched = instantiate_fixed(fp, instance.N)
        res = run_qaoa(instance, sched, table)
        rows.append((p, res.p_opt, res.p_opt / prev, float(aa[p - 1])))
        prev = res.p_opt
    return rows
