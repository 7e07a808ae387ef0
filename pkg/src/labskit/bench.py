"""Benchmark the numba kernels against their pure-numpy twins.

Run as ``python -m labskit.bench [--n N] [--repeat R]``. Exercises both code
paths explicitly regardless of the LABS_PURE_NUMPY setting, reports wall
times and the speedup, and verifies the two paths agree on each workload.
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from . import _kernels
from ._backend import NUMBA_AVAILABLE
from .core import autocorrelations


def _time(fn, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_energy_table(N: int, repeat: int):
    size = 1 << N
    out_nb = np.empty(size, np.int64)
    out_np = np.empty(size, np.int64)
    t_np = _time(lambda: _kernels.energy_table_range_numpy(N, 0, size, out_np), repeat)
    t_nb = None
    if NUMBA_AVAILABLE:
        _kernels.energy_table_range_numba(N, 0, size, out_nb)  # compile
        t_nb = _time(lambda: _kernels.energy_table_range_numba(N, 0, size, out_nb), repeat)
        assert np.array_equal(out_nb, out_np), "table kernels disagree"
    return "energy_table", t_np, t_nb


def bench_mixer(N: int, repeat: int):
    rng = np.random.default_rng(0)
    psi = rng.normal(size=1 << N) + 1j * rng.normal(size=1 << N)
    psi /= np.linalg.norm(psi)
    a = psi.copy()
    b = psi.copy()
    t_np = _time(lambda: _kernels.apply_mixer_numpy(a, N, 0.13), repeat)
    t_nb = None
    if NUMBA_AVAILABLE:
        _kernels.apply_mixer_numba(b, N, 0.13)  # compile
        b = psi.copy()
        t_nb = _time(lambda: _kernels.apply_mixer_numba(b, N, 0.13), repeat)
        a2, b2 = psi.copy(), psi.copy()
        _kernels.apply_mixer_numpy(a2, N, 0.13)
        _kernels.apply_mixer_numba(b2, N, 0.13)
        assert np.max(np.abs(a2 - b2)) < 1e-12, "mixer kernels disagree"
    return "mixer", t_np, t_nb


def bench_phase(N: int, repeat: int):
    rng = np.random.default_rng(1)
    psi = rng.normal(size=1 << N) + 1j * rng.normal(size=1 << N)
    hc = rng.integers(-50, 50, 1 << N).astype(np.int64)
    a = psi.copy()
    b = psi.copy()
    t_np = _time(lambda: _kernels.apply_phase_numpy(a, hc, 0.07), repeat)
    t_nb = None
    if NUMBA_AVAILABLE:
        _kernels.apply_phase_numba(b, hc, 0.07)
        b = psi.copy()
        t_nb = _time(lambda: _kernels.apply_phase_numba(b, hc, 0.07), repeat)
        a2, b2 = psi.copy(), psi.copy()
        _kernels.apply_phase_numpy(a2, hc, 0.07)
        _kernels.apply_phase_numba(b2, hc, 0.07)
        assert np.max(np.abs(a2 - b2)) < 1e-12, "phase kernels disagree"
    return "phase", t_np, t_nb


def bench_tabu(N: int, repeat: int):
    rng = np.random.default_rng(2)
    spins0 = (1 - 2 * rng.integers(0, 2, N)).astype(np.int8)

    def run(kernel):
        spins = spins0.copy()
        a = autocorrelations(spins)
        A = np.zeros(N, np.int64)
        A[1:] = a
        E = int(np.dot(a, a))
        best = np.empty_like(spins)
        return kernel(spins, A, E, best, 3, 2000, -1, 10**9, 0)

    t_np = _time(lambda: run(_kernels.tabu_run_numpy), repeat)
    t_nb = None
    if NUMBA_AVAILABLE:
        run(_kernels.tabu_run_numba)
        t_nb = _time(lambda: run(_kernels.tabu_run_numba), repeat)
        assert run(_kernels.tabu_run_numpy)[:3] == run(_kernels.tabu_run_numba)[:3], \
            "tabu kernels disagree"
    return "tabu(2000 iters)", t_np, t_nb


def bench_perm_phase(N: int, repeat: int):
    rng = np.random.default_rng(3)
    n_g = 400
    kinds = rng.integers(0, 3, n_g).astype(np.int64)
    qa = rng.integers(0, N, n_g).astype(np.int64)
    qb = (qa + 1 + rng.integers(0, N - 1, n_g)) % N
    ang = rng.normal(size=n_g)
    no_err = (np.empty(0, np.int64),) * 3

    def run(kernel):
        return kernel(kinds, qa, qb, ang, *no_err, N)

    t_np = _time(lambda: run(_kernels.perm_phase_numpy), repeat)
    t_nb = None
    if NUMBA_AVAILABLE:
        run(_kernels.perm_phase_numba)
        t_nb = _time(lambda: run(_kernels.perm_phase_numba), repeat)
        y1, p1 = run(_kernels.perm_phase_numpy)
        y2, p2 = run(_kernels.perm_phase_numba)
        assert np.array_equal(y1, y2) and np.max(np.abs(p1 - p2)) < 1e-12, \
            "perm-phase kernels disagree"
    return f"perm_phase({n_g} gates)", t_np, t_nb


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=18, help="problem size / qubit count")
    ap.add_argument("--n-small", type=int, default=13, help="size for the perm-phase workload")
    ap.add_argument("--tabu-n", type=int, default=24, help="sequence length for the tabu workload")
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    if not NUMBA_AVAILABLE:
        print("numba not importable: timing the numpy path only")
    rows = [
        bench_energy_table(args.n, args.repeat),
        bench_mixer(args.n, args.repeat),
        bench_phase(args.n, args.repeat),
        bench_tabu(args.tabu_n, args.repeat),
        bench_perm_phase(args.n_small, args.repeat),
    ]
    print(f"{'kernel':<24}{'numpy [ms]':>12}{'numba [ms]':>12}{'speedup':>9}")
    for name, t_np, t_nb in rows:
        if t_nb is None:
            print(f"{name:<24}{1e3 * t_np:>12.2f}{'-':>12}{'-':>9}")
        else:
            print(f"{name:<24}{1e3 * t_np:>12.2f}{1e3 * t_nb:>12.2f}{t_np / t_nb:>9.2f}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
