import numpy as np
import pytest

from labskit import core, solvers
from labskit.errors import ResourceLimitError
from labskit.solvers import SolverConfig


def test_exhaustive_small(table):
    r = solvers.solve_exhaustive(3)
    assert r.best_energy == 1
    assert r.evaluations_total == 8
    assert core.sidelobe_energy(r.best_sequence) == 1


def test_exhaustive_n13():
    r = solvers.solve_exhaustive(13)
    assert r.best_energy == 6
    assert r.best_sequence.n ** 2 / (2 * r.best_energy) == pytest.approx(169 / 12)


@pytest.mark.parametrize("n", [6, 9, 12])
def test_exhaustive_restricted_matches_full(n, table):
    full = solvers.solve_exhaustive(n)
    restricted = solvers.solve_exhaustive(n, SolverConfig(kind="exhaustive", restrict_domain=True))
    assert full.best_energy == restricted.best_energy == table(n).min_energy
    assert restricted.evaluations_total == 2 ** (n - 2)


def test_exhaustive_advisory_bound():
    with pytest.raises(ResourceLimitError):
        solvers.solve_exhaustive(29)


@pytest.mark.parametrize("n", [5, 8, 11, 13])
def test_optimal_set_matches_table(n, table):
    min_e, opts = solvers.optimal_set(n)
    assert min_e == table(n).min_energy
    assert opts == sorted(table(n).optimal_indices.tolist())


def test_tabu_start_at_optimum(table):
    n = 10
    x = int(table(n).optimal_indices[0])
    cfg = SolverConfig(kind="tabu", seed=0, target_energy=table(n).min_energy, budget=10**5)
    r = solvers.solve_tabu(n, cfg, start=core.SpinSequence.from_index(x, n))
    assert r.hit_target
    assert r.evaluations_to_best == 0


def test_tabu_hits_optimum_most_seeds(table):
    n = 10
    target = table(n).min_energy
    hits = 0
    for seed in range(50):
        cfg = SolverConfig(kind="tabu", seed=seed, target_energy=target, budget=10**5)
        r = solvers.solve_tabu(n, cfg)
        hits += r.hit_target
        assert r.best_energy >= target
        assert r.best_energy == core.sidelobe_energy(r.best_sequence)
        assert r.evaluations_to_best <= r.evaluations_total <= 10**5
    assert hits >= 45


def test_tabu_budget_respected():
    cfg = SolverConfig(kind="tabu", seed=1, target_energy=0, budget=500)
    r = solvers.solve_tabu(12, cfg)
    assert not r.hit_target
    assert r.evaluations_total <= 500


def test_memetic_hits_optimum(table):
    n = 12
    cfg = SolverConfig(kind="memetic_tabu", seed=3, target_energy=table(n).min_energy,
                       budget=10**6)
    r = solvers.solve_memetic_tabu(n, cfg)
    assert r.hit_target
    assert r.best_energy == table(n).min_energy


def test_memetic_mean_evals_below_exhaustive(table):
    n = 12
    target = table(n).min_energy
    evals = []
    for seed in range(50):
        cfg = SolverConfig(kind="memetic_tabu", seed=seed, target_energy=target, budget=10**6)
        r = solvers.solve_memetic_tabu(n, cfg)
        assert r.hit_target
        evals.append(r.evaluations_to_best)
    assert np.mean(evals) <= 2**n


def test_solvers_never_beat_exhaustive(table):
    for n in (6, 9, 11):
        floor = table(n).min_energy
        for seed in range(5):
            rt = solvers.solve_tabu(n, SolverConfig(kind="tabu", seed=seed, budget=3000))
            rm = solvers.solve_memetic_tabu(
                n, SolverConfig(kind="memetic_tabu", seed=seed, budget=3000)
            )
            assert rt.best_energy >= floor
            assert rm.best_energy >= floor


def test_seed_determinism():
    cfg = SolverConfig(kind="memetic_tabu", seed=11, target_energy=6, budget=10**5)
    a = solvers.solve_memetic_tabu(13, cfg)
    b = solvers.solve_memetic_tabu(13, cfg)
    assert a.best_energy == b.best_energy
    assert a.evaluations_total == b.evaluations_total
    assert a.evaluations_to_best == b.evaluations_to_best
    assert a.best_sequence.to_index() == b.best_sequence.to_index()


def test_skew_symmetric_restriction(table):
    n = 11
    cfg = SolverConfig(kind="tabu", seed=2, budget=20000, skew_symmetric_only=True,
                       target_energy=table(n).min_energy)
    r = solvers.solve_tabu(n, cfg)
    assert core.is_skew_symmetric(r.best_sequence)
    # N=11 optimum is attained by a skew-symmetric sequence
    assert r.best_energy == table(n).min_energy


def test_skew_completion_halves_space():
    n = 9
    k = (n + 1) // 2
    seen = set()
    for h in range(2**k):
        half = (1 - 2 * np.array([(h >> j) & 1 for j in range(k)])).astype(np.int8)
        s = solvers._skew_complete(half, n)
        assert core.is_skew_symmetric(s)
        seen.add(core.index_from_spins(s))
    assert len(seen) == 2**k


def test_measure_tts_deterministic_and_flagged(table):
    rows1 = solvers.measure_tts("tabu", [8, 9], seeds=5,
                                base_config=SolverConfig(kind="tabu", seed=0, budget=10**5))
    rows2 = solvers.measure_tts("tabu", [8, 9], seeds=5,
                                base_config=SolverConfig(kind="tabu", seed=0, budget=10**5))
    key = lambda r: (r.N, r.seed, r.evaluations_to_best, r.hit_target)
    assert [key(r) for r in rows1] == [key(r) for r in rows2]
    assert all(r.hit_target for r in rows1)
    means = dict(solvers.mean_tts_by_size(rows1))
    assert set(means) == {8, 9}


def test_measure_tts_exhaustive_bounded():
    rows = solvers.measure_tts("exhaustive", [6, 8], seeds=2)
    for r in rows:
        assert r.evaluations_to_best <= 2**r.N


def test_tts_csv_roundtrip(tmp_path):
    rows = solvers.measure_tts("tabu", [8], seeds=3,
                               base_config=SolverConfig(kind="tabu", seed=1, budget=10**5))
    path = tmp_path / "tts.csv"
    solvers.write_tts_csv(rows, path, sidecar_config={"solver": "tabu"})
    text = path.read_text().splitlines()
    assert text[0] == "N,seed,evaluations_to_best,hit_target,wall_ms"
    assert len(text) == 4
    assert (tmp_path / "tts.csv.config.json").exists()


def test_solver_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(kind="memetic_tabu", population=1)
    with pytest.raises(ValueError):
        SolverConfig(budget=0)
    with pytest.raises(ValueError):
        solvers.solve(8, SolverConfig(kind="nope"))
