import numpy as np
import pytest

from labskit import analysis, core
from labskit.core import EnergyTable


def test_fit_noiseless_exact():
    pts = [(n, 3.0 * 1.5**n) for n in range(8, 20)]
    fit = analysis.fit_exponential(pts)
    assert fit.base == pytest.approx(1.5, abs=1e-12)
    assert fit.r_squared == pytest.approx(1.0, abs=1e-12)
    assert fit.ci_low <= 1.5 <= fit.ci_high
    assert np.exp(fit.log_intercept) == pytest.approx(3.0, rel=1e-9)


def test_fit_input_validation():
    with pytest.raises(ValueError):
        analysis.fit_exponential([(8, 1.0), (9, 2.0)])
    with pytest.raises(ValueError):
        analysis.fit_exponential([(8, 1.0), (9, -2.0), (10, 3.0)])
    with pytest.raises(ValueError):
        analysis.fit_exponential([(8, 1.0), (8, 2.0), (8, 3.0)])


def test_fit_uses_student_t_quantile():
    rng = np.random.default_rng(0)
    pts = [(n, 2.0**n * np.exp(rng.normal(0, 0.05))) for n in range(10, 16)]
    fit = analysis.fit_exponential(pts)
    # CI symmetric in log space
    assert np.log(fit.ci_high) - np.log(fit.base) == pytest.approx(
        np.log(fit.base) - np.log(fit.ci_low), abs=1e-12
    )


def test_fit_ci_coverage():
    rng = np.random.default_rng(42)
    true_base = 1.4
    covered = 0
    for _ in range(200)    :
        pts = [(n, 5.0 * true_base**n * np.exp(rng.normal(0, 0.05))) for n in range(8, 20)]
        fit = analysis.fit_exponential(pts)
        covered += fit.ci_low <= true_base <= fit.ci_high
    assert covered >= 180


def test_fit_nmin_filter():
    pts = [(n, 1.3**n) for n in range(6, 18)]
    fit = analysis.fit_exponential(pts, n_min=10)
    assert fit.n_points == 8
    assert fit.n_min == 10


def test_fit_quality_sweep_curvature():
    # curved small-N regime: log tts = n log b + 8/n
    pts = [(n, float(np.exp(n * np.log(1.35) + 8.0 / n))) for n in range(4, 24)]
    rows = analysis.fit_quality_sweep(pts, range(4, 16, 2))
    r2 = [r[1] for r in rows]
    assert r2[-1] > r2[0]
    assert all(b > a - 1e-12 for a, b in zip(r2, r2[1:]))
    # base stabilizes toward the true value once curvature is excluded
    assert abs(rows[-1][2] - 1.35) < abs(rows[0][2] - 1.35)


def test_fit_quality_sweep_noiseless():
    pts = [(n, 1.2**n) for n in range(5, 20)]
    rows = analysis.fit_quality_sweep(pts, range(5, 12))
    assert all(r[1] == pytest.approx(1.0, abs=1e-12) for r in rows)


def test_correlation_constructed_extremes(table):
    t = table(8)
    idx = np.arange(256, dtype=np.uint64)
    opt = t.optimal_indices.astype(np.uint64)
    dist = np.full(256, 9, dtype=np.int64)
    for o in opt:
        np.minimum(dist, np.bitwise_count(idx ^ o).astype(np.int64), out=dist)
    perfect = EnergyTable(N=8, energies=dist + t.min_energy, min_energy=t.min_energy,
                          optimal_indices=t.optimal_indices)
    assert analysis.hamming_objective_correlation(perfect) == pytest.approx(1.0)
    anti = EnergyTable(N=8, energies=dist.max() - dist + 1, min_energy=1,
                       optimal_indices=np.flatnonzero(dist == dist.max()).astype(np.int64))
    r = analysis.hamming_objective_correlation(anti, reference_indices=t.optimal_indices)
    assert r == pytest.approx(-1.0)


def test_correlation_bounds_and_rescaling_invariance(table):
    t = table(10)
    r = analysis.hamming_objective_correlation(t)
    assert -1.0 <= r <= 1.0
    scaled = EnergyTable(N=10, energies=7 * t.energies + 3, min_energy=7 * t.min_energy + 3,
                         optimal_indices=t.optimal_indices)
    assert analysis.hamming_objective_correlation(scaled) == pytest.approx(r, abs=1e-12)


def test_correlation_symmetry_relabel_invariance(table):
    t = table(9)
    perm = core.reverse_index_permutation(9)
    inv = np.empty_like(perm)
    inv[perm] = np.arange(perm.shape[0])
    relabeled = EnergyTable(
        N=9,
        energies=t.energies[perm],
        min_energy=t.min_energy,
        optimal_indices=np.sort(inv[t.optimal_indices]),
    )
    assert analysis.hamming_objective_correlation(relabeled) == pytest.approx(
        analysis.hamming_objective_correlation(t), abs=1e-12
    )


def test_correlation_degenerate_flagged():
    t = EnergyTable(N=3, energies=np.full(8, 5, dtype=np.int64), min_energy=5,
                    optimal_indices=np.arange(8, dtype=np.int64))
    with pytest.raises(ValueError):
        analysis.hamming_objective_correlation(t)


@pytest.mark.parametrize("n", [10, 12, 14])
def test_labs_correlation_below_smooth_reference(n, table):
    t = table(n)
    r_labs = analysis.hamming_objective_correlation(t)
    idx = np.arange(1 << n, dtype=np.uint64)
    opt = t.optimal_indices.astype(np.uint64)
    dist = np.full(1 << n, n + 1, dtype=np.int64)
    for o in opt:
        np.minimum(dist, np.bitwise_count(idx ^ o).astype(np.int64), out=dist)
    smooth = EnergyTable(N=n, energies=dist + 1, min_energy=1,
                         optimal_indices=t.optimal_indices)
    r_smooth = analysis.hamming_objective_correlation(smooth)
    assert r_labs < r_smooth


def test_gain_comparison_rows(instance, table):
    from labskit.schedules import FixedParams

    n = 10
    fp = FixedParams([0.2, 0.18, 0.16], [-0.8, -0.7, -0.6], [10])
    rows = analysis.gain_comparison(instance(n), table(n), fp, max_p=3)
    assert len(rows) == 3
    aa1 = rows[0][3]
    assert aa1 < 9.0
    p0 = table(n).p0
    chained = p0
    for p, p_opt, gain, _ in rows:
        chained *= gain
        assert chained == pytest.approx(p_opt, rel=1e-9)


def test_fit_json(tmp_path):
    fit = analysis.fit_exponential([(n, 1.25**n) for n in range(6, 14)])
    path = tmp_path / "fit.json"
    fit.save(path)
    import json

    doc = json.loads(path.read_text())
    assert doc["base"] == pytest.approx(1.25)
    assert doc["ci"][0] <= doc["base"] <= doc["ci"][1]
