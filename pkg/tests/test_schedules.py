import numpy as np
import pytest

from labskit import schedules, simulator
from labskit.schedules import FixedParams, FourierCoeffs, Schedule


def test_fourier_zero_and_p1():
    z = schedules.fourier_to_schedule(FourierCoeffs([0.0], [0.0]))
    assert z.betas[0] == 0.0 and z.gammas[0] == 0.0
    c = schedules.fourier_to_schedule(FourierCoeffs([2.0], [3.0]))
    assert c.gammas[0] == pytest.approx(2.0 * np.sin(np.pi / 4))
    assert c.betas[0] == pytest.approx(3.0 * np.cos(np.pi / 4))


def test_fourier_roundtrip():
    rng = np.random.default_rng(0)
    for p in (1, 3, 7):
        sched = Schedule(rng.normal(size=p), rng.normal(size=p))
        coeffs = schedules.schedule_to_fourier(sched)
        back = schedules.fourier_to_schedule(coeffs)
        assert np.max(np.abs(back.betas - sched.betas)) < 1e-10
        assert np.max(np.abs(back.gammas - sched.gammas)) < 1e-10


def test_fourier_linearity():
    rng = np.random.default_rng(1)
    p = 4
    u1, v1 = rng.normal(size=p), rng.normal(size=p)
    u2, v2 = rng.normal(size=p), rng.normal(size=p)
    a, b = 0.7, -1.3
    lhs = schedules.fourier_to_schedule(FourierCoeffs(a * u1 + b * u2, a * v1 + b * v2))
    s1 = schedules.fourier_to_schedule(FourierCoeffs(u1, v1))
    s2 = schedules.fourier_to_schedule(FourierCoeffs(u2, v2))
    assert np.allclose(lhs.gammas, a * s1.gammas + b * s2.gammas)
    assert np.allclose(lhs.betas, a * s1.betas + b * s2.betas)


def test_fourier_padding_is_welldefined():
    coeffs = FourierCoeffs([0.5, -0.2], [0.3, 0.1])
    padded = coeffs.extended()
    assert padded.p == 3
    assert padded.u[-1] == 0.0 and padded.v[-1] == 0.0
    sched = schedules.fourier_to_schedule(padded)
    assert sched.p == 3


def test_optimize_local_quadratic_bowl():
    target = np.array([0.3, -0.7, 1.1])
    out = schedules.optimize_local(
        lambda x: float(np.sum((x - target) ** 2)), np.zeros(3), initial_step=0.1
    )
    assert np.max(np.abs(out.x - target)) < 1e-6
    assert out.fval < 1e-10
    assert not out.hit_cap


def test_optimize_local_simplex_fallback():
    target = np.array([0.5, 0.5])
    out = schedules.optimize_local(
        lambda x: float(np.sum((x - target) ** 2)),
        np.zeros(2),
        initial_step=0.2,
        method="nelder-mead",
    )
    assert np.max(np.abs(out.x - target)) < 1e-4


def test_optimize_local_eval_cap():
    out = schedules.optimize_local(
        lambda x: float(np.sum(x**2)), np.full(4, 5.0), initial_step=0.01, max_evals=10
    )
    assert out.hit_cap
    assert out.nfev <= 10 + 4  # method may finish its last model batch


def test_optimize_local_deterministic():
    rng = np.random.default_rng(2)
    mat = rng.normal(size=(5, 5))

    def f(x):
        return float(x @ (mat.T @ mat) @ x + np.sin(x).sum())

    a = schedules.optimize_local(f, np.full(5, 0.3), 0.05)
    b = schedules.optimize_local(f, np.full(5, 0.3), 0.05)
    assert np.array_equal(a.x, b.x) and a.fval == b.fval and a.nfev == b.nfev


def test_single_local_run_matches_multistart(instance, table):
    # single in-range start vs the full multistart protocol at p=1
    n = 8
    obj = schedules.qaoa_objective(instance(n), table(n), "mf")
    single = schedules.optimize_local(obj, np.array([0.15, -0.4 / n]), 0.01 / n)
    multi = schedules.optimize_p1_grid(instance(n), table(n), "mf", restarts=60, seed=0)
    best = multi.provenance["objective_value"]
    assert -single.fval >= best * (1 - 1e-3)


def test_p1_grid_beats_grid_oracle(instance, table):
    n = 3
    sched = schedules.optimize_p1_grid(instance(n), table(n), "mf", restarts=60, seed=1)
    best = sched.provenance["objective_value"]
    betas = np.linspace(0.1, 0.2, 60)
    gammas = -np.linspace(0.0, 0.85 / n, 60)
    for b in betas:
        for g in gammas:
            res = simulator.run_qaoa(instance(n), ([b], [g]), table(n))
            assert best >= res.expected_merit_factor - 1e-9


def test_p1_objectives_differ(instance, table):
    n = 10
    mf = schedules.optimize_p1_grid(instance(n), table(n), "mf", restarts=30, seed=0)
    po = schedules.optimize_p1_grid(instance(n), table(n), "p_opt", restarts=30, seed=0)
    assert abs(mf.betas[0] - po.betas[0]) + abs(mf.gammas[0] - po.gammas[0]) > 1e-3


def test_p1_grid_deterministic(instance, table):
    a = schedules.optimize_p1_grid(instance(6), table(6), "mf", restarts=25, seed=5)
    b = schedules.optimize_p1_grid(instance(6), table(6), "mf", restarts=25, seed=5)
    assert np.array_equal(a.betas, b.betas) and np.array_equal(a.gammas, b.gammas)
    import json

    assert json.dumps(a.to_json_dict()) == json.dumps(b.to_json_dict())


def test_fourier_extend_monotone(instance, table):
    n = 8
    ladder = schedules.fourier_ladder(
        instance(n), table(n), p_max=4, objective_kind="mf", seed=0, p1_restarts=40
    )
    values = [v for _, _, _, v in ladder]
    for lo, hi in zip(values, values[1:]):
        assert hi >= lo - 1e-9


def test_fourier_extend_vs_direct_restarts(instance, table):
    n = 8
    ladder = schedules.fourier_ladder(
        instance(n), table(n), p_max=2, objective_kind="mf", seed=0, p1_restarts=60
    )
    fourier_val = ladder[-1][3]
    rng = np.random.default_rng(9)
    obj = schedules.qaoa_objective(instance(n), table(n), "mf")
    best = -np.inf
    for _ in range(100):
        x0 = np.concatenate(
            [rng.uniform(0.1, 0.2, 2), -rng.uniform(0, 0.85 / n, 2)]
        )
        out = schedules.optimize_local(obj, x0, 0.01 / n)
        best = max(best, -out.fval)
    assert fourier_val >= best * (1 - 0.005)


def test_make_fixed_params_single_source():
    sched = Schedule([0.2, 0.3], [0.05, 0.025])
    fp = schedules.make_fixed_params([(10, sched)])
    assert np.allclose(fp.beta_fixed, sched.betas)
    assert np.allclose(fp.gamma_fixed_scaled, 10 * sched.gammas)
    back = schedules.instantiate_fixed(fp, 10)
    assert np.allclose(back.betas, sched.betas)
    assert np.allclose(back.gammas, sched.gammas)


def test_make_fixed_params_mean_of_identical():
    sched = Schedule([0.2], [0.04])
    fp = schedules.make_fixed_params([(10, sched), (10, sched), (10, sched)])
    assert np.allclose(fp.beta_fixed, [0.2])
    assert np.allclose(fp.gamma_fixed_scaled, [0.4])


def test_make_fixed_params_depth_mismatch():
    with pytest.raises(ValueError):
        schedules.make_fixed_params(
            [(8, Schedule([0.1], [0.1])), (9, Schedule([0.1, 0.2], [0.1, 0.2]))]
        )


def test_instantiate_fixed_scaling():
    fp = FixedParams([0.2, 0.25], [0.5, 0.4], [12])
    s10 = schedules.instantiate_fixed(fp, 10)
    s20 = schedules.instantiate_fixed(fp, 20)
    assert np.allclose(s10.gammas * 10, fp.gamma_fixed_scaled)
    assert np.allclose(s20.gammas, s10.gammas / 2)
    assert np.allclose(s10.betas, s20.betas)


def test_fixed_params_transfer_close_to_direct(instance, table):
    # fixed params from small sources vs direct optimization at a target size
    sources = []
    for n in (8, 9, 10, 11):
        sched = schedules.optimize_p1_grid(instance(n), table(n), "p_opt", restarts=40, seed=0)
        sources.append((n, sched))
    fp = schedules.make_fixed_params(sources)
    target = 10
    transferred = schedules.instantiate_fixed(fp, target)
    res_t = simulator.run_qaoa(instance(target), transferred, table(target))
    direct = [s for n, s in sources if n == target][0]
    res_d = simulator.run_qaoa(instance(target), direct, table(target))
    assert res_t.p_opt >= 0.9 * res_d.p_opt


def test_gamma_scaling_trend(instance, table):
    # N * gamma*(N) stays within a 25% band for p=1 MF optima
    vals = {}
    for n in (10, 12, 14, 16):
        sched = schedules.optimize_p1_grid(instance(n), table(n), "mf", restarts=25, seed=0)
        vals[n] = abs(n * sched.gammas[0])
    arr = np.array(list(vals.values()))
    assert (arr.max() - arr.min()) / arr.min() < 0.25


def test_schedule_files_roundtrip(tmp_path):
    sched = Schedule([0.1, 0.2], [0.3, 0.4], provenance={"kind": "directly_optimized", "N": 9})
    p1 = tmp_path / "sched.json"
    sched.save(p1)
    loaded = schedules.load_params_file(p1)
    assert loaded["kind"] == "schedule"
    assert np.allclose(loaded["value"].betas, sched.betas)
    fp = FixedParams([0.1], [0.9], [8, 9])
    p2 = tmp_path / "fixed.json"
    fp.save(p2)
    loaded2 = schedules.load_params_file(p2)
    assert loaded2["kind"] == "fixed"
    assert loaded2["value"].source_sizes == [8, 9]
