import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from labskit import compiler, core, errdetect, gatesim, schedules, simulator
from labskit.errdetect import CheckedCircuit, NoiseModel


@pytest.fixture(scope="module")
def checked8(request):
    inst = core.enumerate_terms(8)
    circ = compiler.compile_phase(inst, 0.19, seed=0)
    return errdetect.insert_checks(circ, 3)


def test_insert_checks_m1(instance):
    circ = compiler.compile_phase(instance(8), 0.2, seed=0)
    ck = errdetect.insert_checks(circ, 1)
    assert ck.m == 1
    assert ck.split_two_qubit_counts == [circ.two_qubit_count()]


def test_insert_checks_partition(checked8):
    assert checked8.m == 3
    assert sum(checked8.split_two_qubit_counts) == checked8.base.two_qubit_count()
    assert sum(len(s) for s in checked8.segments()) == len(checked8.base.gates)


def test_insert_checks_boundaries_commute(checked8):
    valid = set(errdetect.valid_cut_points(checked8.base.gates))
    for p in checked8.split_points:
        assert p in valid


def test_insert_checks_m_too_large(instance):
    circ = compiler.compile_phase(instance(4), 0.2, seed=0)
    with pytest.raises(ValueError):
        errdetect.insert_checks(circ, circ.two_qubit_count() + 1)


def test_noiseless_syndromes_zero_and_state_preserved(checked8, table):
    psi0 = np.zeros(1 << 10, dtype=np.complex128)
    psi0[: 1 << 8] = 0.0
    anc0 = np.zeros(4, dtype=np.complex128)
    anc0[0] = 1.0
    psi0 = np.kron(anc0, gatesim.plus_state(8))
    expanded = errdetect.expand_checks(checked8)
    psi, outcomes = gatesim.simulate_gates(expanded, 10, psi0=psi0,
                                           rng=np.random.default_rng(0))
    assert outcomes == [0] * (2 * checked8.m)
    ref = simulator.init_plus_state(8)
    simulator.apply_phase(ref, table(8), 0.19)
    assert gatesim.states_equal_up_to_phase(psi[: 1 << 8], ref.amplitudes) < 1e-10


def test_forced_clean_injections_detected(checked8):
    sites = errdetect.clean_injection_sites(checked8)
    s, rel = sites[len(sites) // 2]
    z, x = errdetect.forced_injection_syndromes(checked8, s, rel, "X", 2)
    assert z[s] == 1 and sum(x) == 0
    z, x = errdetect.forced_injection_syndromes(checked8, s, rel, "Z", 4)
    assert x[s] == 1 and sum(z) == 0
    z, x = errdetect.forced_injection_syndromes(checked8, s, rel, "Y", 4)
    assert z[s] == 1 and x[s] == 1


def test_detection_rate_exhaustive(checked8):
    assert errdetect.detection_theorem_check(checked8) == 1.0


def test_detection_fast_path_matches_gate_level(checked8):
    fast = errdetect.detection_theorem_check(checked8, trials=25, seed=1)
    slow = errdetect.detection_theorem_check(checked8, trials=25, seed=1, gate_level=True)
    assert fast == slow == 1.0


def test_even_weight_error_can_evade(checked8):
    # two X on the same qubit in the same segment cancel both syndromes
    sites = errdetect.clean_injection_sites(checked8)
    seg, rel = next((s, r) for s, r in sites if r >= 0)
    sim = errdetect._CheckedSimulator(checked8, beta=None)
    _, z, x = sim.run_shot([], np.random.default_rng(0),
                           by_seg={seg: [(rel, "X", 1), (rel, "X", 1)]})
    assert sum(z) == 0 and sum(x) == 0


def test_zero_injections_zero_detections(table):
    inst = core.enumerate_terms(6)
    ck = errdetect.insert_checks(compiler.compile_phase(inst, 0.3, seed=1), 2)
    stats = errdetect.simulate_noisy(ck, NoiseModel(p2=0.0, seed=0), 300, table(6), beta=0.25)
    assert stats.ratio == 1.0
    assert stats.detections_per_check == [0] * (2 * ck.m)
    assert stats.mf_kept == stats.mf_all


def test_joint_distribution_matches_explicit_unitary(instance, table):
    # fresh-ancilla deferred-measurement circuit vs the 4-branch fast path
    n, m = 4, 2
    circ = compiler.compile_phase(instance(n), 0.35, seed=0)
    ck = errdetect.insert_checks(circ, m)
    injections = [(1, "X", 0), (len(circ.gates) - 1, "Z", 2)]
    sim = errdetect._CheckedSimulator(ck, beta=0.3)
    joint = sim.joint_distribution(injections)
    # explicit: expand with fresh ancillas, splice the Paulis, defer measurement
    gates = []
    pos = 0
    for s, seg in enumerate(ck.segments()):
        az, ax = n + 2 * s, n + 2 * s + 1
        gates.append(compiler.Gate("H", (az,)))
        gates.extend(compiler.Gate("CZ", (az, d)) for d in range(n))
        gates.append(compiler.Gate("H", (ax,)))
        gates.extend(compiler.Gate("CNOT", (ax, d)) for d in range(n))
        for g in seg:
            gates.append(g)
            for gi, pauli, q in injections:
                if gi == pos:
                    gates.append(compiler.Gate(pauli, (q,)))
            pos += 1
        gates.extend(compiler.Gate("CNOT", (ax, d)) for d in range(n))
        gates.append(compiler.Gate("H", (ax,)))
        gates.extend(compiler.Gate("CZ", (az, d)) for d in range(n))
        gates.append(compiler.Gate("H", (az,)))
    gates.extend(compiler.Gate("RX", (q,), 2 * 0.3) for q in range(n))
    total_q = n + 2 * m
    psi0 = np.zeros(1 << total_q, dtype=np.complex128)
    anc = np.zeros(1 << (2 * m), dtype=np.complex128)
    anc[0] = 1.0
    psi0 = np.kron(anc, gatesim.plus_state(n))
    psi, _ = gatesim.simulate_gates(gates, total_q, psi0=psi0)
    probs_full = np.abs(psi) ** 2
    for (z, x), weight, data_dist in joint:
        anc_bits = 0
        for s in range(m):
            anc_bits |= z[s] << (2 * s)
            anc_bits |= x[s] << (2 * s + 1)
        sel = probs_full[anc_bits << n:(anc_bits + 1) << n]
        assert weight == pytest.approx(float(sel.sum()), abs=1e-10)
        if weight > 1e-12:
            assert np.max(np.abs(sel / weight - data_dist)) < 1e-9


def test_run_shot_probabilities_sum_to_one(checked8):
    sim = errdetect._CheckedSimulator(checked8, beta=0.2)
    rng = np.random.default_rng(3)
    for inj in ([(5, "X", 1)], [(30, "Y", 3), (70, "Z", 6)]):
        probs, z, x = sim.run_shot(inj, rng)
        assert probs.sum() == pytest.approx(1.0, abs=1e-9)
        assert len(z) == len(x) == checked8.m


def test_simulate_noisy_statistics(checked8, table):
    stats = errdetect.simulate_noisy(checked8, NoiseModel(p2=2e-3, seed=5), 1500,
                                     table(8), beta=0.2)
    assert stats.shots_kept <= stats.shots_total
    assert stats.ratio == stats.shots_kept / stats.shots_total
    assert 0.7 < stats.ratio < 1.0
    assert len(stats.detections_per_check) == 2 * checked8.m


def test_noisy_checks_explicit_path(instance, table):
    circ = compiler.compile_phase(instance(5), 0.3, seed=0)
    ck = errdetect.insert_checks(circ, 2)
    stats = errdetect.simulate_noisy(ck, NoiseModel(p2=5e-3, seed=1), 100, table(5),
                                     beta=0.2, noisy_checks=True)
    assert stats.shots_total == 100
    assert 0.0 <= stats.ratio <= 1.0


def test_kept_distribution_matches_ideal(checked8, table):
    # noiseless: sampled kept distribution equals the ideal within 3 sigma TV
    beta = 0.2
    stats = errdetect.simulate_noisy(checked8, NoiseModel(p2=0.0, seed=7), 4000,
                                     table(8), beta=beta)
    assert stats.ratio == 1.0
    sched = schedules.Schedule([beta], [0.19])
    res = simulator.run_qaoa(core.enumerate_terms(8), sched, table(8))
    assert stats.mf_all == pytest.approx(res.expected_merit_factor, abs=0.05)


def test_avg_time_models_basics():
    assert errdetect.avg_time_models(3.0, [1, 1, 1]) == (3.0, 3.0)
    t1, t2 = errdetect.avg_time_models(1.0, [0.8])
    assert t1 == t2 == pytest.approx(1.25)
    t1, t2 = errdetect.avg_time_models(1.0, [0.9, 0.9, 0.9])
    assert t2 < t1
    assert errdetect.avg_time_models(1.0, [0.5, 0.0]) == (float("inf"), float("inf"))


def test_avg_time_model_m3_value():
    # direct evaluation of the early-stop expectation for m=3, p=(0.9,0.9,0.9)
    p = 0.9
    t1 = 1.0 / p**3
    factor = (1 - p) * (1 / 3) + p * (1 - p) * (2 / 3) + p * p
    assert errdetect.avg_time_models(1.0, [p, p, p]) == pytest.approx((t1, t1 * factor))


@given(st.lists(st.floats(0.01, 1.0), min_size=1, max_size=8), st.floats(0.1, 10))
@settings(max_examples=100, deadline=None)
def test_t2_never_exceeds_t1(ps, t0):
    t1, t2 = errdetect.avg_time_models(t0, ps)
    assert t2 <= t1 + 1e-12


def test_symmetry_commutation(instance):
    for n in range(2, 13):
        assert errdetect.symmetry_commutation_check(instance(n))
    assert not errdetect.symmetry_commutation_check(
        instance(6), extra_terms=[(1, 2, 3)], extra_coeffs=[1]
    )


def test_hc_from_terms_matches_table(instance, table):
    for n in (5, 9):
        inst = instance(n)
        terms = list(inst.two_body_terms) + list(inst.four_body_terms)
        coeffs = [1] * len(inst.two_body_terms) + [2] * len(inst.four_body_terms)
        hc = errdetect.hc_from_terms(terms, coeffs, n)
        assert np.array_equal(hc, table(n).hc_diagonal())


def test_checked_circuit_json(tmp_path, checked8):
    path = tmp_path / "checked.json"
    checked8.save(path)
    import json

    doc = json.loads(path.read_text())
    assert doc["m"] == 3
    assert doc["split_two_qubit_counts"] == checked8.split_two_qubit_counts
    assert doc["n_ancilla"] == 2
