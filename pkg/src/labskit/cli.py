"""Command-line interface.

Exit codes: 0 success, 2 argument error, 3 resource advisory (allocation over
the LABS_MEM_BUDGET_GB budget or over an exhaustive-search bound).
"""
from __future__ import annotations

import csv
import json
import sys
from pathlib import Path

import click
import numpy as np

from . import analysis, compiler, errdetect, minfind, schedules, simulator, solvers, sweep
from .core import (
    EnergyTable,
    SpinSequence,
    autocorrelations,
    build_energy_table,
    enumerate_terms,
    merit_factor,
    save_energy_table,
    save_table_summary,
    sidelobe_energy,
    table_summary,
)
from .errors import ResourceLimitError

RESOURCE_EXIT = 3


@click.group()
@click.option("--seed", default=0, show_default=True, help="Global seed; all cell seeds derive from it.")
@click.option("--workers", default=1, show_default=True, help="Worker threads for sweeps.")
@click.option("--out", default=".", show_default=True, help="Output directory.")
@click.pass_context
def main(ctx, seed, workers, out):
    """LABS toolkit: energies, QAOA simulation, schedules, solvers, compilation."""
    ctx.ensure_object(dict)
    ctx.obj.update(seed=seed, workers=workers, out=Path(out))


def _parse_sequence(seq: str | None, hexstr: str | None, n: int | None) -> SpinSequence:
    if (seq is None) == (hexstr is None):
        raise click.UsageError("provide exactly one of --seq or --hex")
    if seq is not None:
        s = SpinSequence.from_string(seq)
    else:
        if n is None:
            raise click.UsageError("--hex requires --n")
        s = SpinSequence.from_index(int(hexstr, 16), n)
    if n is not None and s.n != n:
        raise click.UsageError(f"sequence length {s.n} does not match --n {n}")
    return s


@main.command()
@click.option("--n", type=int, default=None, help="Sequence length (required with --hex).")
@click.option("--seq", default=None, help="'+-' string, position 1 first.")
@click.option("--hex", "hexstr", default=None, help="Bitstring index in hex (bit 0 = position 1, bit 0 -> spin +1).")
@click.pass_context
def energy(ctx, n, seq, hexstr):
    """Sidelobe energy and merit factor of one sequence."""
    s = _parse_sequence(seq, hexstr, n)
    e = sidelobe_energy(s)
    f = merit_factor(s)
    click.echo(f"N={s.n} seq={s.to_string()} index={s.to_index():#x}")
    click.echo(f"E={e} F={f}")
    click.echo(f"autocorrelations={autocorrelations(s).tolist()}")


@main.command()
@click.option("--n", type=int, required=True)
@click.option("--parallel/--no-parallel", default=False, show_default=True)
@click.pass_context
def table(ctx, n, parallel):
    """Exhaustive energy table: binary table plus JSON summary."""
    out = ctx.obj["out"]
    out.mkdir(parents=True, exist_ok=True)
    t = build_energy_table(n, parallel=parallel, workers=ctx.obj["workers"])
    bin_path = out / f"energy_table_{n}.labs"
    save_energy_table(t, bin_path)
    save_table_summary(t, out / f"energy_table_{n}.json")
    sweep.write_manifest(out, "table", {"n": n, "parallel": parallel})
    click.echo(f"min_energy={t.min_energy} optimal_count={t.degeneracy} -> {bin_path}")


@main.command()
@click.option("--n", type=int, required=True)
@click.pass_context
def optimal(ctx, n):
    """Ground-truth optimum via exhaustive search over a symmetry domain."""
    min_e, opts = solvers.optimal_set(n)
    hex_width = (n + 3) // 4
    doc = {
        "N": n,
        "min_energy": min_e,
        "optimal_merit_factor": n * n / (2.0 * min_e),
        "optimal_count": len(opts),
        "optimal_bitstrings_hex": [f"{x:0{hex_width}x}" for x in opts],
    }
    click.echo(json.dumps(doc, indent=2))


def _schedule_for(params_path: str, n: int, gamma_convention: str) -> schedules.Schedule:
    loaded = schedules.load_params_file(params_path)
    if loaded["kind"] == "fixed":
        sched = schedules.instantiate_fixed(loaded["value"], n)
    else:
        sched = loaded["value"]
    if gamma_convention == "energy":
        # e^{-i*gamma*E} equals e^{-i*(2 gamma)*H_C} up to a global phase
        sched = schedules.Schedule(sched.betas, 2.0 * sched.gammas, sched.provenance)
    return sched


@main.command()
@click.option("--n", type=int, required=True)
@click.option("--p", type=int, default=None, help="Depth; default = full schedule depth.")
@click.option("--params", "params_path", required=True, type=click.Path(exists=True))
@click.option("--gamma-convention", type=click.Choice(["hc", "energy"]), default="hc",
              show_default=True, help="Convention the schedule's gammas were optimized in.")
@click.pass_context
def qaoa(ctx, n, p, params_path, gamma_convention):
    """Exact QAOA simulation; emits the result JSON."""
    sched = _schedule_for(params_path, n, gamma_convention)
    if p is not None:
        if p > sched.p:
            raise click.UsageError(f"--p {p} exceeds schedule depth {sched.p}")
        sched = schedules.Schedule(sched.betas[:p], sched.gammas[:p], sched.provenance)
    inst = enumerate_terms(n)
    t = build_energy_table(n)
    res = simulator.run_qaoa(inst, sched, t)
    out = ctx.obj["out"]
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"qaoa_n{n}_p{sched.p}.json"
    res.save(path)
    sweep.write_manifest(out, "qaoa", {"n": n, "p": sched.p, "params": str(params_path),
                                       "gamma_convention": gamma_convention})
    click.echo(f"p_opt={res.p_opt:.6e} tts={res.tts:.6e} mf={res.expected_merit_factor:.6f} -> {path}")


@main.command()
@click.option("--n", type=int, required=True)
@click.option("--p-max", type=int, default=1, show_default=True)
@click.option("--objective", type=click.Choice(["mf", "p_opt"]), default="mf", show_default=True)
@click.option("--restarts", type=int, default=400, show_default=True, help="p=1 multistart count.")
@click.pass_context
def optimize(ctx, n, p_max, objective, restarts):
    """Optimize QAOA parameters (p=1 multistart, then frequency-domain extension)."""
    inst = enumerate_terms(n)
    t = build_energy_table(n)
    ladder = schedules.fourier_ladder(
        inst, t, p_max, objective, seed=ctx.obj["seed"], p1_restarts=restarts
    )
    out = ctx.obj["out"]
    out.mkdir(parents=True, exist_ok=True)
    for p, _, sched, value in ladder:
        sched.save(out / f"schedule_n{n}_{objective}_p{p}.json")
        click.echo(f"p={p} objective={value:.8e}")
    sweep.write_manifest(out, "optimize", {
        "n": n, "p_max": p_max, "objective": objective,
        "restarts": restarts, "seed": ctx.obj["seed"],
    })


@main.command("fixed-params")
@click.argument("schedule_files", nargs=-1, required=True, type=click.Path(exists=True))
@click.option("--sizes", default=None, help="Comma-separated N per file (default: from provenance).")
@click.option("--output", "output", default="fixed_params.json", show_default=True)
@click.pass_context
def fixed_params(ctx, schedule_files, sizes, output):
    """Average optimized schedules into size-independent fixed parameters."""
    scheds = []
    size_list = [int(s) for s in sizes.split(",")] if sizes else None
    for i, f in enumerate(schedule_files):
        loaded = schedules.load_params_file(f)
        if loaded["kind"] != "schedule":
            raise click.UsageError(f"{f} is not a schedule file")
        sched = loaded["value"]
        if size_list:
            n_j = size_list[i]
        else:
            n_j = sched.provenance.get("N")
            if n_j is None:
                raise click.UsageError(f"{f} lacks provenance N; pass --sizes")
        scheds.append((int(n_j), sched))
    fp = schedules.make_fixed_params(scheds)
    path = ctx.obj["out"] / output
    path.parent.mkdir(parents=True, exist_ok=True)
    fp.save(path)
    click.echo(f"p={fp.p} M={fp.M} sources={fp.source_sizes} -> {path}")


@main.command()
@click.option("--n", type=int, required=True)
@click.option("--params", "params_path", default=None, type=click.Path(exists=True),
              help="Schedule to prepare the input distribution; omit for uniform (p=0).")
@click.option("--delta", type=float, default=0.1, show_default=True)
@click.option("--m-budget", default="auto", show_default=True,
              help="Budget parameter M; 'auto' = 1/sqrt(p_opt) of the input distribution.")
@click.option("--c", "c_const", type=float, default=1.0, show_default=True)
@click.option("--trials", type=int, default=500, show_default=True)
@click.pass_context
def qmf(ctx, n, params_path, delta, m_budget, c_const, trials):
    """Monte-Carlo the threshold-descent minimum finder."""
    t = build_energy_table(n)
    if params_path:
        sched = _schedule_for(params_path, n, "hc")
        res, state = simulator.run_qaoa(enumerate_terms(n), sched, t, return_state=True)
        probs = state.probabilities()
        p_opt = res.p_opt
        p = res.p
    else:
        probs = np.full(1 << n, 2.0 ** (-n))
        p_opt = t.p0
        p = 0
    M = 1.0 / np.sqrt(p_opt) if m_budget == "auto" else float(m_budget)
    run = minfind.QmfRun(delta=delta, M=M, C=c_const, trials=trials, seed=ctx.obj["seed"])
    outcome = minfind.simulate_qmf(probs, t, run)
    out = ctx.obj["out"]
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"qmf_n{n}_p{p}.json"
    outcome.save(path, p=p)
    sweep.write_manifest(out, "qmf", {"n": n, "p": p, "delta": delta, "M": M,
                                      "C": c_const, "trials": trials, "seed": ctx.obj["seed"]})
    click.echo(
        f"success_rate={outcome.success_rate:.4f} mean_queries={outcome.mean_queries:.1f} "
        f"budget={outcome.budget} tts={minfind.qmf_tts(p_opt):.4g} "
        f"tts_scaled={minfind.qmf_tts_with_prefactor(p_opt, n, c_const):.4g} -> {path}"
    )


@main.command()
@click.option("--p0", type=float, default=None, help="Initial success probability.")
@click.option("--n", type=int, default=None, help="Derive p0 from the actual optimum count at N.")
@click.option("--max-steps", type=int, default=12, show_default=True)
@click.pass_context
def aa(ctx, p0, n, max_steps):
    """Amplitude-amplification success curve and per-step gains."""
    if (p0 is None) == (n is None):
        raise click.UsageError("provide exactly one of --p0 or --n")
    if n is not None:
        t = build_energy_table(n)
        p0 = t.p0
    rows = [{"step": 0, "success": p0, "gain": None}]
    gains = minfind.aa_gain_curve(p0, max_steps)
    for s in range(1, max_steps + 1):
        rows.append({
            "step": s,
            "success": minfind.aa_success_probability(p0, s),
            "gain": float(gains[s - 1]),
        })
    click.echo(json.dumps({"p0": p0, "steps": rows}, indent=2))


@main.command()
@click.option("--n", type=int, required=True)
@click.option("--solver", "kind", type=click.Choice(["exhaustive", "tabu", "memetic_tabu"]),
              default="exhaustive", show_default=True)
@click.option("--budget", type=int, default=10**8, show_default=True)
@click.option("--target", default="auto", show_default=True,
              help="Stop energy: integer, 'auto' (exhaustive optimum), or 'none'.")
@click.pass_context
def solve(ctx, n, kind, budget, target):
    """Run one solver instance."""
    target_energy = None
    if target == "auto" and kind != "exhaustive":
        target_energy = solvers.solve_exhaustive(
            n, solvers.SolverConfig(kind="exhaustive", restrict_domain=True)
        ).best_energy
    elif target not in ("auto", "none"):
        target_energy = int(target)
    cfg = solvers.SolverConfig(kind=kind, seed=ctx.obj["seed"], budget=budget,
                               target_energy=target_energy)
    res = solvers.solve(n, cfg)
    click.echo(json.dumps(res.to_json_dict(), indent=2))


@main.command("tts-sweep")
@click.option("--solver", "kind", type=click.Choice(["tabu", "memetic_tabu", "exhaustive"]),
              default="memetic_tabu", show_default=True)
@click.option("--n-min", type=int, required=True)
@click.option("--n-max", type=int, required=True)
@click.option("--seeds", type=int, default=50, show_default=True)
@click.option("--budget", type=int, default=10**8, show_default=True)
@click.pass_context
def tts_sweep(ctx, kind, n_min, n_max, seeds, budget):
    """Time-to-solution sweep over (N, seed) cells; canonical CSV output.

    Resumable: cells already present in the output CSV are skipped."""
    out = ctx.obj["out"]
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / f"tts_{kind}.csv"
    done = {}
    if csv_path.exists():
        with open(csv_path) as fh:
            for row in csv.DictReader(fh):
                done[(int(row["N"]), int(row["seed"]))] = row
    targets = {
        N: solvers.solve_exhaustive(
            N, solvers.SolverConfig(kind="exhaustive", restrict_domain=True)
        ).best_energy
        for N in range(n_min, n_max + 1)
    }
    cells = [
        (N, s)
        for N in range(n_min, n_max + 1)
        for s in range(seeds)
        if (N, s) not in done
    ]

    def run_cell(cell):
        N, s = cell
        cfg = solvers.SolverConfig(
            kind=kind,
            seed=sweep.derive_seed(ctx.obj["seed"], N, 0, s),
            target_energy=targets[N],
            budget=budget,
        )
        res = solvers.solve(N, cfg)
        return solvers.TtsRow(
            N=N,
            seed=s,
            evaluations_to_best=res.evaluations_to_best if res.hit_target else res.evaluations_total,
            hit_target=res.hit_target,
            wall_ms=res.wall_time * 1e3,
        )

    outcome = sweep.run_cells(cells, run_cell, workers=ctx.obj["workers"])
    rows = list(outcome["results"].values())
    for key, old in done.items():
        rows.append(solvers.TtsRow(
            N=key[0], seed=key[1],
            evaluations_to_best=int(old["evaluations_to_best"]),
            hit_target=bool(int(old["hit_target"])),
            wall_ms=float(old["wall_ms"]),
        ))
    config = {
        "solver": kind, "n_min": n_min, "n_max": n_max, "seeds": seeds,
        "budget": budget, "global_seed": ctx.obj["seed"],
        "seed_derivation": "SeedSequence([global_seed, N, 0, seed_index])",
    }
    solvers.write_tts_csv(rows, csv_path, sidecar_config=config)
    sweep.write_manifest(out, "tts-sweep", config)
    if outcome["failures"]:
        click.echo(f"failed cells: {sorted(outcome['failures'])}", err=True)
    click.echo(f"{len(rows)} rows -> {csv_path}")


@main.command()
@click.option("--input", "input_path", required=True, type=click.Path(exists=True))
@click.option("--nmin", type=int, default=0, show_default=True)
@click.pass_context
def fit(ctx, input_path, nmin):
    """Exponential scaling fit from a TTS CSV (mean over hitting seeds per N)."""
    rows = []
    with open(input_path) as fh:
        for row in csv.DictReader(fh):
            rows.append(solvers.TtsRow(
                N=int(row["N"]), seed=int(row["seed"]),
                evaluations_to_best=int(row["evaluations_to_best"]),
                hit_target=bool(int(row["hit_target"])),
                wall_ms=float(row["wall_ms"]),
            ))
    misses = [(r.N, r.seed) for r in rows if not r.hit_target]
    if misses:
        click.echo(f"warning: {len(misses)} non-hitting cells excluded: {misses}", err=True)
    points = solvers.mean_tts_by_size(rows)
    result = analysis.fit_exponential(points, nmin)
    click.echo(json.dumps(result.to_json_dict(), indent=2))


@main.command()
@click.option("--n", type=int, required=True)
@click.pass_context
def correlate(ctx, n):
    """Pearson correlation of Hamming distance to the optimum vs energy."""
    t = build_energy_table(n)
    r = analysis.hamming_objective_correlation(t)
    click.echo(json.dumps({"N": n, "pearson_r": r}, indent=2))


@main.command("compile")
@click.option("--n", type=int, required=True)
@click.option("--gamma", type=float, default=0.1, show_default=True)
@click.option("--ordering", type=click.Choice(["greedy", "random"]), default="greedy",
              show_default=True)
@click.pass_context
def compile_cmd(ctx, n, gamma, ordering):
    """Compile the phase operator to a two-qubit gate list (JSON)."""
    inst = enumerate_terms(n)
    circ = compiler.compile_phase(inst, gamma, seed=ctx.obj["seed"], ordering=ordering)
    out = ctx.obj["out"]
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"circuit_n{n}_{ordering}.json"
    circ.save(path)
    sweep.write_manifest(out, "compile", {"n": n, "gamma": gamma, "ordering": ordering,
                                          "seed": ctx.obj["seed"]})
    click.echo(f"two_qubit_count={circ.two_qubit_count()} gates={len(circ.gates)} -> {path}")


@main.command("gate-count")
@click.option("--n-min", type=int, required=True)
@click.option("--n-max", type=int, required=True)
@click.option("--seeds", type=int, default=20, show_default=True)
@click.pass_context
def gate_count(ctx, n_min, n_max, seeds):
    """Greedy-vs-random two-qubit count comparison per size; CSV + summary."""
    out = ctx.obj["out"]
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / "gate_counts.csv"
    summary = []
    with open(csv_path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["N", "seed", "ordering", "two_qubit_count"])
        for N in range(n_min, n_max + 1):
            inst = enumerate_terms(N)
            rep = compiler.count_report(inst, seeds=seeds)
            summary.append(rep)
            for s in range(seeds):
                w.writerow([N, s, "greedy",
                            compiler.compile_phase(inst, 0.1, seed=s).two_qubit_count()])
                w.writerow([N, s, "random",
                            compiler.compile_phase(inst, 0.1, seed=s, ordering="random").two_qubit_count()])
    with open(out / "gate_counts_summary.json", "w") as fh:
        json.dump(summary, fh, indent=2)
        fh.write("\n")
    sweep.write_manifest(out, "gate-count", {"n_min": n_min, "n_max": n_max, "seeds": seeds})
    for rep in summary:
        click.echo(f"N={rep['N']} greedy={rep['greedy_count']:.1f} "
                   f"random={rep['random_mean']:.1f} ratio={rep['reduction_ratio']:.2f}")


@main.command()
@click.option("--n", type=int, required=True)
@click.option("--gamma", type=float, default=0.1, show_default=True)
@click.option("--m", "m_splits", type=int, default=3, show_default=True)
@click.pass_context
def checks(ctx, n, gamma, m_splits):
    """Insert parity checks into a compiled phase circuit."""
    inst = enumerate_terms(n)
    circ = compiler.compile_phase(inst, gamma, seed=ctx.obj["seed"])
    ck = errdetect.insert_checks(circ, m_splits)
    out = ctx.obj["out"]
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"checked_n{n}_m{ck.m}.json"
    ck.save(path)
    sweep.write_manifest(out, "checks", {"n": n, "gamma": gamma, "m": m_splits,
                                         "seed": ctx.obj["seed"]})
    click.echo(f"m={ck.m} split_two_qubit_counts={ck.split_two_qubit_counts} -> {path}")


@main.command("noisy-sim")
@click.option("--n", type=int, required=True)
@click.option("--m", "m_splits", type=int, default=3, show_default=True)
@click.option("--p2", type=float, default=2e-3, show_default=True)
@click.option("--shots", type=int, default=1000, show_default=True)
@click.option("--params", "params_path", default=None, type=click.Path(exists=True),
              help="p=1 schedule file; overrides --beta/--gamma.")
@click.option("--beta", type=float, default=None)
@click.option("--gamma", type=float, default=None)
@click.option("--noisy-checks/--noiseless-checks", default=False, show_default=True)
@click.option("--shot-csv/--no-shot-csv", default=False, show_default=True,
              help="Also write one CSV row per shot (bitstring hex, kept, syndromes).")
@click.pass_context
def noisy_sim(ctx, n, m_splits, p2, shots, params_path, beta, gamma, noisy_checks,
              shot_csv):
    """Trajectory simulation of a checked p=1 circuit with post-selection stats."""
    if params_path:
        sched = _schedule_for(params_path, n, "hc")
        beta = float(sched.betas[0])
        gamma = float(sched.gammas[0])
    if beta is None or gamma is None:
        raise click.UsageError("provide --params or both --beta and --gamma")
    inst = enumerate_terms(n)
    t = build_energy_table(n)
    circ = compiler.compile_phase(inst, gamma, seed=ctx.obj["seed"])
    ck = errdetect.insert_checks(circ, m_splits)
    noise = errdetect.NoiseModel(p2=p2, seed=ctx.obj["seed"])
    shot_log = [] if shot_csv else None
    stats = errdetect.simulate_noisy(ck, noise, shots, t, beta=beta,
                                     noisy_checks=noisy_checks, shot_log=shot_log)
    out = ctx.obj["out"]
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"noisy_n{n}_m{ck.m}.json"
    stats.save(path)
    if shot_log is not None:
        with open(out / f"noisy_n{n}_m{ck.m}_shots.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["bitstring_hex", "kept", "syndromes"])
            w.writerows(shot_log)
    sweep.write_manifest(out, "noisy-sim", {
        "n": n, "m": m_splits, "p2": p2, "shots": shots, "beta": beta, "gamma": gamma,
        "noisy_checks": noisy_checks, "seed": ctx.obj["seed"],
    })
    click.echo(f"ratio={stats.ratio:.4f} mf_all={stats.mf_all:.4f} mf_kept={stats.mf_kept:.4f} -> {path}")


@main.command("time-model")
@click.option("--t0", type=float, default=1.0, show_default=True)
@click.option("--p-list", required=True, help="Comma-separated per-segment no-error probabilities.")
@click.pass_context
def time_model(ctx, t0, p_list):
    """Average time to an error-free shot, without and with early stopping."""
    probs = [float(x) for x in p_list.split(",")]
    t1, t2 = errdetect.avg_time_models(t0, probs)
    click.echo(json.dumps({"t0": t0, "p_list": probs, "t1_bar": t1, "t2_bar": t2}, indent=2))


def run_main() -> int:
    try:
        main(standalone_mode=False)
    except click.UsageError as exc:
        click.echo(f"error: {exc.format_message()}", err=True)
        return 2
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.Abort:
        return 130
    except ResourceLimitError as exc:
        click.echo(f"resource advisory: {exc}", err=True)
        return RESOURCE_EXIT
    return 0


if __name__ == "__main__":
    sys.exit(run_main())
