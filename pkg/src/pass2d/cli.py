"""Command-line front end: run sweeps, query the oracle, plot, self-validate."""

from __future__ import annotations

import argparse
import sys
import time

import numpy as np


def _cmd_run(args) -> int:
    import dataclasses

    from . import experiments

    config = experiments.load_config(args.config)
    overrides = {}
    if args.seed is not None:
        overrides["master_seed"] = args.seed
    if args.realizations is not None:
        overrides["realizations"] = args.realizations
    if args.schemes is not None:
        overrides["schemes"] = [s.strip() for s in args.schemes.split(",") if s.strip()]
    config = dataclasses.replace(config, **overrides)  # re-validates
    jobs = args.jobs if args.jobs is not None else config.jobs

    t0 = time.perf_counter()
    records = experiments.run_experiment(config, jobs=jobs)
    rows = experiments.aggregate(records)
    raw_path, agg_path = experiments.emit_csv(records, rows, args.output)
    elapsed = time.perf_counter() - t0

    print(f"sweep {config.sweep_name} over {config.sweep_values} "
          f"x {config.realizations} realizations ({elapsed:.1f} s)")
    for row in rows:
        print(f"  {row.scheme:12s} {config.sweep_name}={row.sweep_value:<8g} "
              f"mean {row.mean_db:7.2f} dB  (stderr {row.stderr_db:.3f}, n={row.n})")
    print(f"wrote {raw_path}")
    print(f"wrote {agg_path}")
    return 0


def _cmd_oracle(args) -> int:
    from . import discrete

    inst = discrete.load_instance(args.instance)
    selection, mu = discrete.brute_force_select(
        inst.table, inst.conflicts, inst.num_selected, inst.scenario, budget=args.budget)
    idx = selection.indices()
    print(f"optimal selection ({inst.num_selected} of {inst.table.gains.shape[1]} candidates)")
    print(f"  indices: {idx.tolist()}")
    for g in idx:
        x, y, z = inst.table.grid.points[g]
        print(f"    candidate {g}: ({x:.3f}, {y:.3f}, {z:.3f})")
    print(f"  min SNR: {mu:.6g} linear = {10 * np.log10(mu):.3f} dB")
    return 0


def _cmd_plot(args) -> int:
    from . import experiments

    rows = experiments.read_aggregates_csv(args.aggregates)
    path = experiments.emit_plot(rows, args.figure_id, args.output)
    print(f"wrote {path}")
    return 0


def _validation_checks(quick: bool):
    """Yield (name, ok, detail) for the invariant battery."""
    import math

    from . import benchmarks, channel, discrete, experiments, pso

    rng = np.random.default_rng(7)
    radio = channel.default_radio()

    # channel: unit-modulus phase factors
    n_draws = 1_000 if quick else 10_000
    worst = 0.0
    for _ in range(n_draws):
        ue = channel.Point3(*rng.uniform(-10, 10, 2), 0.0)
        pa = channel.Point3(*rng.uniform(-10, 10, 2), 3.0)
        feed = channel.Point3(-10.0, 0.0, 3.0)
        mod = abs(channel.phase_factor(ue, pa, feed, radio.lambda_c, radio.lambda_g))
        worst = max(worst, abs(mod - 1.0))
    yield "phase factor unit modulus", worst < 1e-12, f"max deviation {worst:.2e}"

    # channel: inverse-distance amplitude law
    base = channel.path_gain(channel.Point3(0, 0, 0), channel.Point3(0, 0, 1), radio.eta)
    devs = []
    for d in (1.0, 2.0, 5.0, 10.0, 50.0):
        g = channel.path_gain(channel.Point3(0, 0, 0), channel.Point3(0, 0, d), radio.eta)
        devs.append(abs(g * d - base) / base)
    yield "inverse-distance law", max(devs) < 1e-12, f"max rel dev {max(devs):.2e}"

    # channel: closed-form single-antenna SNR
    scen = channel.make_scenario([(0.0, 0.0)], side_length=20.0, height=3.0, radio=radio)
    config = channel.PaConfiguration.from_xy([[0.0, 0.0]], 3.0)
    got = channel.min_snr(config, scen)
    want = radio.tx_power_w * radio.eta / (9.0 * radio.noise_power_w)
    ok = abs(10 * math.log10(got) - 10 * math.log10(want)) < 0.01
    yield "single-antenna closed form", ok, f"{10 * math.log10(got):.3f} dB"

    # pso: monotone trace + bit-identical rerun
    scen4 = channel.make_scenario(rng.uniform(-8, 8, size=(3, 2)), radio=radio)
    params = pso.PsoParams(num_particles=30, max_iters=40, restarts=1, rng_seed=11)
    r1 = pso.optimize(scen4, 2, params)
    r2 = pso.optimize(scen4, 2, params)
    t = [f for _, f in r1.trace]
    ok = all(b >= a for a, b in zip(t, t[1:])) and r1.trace == r2.trace \
        and r1.config == r2.config
    yield "swarm monotone and reproducible", ok, f"{len(t)} trace points"

    # discrete: solver matches the oracle
    agree = True
    for trial in range(2 if quick else 4):
        trng = np.random.default_rng(100 + trial)
        scen_d = channel.make_scenario(trng.uniform(-5, 5, size=(3, 2)),
                                       side_length=12.0, radio=radio)
        grid = discrete.build_grid(12.0, 4, 3, 3.0)
        table = discrete.discrete_channel_table(grid, scen_d)
        conflicts = discrete.conflict_set(grid, scen_d.min_separation)
        model = discrete.build_milp(table, conflicts, 3, scen_d)
        res = discrete.solve_milp(model)
        _, mu_oracle = discrete.brute_force_select(table, conflicts, 3, scen_d)
        agree &= res.status == discrete.OPTIMAL
        agree &= abs(res.mu - mu_oracle) <= 1e-9 * max(1.0, abs(mu_oracle))
    yield "branch-and-bound matches oracle", agree, ""

    # discrete: product linking corners
    ok = all(
        [z for z in (0, 1) if discrete.MilpModel.mccormick_feasible(bi, bj, z)] == [bi * bj]
        for bi in (0, 1) for bj in (0, 1)
    )
    yield "pair-variable corner cases", ok, ""

    # experiments: CSV round trip
    recs = [experiments.ResultRecord("fpa", "power_dbm", 20.0, 0, 123.456, 20.91, 1.5, "ok")]
    rows = experiments.aggregate(recs)
    import tempfile

    with tempfile.TemporaryDirectory() as tmp:
        raw, agg = experiments.emit_csv(recs, rows, tmp)
        back = experiments.read_records_csv(raw)
        rows_back = experiments.read_aggregates_csv(agg)
    yield "csv round trip", back == recs and rows_back == rows, ""

    # benchmarks: registry completeness
    expected = {"pass2d-cont", "pass2d-disc", "con-pass", "fpa", "above-ues"}
    yield "scheme registry", set(benchmarks.SCHEMES) == expected, sorted(benchmarks.SCHEMES)


def _cmd_validate(args) -> int:
    failures = 0
    for name, ok, detail in _validation_checks(args.quick):
        mark = "PASS" if ok else "FAIL"
        suffix = f"  [{detail}]" if detail else ""
        print(f"{mark}  {name}{suffix}")
        failures += 0 if ok else 1
    if failures:
        print(f"{failures} check(s) failed")
        return 1
    print("all checks passed")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="pass2d",
        description="Planar pinching-antenna placement: sweeps, oracle, plots, self-checks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a config-driven Monte Carlo sweep")
    p_run.add_argument("config", help="INI experiment config")
    p_run.add_argument("--output", default="results", help="output directory for CSVs")
    p_run.add_argument("--seed", type=int, default=None, help="override master seed")
    p_run.add_argument("--realizations", type=int, default=None)
    p_run.add_argument("--schemes", default=None, help="comma-separated scheme ids")
    p_run.add_argument("--jobs", type=int, default=None,
                       help="parallel workers (does not change results)")
    p_run.set_defaults(func=_cmd_run)

    p_oracle = sub.add_parser("oracle", help="brute-force a dumped discrete instance")
    p_oracle.add_argument("instance", help="instance JSON produced by dump_instance")
    p_oracle.add_argument("--budget", type=int, default=10_000_000,
                          help="max subsets to enumerate")
    p_oracle.set_defaults(func=_cmd_oracle)

    p_plot = sub.add_parser("plot", help="plot an aggregates CSV")
    p_plot.add_argument("aggregates", help="aggregates.csv from a run")
    p_plot.add_argument("--figure-id", default="sweep", help="plot title")
    p_plot.add_argument("--output", default="sweep.png", help="image path")
    p_plot.set_defaults(func=_cmd_plot)

    p_val = sub.add_parser("validate", help="run the invariant self-check battery")
    p_val.add_argument("--quick", action="store_true", help="smaller sample sizes")
    p_val.set_defaults(func=_cmd_validate)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
