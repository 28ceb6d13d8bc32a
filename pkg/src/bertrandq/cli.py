"""Command-line surface: run, sweep, analyze, note, verify."""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import harness, io, market, metrics, note_lab
from .config import RunConfig, parse_config


def _load_config(path: str | None) -> RunConfig:
    if path is None:
        return RunConfig(session=harness.SessionConfig(), sessions=1000)
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise ValueError(f"cannot read config {path}: {e}") from None
    return parse_config(text)


def cmd_run(args) -> int:
    rc = _load_config(args.config)
    cfg = rc.session
    if args.desk_scale:
        cfg = harness.desk_scale(cfg)
    sessions = args.sessions or rc.sessions
    seed = args.seed if args.seed is not None else cfg.seed
    summary = harness.run_experiment(
        cfg, sessions, master_seed=seed, parallel=args.parallel
    )
    io.emit_results({"run": summary}, args.out, seed, run_config=rc)
    em = metrics.summarize(summary)
    print(
        f"{sessions} sessions, {em.n_unconverged} unconverged, "
        f"mean CI {em.mean_ci:.4f} -> {args.out}"
    )
    return 0


def cmd_sweep(args) -> int:
    seed = args.seed if args.seed is not None else 0
    results = harness.sweep(
        args.preset,
        master_seed=seed,
        sessions=args.sessions,
        desk=args.desk_scale,
        parallel=args.parallel,
    )
    out = Path(args.out)
    io.emit_results(results, out, seed)
    for label, summary in results.items():
        em = metrics.summarize(summary)
        print(f"{label}: mean CI {em.mean_ci:.4f} ({em.n_unconverged} unconverged)")
    return 0


def cmd_analyze(args) -> int:
    stale = io.verify_digests(args.out)
    stale = [s for s in stale if s not in ("correlations.csv", "welfare.csv")]
    if stale:
        print(f"digest mismatch: {stale}", file=sys.stderr)
        return 1
    recomputed = io.analyze(args.out)
    for label, vals in recomputed.items():
        w = vals["welfare"]
        print(
            f"{label}: profit {w.industry_profit:.6g}, surplus "
            f"{w.consumer_surplus:.6g}, welfare {w.social_welfare:.6g}"
        )
    return 0


def cmd_note(args) -> int:
    rc = _load_config(args.config)
    cfg = rc.session
    if cfg.environment != "note":
        cfg = replace(harness.NOTE_BASE, seed=cfg.seed)
    if args.desk_scale:
        cfg = harness.desk_scale(cfg)
    if args.trace_sessions > 0:
        cfg = replace(cfg, trace=True)
    sessions = args.sessions or min(rc.sessions, 100)
    seed = args.seed if args.seed is not None else cfg.seed
    env = harness.build_environment(cfg)
    outcomes = []
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for i in range(sessions):
        scfg = cfg if i < args.trace_sessions else replace(cfg, trace=False)
        o = harness.run_session(scfg, i, seed, env=harness.build_environment(scfg))
        outcomes.append(o)
        if o.trace is not None:
            io.write_trace(out / f"trace_note_{i}.csv", o.trace, cfg.delta)
            events = note_lab.detect_events(
                o.trace, cfg.delta, float(env.grid_objs[0][0].prices[0])
            )
            io.write_events(out / f"events_note_{i}.csv", events)
    summary = harness.ExperimentSummary(
        cfg=cfg, master_seed=seed, outcomes=outcomes, benchmarks=env.benchmarks,
        env=env,
    )
    io.emit_results({"note": summary}, out, seed)
    em = metrics.summarize(summary)
    print(
        f"note: {sessions} sessions, mean CI {em.mean_ci:.4f}, "
        f"{em.n_unconverged} unconverged -> {out}"
    )
    return 0


def cmd_verify(args) -> int:
    rc = _load_config(args.config)
    cfg = rc.session
    ks = cfg.k if cfg.environment == "main" and cfg.fixed_state is None else (1, 1)
    space = market.StateSpace()
    structure = market.make_structure(space, ks)
    grids = [
        market.grids_for(p, space, cfg.l) for p in structure.partitions
    ]
    bench = market.benchmark_profits(structure, grids)
    print(f"structure k={tuple(ks)}, l={cfg.l}")
    print(f"pi^N = {float(bench.pi_n)!r}")
    print(f"pi^M = {float(bench.pi_m)!r}")
    for s in range(len(bench.per_signal_n)):
        print(
            f"signal {s}: pi^N(s) = {float(bench.per_signal_n[s])!r}, "
            f"pi^M(s) = {float(bench.per_signal_m[s])!r}"
        )
    verdict = market.verify_bne(
        structure, grids, market.nash_strategy(structure, grids)
    )
    if verdict.is_equilibrium:
        print("all-p^N profile: no profitable deviation on the grid")
        return 0
    print("all-p^N profile: profitable deviations found:")
    for d in verdict.deviations:
        print(
            f"  firm {d.firm} signal {d.signal}: {float(d.from_price)!r} -> "
            f"{float(d.to_price)!r} (+{float(d.gain)!r})"
        )
    return 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="bertrandq",
        description="Bertrand competition among tabular Q-learning agents",
    )
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, out_required=True):
        sp.add_argument("--config", help="JSON config file")
        sp.add_argument("--out", required=out_required, help="output directory")
        sp.add_argument("--seed", type=int, help="master seed")
        sp.add_argument("--sessions", type=int, help="sessions per experiment")
        sp.add_argument("--parallel", type=int, default=1)
        sp.add_argument(
            "--desk-scale",
            action="store_true",
            help="apply scaled-down defaults (l=20, nu=100, 2e7 period cap)",
        )

    sp = sub.add_parser("run", help="run one experiment from a config file")
    common(sp)
    sp.set_defaults(func=cmd_run)

    sp = sub.add_parser("sweep", help="run a named sweep preset")
    common(sp)
    sp.add_argument("--preset", required=True)
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("analyze", help="recompute metrics from stored results")
    sp.add_argument("--out", required=True, help="results directory")
    sp.set_defaults(func=cmd_analyze)

    sp = sub.add_parser("note", help="single-state diagnostic sessions")
    common(sp)
    sp.add_argument(
        "--trace-sessions",
        type=int,
        default=0,
        help="emit trace/event CSVs for the first N sessions",
    )
    sp.set_defaults(func=cmd_note)

    sp = sub.add_parser("verify", help="print benchmarks and check the BNE")
    sp.add_argument("--config", help="JSON config file")
    sp.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
