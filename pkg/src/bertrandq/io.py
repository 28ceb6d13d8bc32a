"""Result persistence: CSV tables, the run manifest, and re-analysis.

All files are UTF-8, CSVs use RFC-style quoting via the csv module, and
numbers are written in shortest round-trip form (repr). Timestamps live only
in the manifest so repeated runs with the same seed are byte-identical.
"""

from __future__ import annotations

import csv
import hashlib
import json
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__, metrics
from .config import RunConfig, config_to_dict
from .harness import ExperimentSummary, build_environment
from .note_lab import TraceEvent, stationary_line, sustainable_line

SCHEMA_VERSION = 1


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (float, np.floating)):
        if np.isnan(x):
            return ""
        return repr(float(x))
    return str(x)


def _write_csv(path: Path, header: list[str], rows) -> None:
    try:
        with open(path, "w", newline="", encoding="utf-8") as f:
            w = csv.writer(f)
            w.writerow(header)
            for row in rows:
                w.writerow([_fmt(x) for x in row])
    except OSError as e:
        raise OSError(f"failed writing {path}: {e}") from e


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def emit_results(
    results: dict[str, ExperimentSummary],
    directory,
    master_seed: int,
    run_config: RunConfig | None = None,
    include_unconverged: bool = True,
) -> dict[str, str]:
    """Write the full results table set plus a digest manifest.

    Returns the file -> sha256 inventory that the manifest records.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)

    sess_rows, sig_rows, state_rows, corr_rows, welf_rows = [], [], [], [], []
    for label, summary in results.items():
        bench = summary.benchmarks
        em = metrics.summarize(summary, include_unconverged=include_unconverged)
        for j, o in enumerate(summary.outcomes):
            ext = em.extremes[j]
            sess_rows.append(
                [
                    label,
                    o.session_index,
                    o.converged,
                    o.periods,
                    em.profits[j, 0],
                    em.profits[j, 1],
                    float(em.profits[j].sum()),
                    em.ci[j],
                    ext[0, 0],
                    ext[0, 1],
                    ext[1, 0],
                    ext[1, 1],
                ]
            )
            for s in range(em.ci_per_signal.shape[1]):
                sig_rows.append(
                    [
                        label,
                        o.session_index,
                        s,
                        o.scored.ref_signal_profit[s],
                        bench.per_signal_n[s],
                        bench.per_signal_m[s],
                        em.ci_per_signal[j, s],
                    ]
                )
            for w, wtp in enumerate(summary.env.values):
                state_rows.append(
                    [
                        label,
                        o.session_index,
                        float(wtp),
                        o.scored.state_profit[w],
                        o.scored.state_surplus[w],
                        o.scored.sale_prob[w],
                        o.scored.shares[0, w],
                        o.scored.shares[1, w],
                        em.ci_per_state[j, w],
                    ]
                )
        k_ref = em.correlation.shape[0]
        for i in range(k_ref):
            for j2 in range(k_ref):
                corr_rows.append([label, i, j2, em.correlation[i, j2]])
        welf_rows.append(
            [
                label,
                em.welfare.industry_profit,
                em.welfare.consumer_surplus,
                em.welfare.social_welfare,
            ]
        )

    _write_csv(
        directory / "sessions.csv",
        [
            "experiment",
            "session",
            "converged",
            "periods",
            "profit_0",
            "profit_1",
            "total_profit",
            "ci",
            "max_price_0",
            "min_price_0",
            "max_price_1",
            "min_price_1",
        ],
        sess_rows,
    )
    _write_csv(
        directory / "per_signal.csv",
        ["experiment", "session", "signal", "mean_profit", "pi_n", "pi_m", "ci"],
        sig_rows,
    )
    _write_csv(
        directory / "per_state.csv",
        [
            "experiment",
            "session",
            "wtp",
            "total_profit",
            "surplus",
            "sale_prob",
            "share_0",
            "share_1",
            "ci",
        ],
        state_rows,
    )
    _write_csv(
        directory / "correlations.csv",
        ["experiment", "signal_i", "signal_j", "rho"],
        corr_rows,
    )
    _write_csv(
        directory / "welfare.csv",
        ["experiment", "industry_profit", "consumer_surplus", "social_welfare"],
        welf_rows,
    )

    for label, summary in results.items():
        for o in summary.outcomes:
            if o.trace is not None:
                write_trace(
                    directory / f"trace_{_slug(label)}_{o.session_index}.csv",
                    o.trace,
                    summary.cfg.delta,
                )

    inventory = {
        p.name: _sha256(p)
        for p in sorted(directory.iterdir())
        if p.suffix == ".csv"
    }
    manifest = {
        "schema_version": SCHEMA_VERSION,
        "engine_version": __version__,
        "master_seed": master_seed,
        "created_at": datetime.now(timezone.utc).isoformat(),
        "run_config": config_to_dict(run_config) if run_config else None,
        "experiments": [
            {
                "label": label,
                "master_seed": summary.master_seed,
                "config": config_to_dict(
                    RunConfig(session=summary.cfg, sessions=summary.n_sessions)
                ),
            }
            for label, summary in results.items()
        ],
        "files": inventory,
    }
    with open(directory / "manifest.json", "w", encoding="utf-8") as f:
        json.dump(manifest, f, indent=2, sort_keys=True)
        f.write("\n")
    return inventory


def _slug(label: str) -> str:
    return "".join(c if c.isalnum() or c in "-._" else "_" for c in label)


def write_trace(path, trace, delta: float) -> None:
    rows = []
    for r in range(len(trace.periods)):
        for i in range(trace.chosen_price.shape[1]):
            q = trace.max_q[r, i]
            rows.append(
                [
                    int(trace.periods[r]),
                    i,
                    trace.chosen_price[r, i],
                    trace.greedy_price[r, i],
                    q,
                    sustainable_line(q, delta),
                    stationary_line(q, delta),
                ]
            )
    _write_csv(
        Path(path),
        [
            "period",
            "firm",
            "chosenPrice",
            "greedyPrice",
            "maxQ",
            "sustainableLine",
            "stationaryLine",
        ],
        rows,
    )


def write_events(path, events: list[TraceEvent]) -> None:
    _write_csv(
        Path(path),
        ["period", "eventType", "firm", "detail"],
        [[e.period, e.event_type, e.firm, e.detail] for e in events],
    )


def load_manifest(directory) -> dict:
    path = Path(directory) / "manifest.json"
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except OSError as e:
        raise OSError(f"failed reading {path}: {e}") from e


def verify_digests(directory) -> list[str]:
    """Names of files whose digest no longer matches the manifest."""
    directory = Path(directory)
    manifest = load_manifest(directory)
    return [
        name
        for name, digest in manifest["files"].items()
        if not (directory / name).exists() or _sha256(directory / name) != digest
    ]


def analyze(directory) -> dict:
    """Recompute aggregate tables from the stored per-session rows.

    Rewrites correlations.csv and welfare.csv from per_signal.csv and
    per_state.csv; a rerun over an untouched directory is byte-idempotent.
    """
    from .config import parse_config_dict

    directory = Path(directory)
    manifest = load_manifest(directory)

    per_signal: dict[str, dict[int, dict[int, float]]] = {}
    with open(directory / "per_signal.csv", newline="", encoding="utf-8") as f:
        for row in csv.DictReader(f):
            exp = per_signal.setdefault(row["experiment"], {})
            exp.setdefault(int(row["session"]), {})[int(row["signal"])] = float(
                row["ci"]
            )

    per_state: dict[str, dict[int, dict[float, tuple[float, float]]]] = {}
    with open(directory / "per_state.csv", newline="", encoding="utf-8") as f:
        for row in csv.DictReader(f):
            exp = per_state.setdefault(row["experiment"], {})
            exp.setdefault(int(row["session"]), {})[float(row["wtp"])] = (
                float(row["total_profit"]),
                float(row["surplus"]),
            )

    corr_rows, welf_rows = [], []
    recomputed = {}
    for entry in manifest["experiments"]:
        label = entry["label"]
        cfg = parse_config_dict(entry["config"]).session
        env = build_environment(cfg)
        prior = env.prior
        values = [float(v) for v in env.values]

        sessions = sorted(per_signal[label])
        sig_ci = np.array(
            [
                [per_signal[label][s][g] for g in sorted(per_signal[label][s])]
                for s in sessions
            ]
        )
        corr = (
            metrics.pearson_matrix(sig_ci)
            if len(sessions) >= 2
            else np.full((sig_ci.shape[1],) * 2, np.nan)
        )
        for i in range(corr.shape[0]):
            for j in range(corr.shape[1]):
                corr_rows.append([label, i, j, corr[i, j]])

        profits, surpluses = [], []
        for s in sessions:
            by_w = per_state[label][s]
            profits.append(float(prior @ np.array([by_w[v][0] for v in values])))
            surpluses.append(float(prior @ np.array([by_w[v][1] for v in values])))
        ip = float(np.mean(profits))
        cs = float(np.mean(surpluses))
        welf_rows.append([label, ip, cs, ip + cs])
        recomputed[label] = {
            "correlation": corr,
            "welfare": metrics.WelfareReport(ip, cs, ip + cs),
        }

    _write_csv(
        directory / "correlations.csv",
        ["experiment", "signal_i", "signal_j", "rho"],
        corr_rows,
    )
    _write_csv(
        directory / "welfare.csv",
        ["experiment", "industry_profit", "consumer_surplus", "social_welfare"],
        welf_rows,
    )
    return recomputed
