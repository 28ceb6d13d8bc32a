"""Documented CSV schemas: one input table (or file family) per figure kind."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import pandas as pd

SESSIONS = [
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
]
PER_SIGNAL = ["experiment", "session", "signal", "mean_profit", "pi_n", "pi_m", "ci"]
PER_STATE = [
    "experiment",
    "session",
    "wtp",
    "total_profit",
    "surplus",
    "sale_prob",
    "share_0",
    "share_1",
    "ci",
]
CORRELATIONS = ["experiment", "signal_i", "signal_j", "rho"]
WELFARE = ["experiment", "industry_profit", "consumer_surplus", "social_welfare"]
TRACE = [
    "period",
    "firm",
    "chosenPrice",
    "greedyPrice",
    "maxQ",
    "sustainableLine",
    "stationaryLine",
]

# figure kind -> (csv file name or glob, required columns)
KIND_INPUTS: dict[str, tuple[str, list[str]]] = {
    "ci-entropy": ("sessions.csv", SESSIONS),
    "ci-signal": ("per_signal.csv", PER_SIGNAL),
    "price-scatter": ("sessions.csv", SESSIONS),
    "market-share": ("per_state.csv", PER_STATE),
    "welfare-heatmap": ("welfare.csv", WELFARE),
    "correlation-heatmap": ("correlations.csv", CORRELATIONS),
    "alpha-beta-heatmap": ("sessions.csv", SESSIONS),
    "trace": ("trace_*.csv", TRACE),
    "min-action": ("sessions.csv", SESSIONS),
}

KINDS = sorted(KIND_INPUTS)


class SchemaMismatch(Exception):
    """Input table columns do not match the documented schema."""

    def __init__(self, path, missing: list[str], unexpected: list[str]):
        self.path = str(path)
        self.missing = missing
        self.unexpected = unexpected
        super().__init__(
            f"{path}: missing columns {missing or '[]'}, "
            f"unexpected columns {unexpected or '[]'}"
        )


def resolve_input(kind: str, directory) -> Path:
    pattern, _ = KIND_INPUTS[kind]
    directory = Path(directory)
    if "*" in pattern:
        matches = sorted(directory.glob(pattern))
        if not matches:
            raise FileNotFoundError(f"no file matching {pattern} in {directory}")
        return matches[0]
    return directory / pattern


def load_table(kind: str, directory) -> pd.DataFrame:
    """Read and schema-check the kind's input table."""
    path = resolve_input(kind, directory)
    if not path.exists():
        raise FileNotFoundError(f"missing input table {path}")
    frame = pd.read_csv(path)
    want = KIND_INPUTS[kind][1]
    have = list(frame.columns)
    missing = [c for c in want if c not in have]
    unexpected = [c for c in have if c not in want]
    if missing or unexpected:
        raise SchemaMismatch(path, missing, unexpected)
    return frame
