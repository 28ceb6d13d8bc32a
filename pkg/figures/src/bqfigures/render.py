"""One renderer per figure kind, all pure consumers of the CSV tables."""

from __future__ import annotations

import csv
import re
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .schemas import KINDS, load_table

_ENTROPY_LABEL = re.compile(r"^H\((\d+),(\d+)\)$")
_PAIR_LABEL = re.compile(r"^alpha=([0-9.eE+-]+),beta=([0-9.eE+-]+)$")
_MIN_LABEL = re.compile(r"^min=([0-9.eE+-]+)$")


def ols(x, y) -> tuple[float, float]:
    """Ordinary least squares slope and intercept of y on x."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if len(x) < 2:
        raise ValueError("need at least two points for a regression line")
    xm, ym = x.mean(), y.mean()
    denom = ((x - xm) ** 2).sum()
    if denom == 0:
        raise ValueError("x values are constant; regression is undefined")
    slope = float(((x - xm) * (y - ym)).sum() / denom)
    return slope, float(ym - slope * xm)


def _save(fig, out_path: Path) -> None:
    # strip per-run metadata so identical inputs give identical bytes
    suffix = out_path.suffix.lower()
    metadata = {}
    if suffix == ".png":
        metadata = {"Software": "bqfigures"}
    elif suffix == ".pdf":
        metadata = {"CreationDate": None}
    elif suffix == ".svg":
        metadata = {"Date": None}
    fig.savefig(out_path, dpi=120, metadata=metadata)
    plt.close(fig)


def _labels_in_order(frame):
    seen = []
    for label in frame["experiment"]:
        if label not in seen:
            seen.append(label)
    return seen


def render(kind: str, in_dir, out_path) -> Path:
    """Render one figure kind from a result directory to an image file."""
    if kind not in KINDS:
        raise ValueError(f"unknown figure kind {kind!r}; choose from {KINDS}")
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    frame = load_table(kind, in_dir)
    _RENDERERS[kind](frame, out_path)
    return out_path


# --------------------------------------------------------------------- kinds


def _ci_entropy(frame, out_path):
    labels = _labels_in_order(frame)
    groups = [frame.loc[frame["experiment"] == lab, "ci"].to_numpy() for lab in labels]
    fig, ax = plt.subplots(figsize=(7, 4.5))
    pos = np.arange(1, len(labels) + 1)
    if all(len(g) > 1 for g in groups):
        parts = ax.violinplot(groups, positions=pos, showextrema=False)
        for body in parts["bodies"]:
            body.set_alpha(0.3)
    ax.boxplot(groups, positions=pos, widths=0.25, showmeans=True)
    ax.set_xticks(pos, labels, rotation=30)
    ax.set_xlabel("experiment")
    ax.set_ylabel("collusion index")
    ax.set_title("Collusion index by information structure")
    fig.tight_layout()
    _save(fig, out_path)


def _ci_signal(frame, out_path):
    signals = sorted(frame["signal"].unique())
    groups = [frame.loc[frame["signal"] == s, "ci"].to_numpy() for s in signals]
    means = np.array([g.mean() for g in groups])
    slope, intercept = ols(signals, means)
    fig, ax = plt.subplots(figsize=(7, 4.5))
    ax.boxplot(groups, positions=signals, widths=0.5, showmeans=True)
    xs = np.array([min(signals), max(signals)], dtype=float)
    ax.plot(xs, intercept + slope * xs, color="red", label=f"OLS slope {slope:.4f}")
    ax.set_xlabel("signal index")
    ax.set_ylabel("collusion index")
    ax.set_title("Per-signal collusion index")
    ax.legend()
    fig.tight_layout()
    _save(fig, out_path)
    sidecar = out_path.with_name(out_path.stem + "_regression.csv")
    with open(sidecar, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(["slope", "intercept", "points"])
        w.writerow([repr(slope), repr(intercept), len(signals)])


def _price_scatter(frame, out_path):
    fig, ax = plt.subplots(figsize=(5.5, 5.5))
    ax.scatter(
        frame["max_price_0"],
        frame["max_price_1"],
        s=12,
        color="red",
        label="max prices",
    )
    ax.scatter(
        frame["min_price_0"],
        frame["min_price_1"],
        s=12,
        color="green",
        label="min prices",
    )
    lo = min(frame[["min_price_0", "min_price_1"]].min())
    hi = max(frame[["max_price_0", "max_price_1"]].max())
    ax.plot([lo, hi], [lo, hi], color="gray", linestyle="--", label="45° line")
    ax.set_xlabel("firm 0 price")
    ax.set_ylabel("firm 1 price")
    ax.set_title("Converged price extremes")
    ax.legend()
    fig.tight_layout()
    _save(fig, out_path)


def _market_share(frame, out_path):
    by_wtp = frame.groupby("wtp")[["share_0", "share_1"]].mean()
    fig, ax = plt.subplots(figsize=(7, 4.5))
    x = np.arange(len(by_wtp.index))
    ax.bar(x - 0.2, by_wtp["share_0"], width=0.4, label="firm 0")
    ax.bar(x + 0.2, by_wtp["share_1"], width=0.4, label="firm 1")
    ax.set_xticks(x, [f"{v:g}" for v in by_wtp.index])
    ax.set_xlabel("willingness to pay")
    ax.set_ylabel("mean market share")
    ax.set_title("Market division by willingness to pay")
    ax.legend()
    fig.tight_layout()
    _save(fig, out_path)


def _entropy_pairs(labels):
    pairs = []
    for lab in labels:
        m = _ENTROPY_LABEL.match(lab)
        if not m:
            raise ValueError(
                f"experiment label {lab!r} is not an entropy pair 'H(i,j)'"
            )
        pairs.append((int(m.group(1)), int(m.group(2))))
    return pairs


def _welfare_heatmap(frame, out_path):
    labels = list(frame["experiment"])
    pairs = _entropy_pairs(labels)
    h1s = sorted({p[0] for p in pairs})
    h2s = sorted({p[1] for p in pairs})
    fig, axes = plt.subplots(1, 3, figsize=(12, 3.8))
    for ax, col in zip(
        axes, ["industry_profit", "consumer_surplus", "social_welfare"]
    ):
        grid = np.full((len(h1s), len(h2s)), np.nan)
        for (h1, h2), val in zip(pairs, frame[col]):
            grid[h1s.index(h1), h2s.index(h2)] = val
        im = ax.imshow(grid, origin="lower", cmap="viridis")
        ax.set_xticks(range(len(h2s)), h2s)
        ax.set_yticks(range(len(h1s)), h1s)
        ax.set_xlabel("firm 1 entropy")
        ax.set_ylabel("firm 0 entropy")
        ax.set_title(col.replace("_", " "))
        fig.colorbar(im, ax=ax, shrink=0.85)
    fig.tight_layout()
    _save(fig, out_path)


def _correlation_heatmap(frame, out_path):
    label = frame["experiment"].iloc[0]
    sub = frame[frame["experiment"] == label]
    k = int(max(sub["signal_i"].max(), sub["signal_j"].max())) + 1
    grid = np.full((k, k), np.nan)
    for _, row in sub.iterrows():
        grid[int(row["signal_i"]), int(row["signal_j"])] = row["rho"]
    fig, ax = plt.subplots(figsize=(5.5, 4.8))
    im = ax.imshow(grid, origin="lower", cmap="coolwarm", vmin=-1, vmax=1)
    ax.set_xlabel("signal")
    ax.set_ylabel("signal")
    ax.set_title(f"Per-signal CI correlations ({label})")
    fig.colorbar(im, ax=ax)
    fig.tight_layout()
    _save(fig, out_path)


def _alpha_beta_heatmap(frame, out_path):
    mean_ci = frame.groupby("experiment", sort=False)["ci"].mean()
    points = []
    for lab, ci in mean_ci.items():
        m = _PAIR_LABEL.match(lab)
        if not m:
            raise ValueError(
                f"experiment label {lab!r} is not 'alpha=A,beta=B'"
            )
        points.append((float(m.group(1)), float(m.group(2)), float(ci)))
    alphas = sorted({p[0] for p in points})
    betas = sorted({p[1] for p in points})
    grid = np.full((len(alphas), len(betas)), np.nan)
    for a, b, ci in points:
        grid[alphas.index(a), betas.index(b)] = ci
    fig, ax = plt.subplots(figsize=(7, 5))
    im = ax.imshow(grid, origin="lower", cmap="viridis", aspect="auto")
    ax.set_xticks(range(len(betas)), [f"{b:g}" for b in betas], rotation=90)
    ax.set_yticks(range(len(alphas)), [f"{a:g}" for a in alphas])
    ax.set_xlabel("exploration decay beta")
    ax.set_ylabel("learning rate alpha")
    ax.set_title("Mean collusion index")
    fig.colorbar(im, ax=ax)
    fig.tight_layout()
    _save(fig, out_path)


def _trace(frame, out_path):
    fig, ax = plt.subplots(figsize=(8, 4.5))
    for firm, sub in frame.groupby("firm"):
        ax.plot(
            sub["period"],
            sub["chosenPrice"],
            linewidth=0.6,
            alpha=0.8,
            label=f"firm {firm} price",
        )
    first = frame[frame["firm"] == frame["firm"].iloc[0]]
    ax.plot(
        first["period"],
        first["sustainableLine"],
        color="black",
        linestyle=":",
        label="sustainable line",
    )
    ax.plot(
        first["period"],
        first["stationaryLine"],
        color="black",
        linestyle="--",
        label="stationary line",
    )
    ax.set_xlabel("period")
    ax.set_ylabel("price")
    ax.set_title("Session trace")
    ax.legend(loc="upper right", fontsize=8)
    fig.tight_layout()
    _save(fig, out_path)


def _min_action(frame, out_path):
    rows = []
    for lab, sub in frame.groupby("experiment", sort=False):
        m = _MIN_LABEL.match(lab)
        if not m:
            raise ValueError(f"experiment label {lab!r} is not 'min=P'")
        price = float(
            np.mean(np.minimum(sub["min_price_0"], sub["min_price_1"]))
        )
        rows.append((float(m.group(1)), float(sub["ci"].mean()), price))
    rows.sort()
    xs = [r[0] for r in rows]
    fig, ax = plt.subplots(figsize=(7, 4.5))
    ax.plot(xs, [r[1] for r in rows], marker="o", label="mean CI")
    ax.set_xlabel("minimum action")
    ax.set_ylabel("mean collusion index")
    ax2 = ax.twinx()
    ax2.plot(
        xs, [r[2] for r in rows], marker="s", color="gray", label="mean min price"
    )
    ax2.set_ylabel("mean converged minimum price")
    ax.set_title("Collusion and prices against the action floor")
    lines = ax.get_lines() + ax2.get_lines()
    ax.legend(lines, [ln.get_label() for ln in lines], loc="best")
    fig.tight_layout()
    _save(fig, out_path)


_RENDERERS = {
    "ci-entropy": _ci_entropy,
    "ci-signal": _ci_signal,
    "price-scatter": _price_scatter,
    "market-share": _market_share,
    "welfare-heatmap": _welfare_heatmap,
    "correlation-heatmap": _correlation_heatmap,
    "alpha-beta-heatmap": _alpha_beta_heatmap,
    "trace": _trace,
    "min-action": _min_action,
}
