"""Single-state diagnostic environment and its collusion-channel probes.

The event detectors formalize learning phases that were originally described
qualitatively on figures; every window length and threshold is exposed as an
argument with the defaults used throughout the test suite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .market import ActionGrid


@dataclass(frozen=True)
class NoteEnvironment:
    reservation_value: float = 1.0
    marginal_cost: float = 0.0
    action_count: int = 20
    min_action: float | None = None
    grid: ActionGrid = field(init=False)

    def __post_init__(self):
        object.__setattr__(
            self,
            "grid",
            note_grid(
                self.action_count,
                self.reservation_value,
                self.marginal_cost,
                self.min_action,
            ),
        )


def note_grid(
    m: int, a: float = 1.0, c: float = 0.0, min_action: float | None = None
) -> ActionGrid:
    """m equally spaced prices on [p^N + 2xi(p^M - p^N), p^M + xi(p^M - p^N)]
    with xi = 1/m, p^N = c, p^M = a; `min_action` overrides the lower end.

    Values are rounded to 10 decimals so decimal grids like {0.10, 0.15, ...}
    come out bit-exact.
    """
    if m < 2:
        raise ValueError(f"need at least 2 actions, got {m}")
    if a <= c:
        raise ValueError("reservation value must exceed marginal cost")
    xi = 1.0 / m
    lo = c + 2 * xi * (a - c) if min_action is None else float(min_action)
    hi = a + xi * (a - c)
    if lo >= hi:
        raise ValueError(f"minimum action {lo} not below grid top {hi}")
    prices = np.round(np.linspace(lo, hi, m), 10)
    return ActionGrid(
        prices=prices, step=float(np.round((hi - lo) / (m - 1), 10)), signal_max=a
    )


def note_demand(prices, a: float):
    """Continuum demand: firms at the lowest price <= a split the unit mass."""
    prices = [float(p) for p in prices]
    pmin = min(prices)
    if pmin > a:
        return tuple(0.0 for _ in prices)
    tied = sum(1 for p in prices if p == pmin)
    return tuple((1.0 / tied) if p == pmin else 0.0 for p in prices)


def sustainable_line(q_value: float, delta: float) -> float:
    """Lowest price able to maintain its own Q value under full capture."""
    if not 0 <= delta < 1:
        raise ValueError(f"delta must be in [0, 1), got {delta}")
    return (1.0 - delta) * q_value


def stationary_line(q_value: float, delta: float) -> float:
    """Lowest price able to persist as an equal-split stationary profile."""
    return 2.0 * sustainable_line(q_value, delta)


@dataclass
class BubbleStats:
    phase_periods: int
    per_seed_mean: np.ndarray  # mean Q across firms and actions, per seed
    per_seed_min: np.ndarray
    per_seed_max: np.ndarray

    @property
    def mean(self) -> float:
        return float(self.per_seed_mean.mean())


def bubble_probe(cfg, seeds: int = 50, phase_periods: int | None = None) -> BubbleStats:
    """Run only the high-exploration phase and report cross-action Q statistics.

    The phase ends when the exploration rate decays to 1 percent unless a
    period count is given explicitly.
    """
    from dataclasses import replace

    from .harness import run_session

    if cfg.environment != "note":
        raise ValueError("bubble probe is defined for the note environment")
    beta = cfg.beta if cfg.beta is not None else 5e-4
    if phase_periods is None:
        phase_periods = int(math.ceil(math.log(100.0) / beta))
    probe_cfg = replace(
        cfg,
        max_periods=phase_periods,
        convergence_window=phase_periods,
        trace=False,
    )
    means = np.empty(seeds)
    mins = np.empty(seeds)
    maxs = np.empty(seeds)
    for i in range(seeds):
        out = run_session(probe_cfg, session_index=i, keep_q=True)
        q = out.final_q
        means[i] = q.mean()
        mins[i] = q.min()
        maxs[i] = q.max()
    return BubbleStats(
        phase_periods=phase_periods,
        per_seed_mean=means,
        per_seed_min=mins,
        per_seed_max=maxs,
    )


@dataclass(frozen=True)
class TraceEvent:
    period: int
    event_type: str  # downward-search | rebound | alternating-maintenance
    firm: int  # -1 for joint events
    detail: str


def detect_events(
    trace,
    delta: float,
    grid_min: float,
    rebound_window: int = 1000,
    min_run_samples: int = 5,
) -> list[TraceEvent]:
    """Label downward-search segments, rebounds, and alternating maintenance.

    Works on a sampled trace (periods, greedy_price, max_q per firm). The
    stationary line is evaluated from the same Q snapshot as the prices.
    """
    periods = np.asarray(trace.periods)
    if len(periods) < 2:
        raise ValueError("trace too short for event detection")
    greedy = np.asarray(trace.greedy_price)
    maxq = np.asarray(trace.max_q)
    n_samples = len(periods)
    joint = greedy.min(axis=1)
    stat_line = stationary_line(1.0, delta) * maxq.mean(axis=1)  # 2(1-d)*meanQ

    events: list[TraceEvent] = []

    # downward-search: maximal windows of nonincreasing joint greedy price
    # containing >= 2 decreases whose deciding firm alternates at least once
    seg_start = 0
    drop_firms: list[int] = []
    for t in range(1, n_samples + 1):
        ended = t == n_samples or joint[t] > joint[t - 1]
        if not ended:
            if joint[t] < joint[t - 1]:
                drop_firms.append(int(np.argmin(greedy[t])))
            continue
        alternates = any(a != b for a, b in zip(drop_firms, drop_firms[1:]))
        if len(drop_firms) >= 2 and alternates:
            events.append(
                TraceEvent(
                    int(periods[seg_start]),
                    "downward-search",
                    -1,
                    f"drops={len(drop_firms)} until period {int(periods[t - 1])}",
                )
            )
        seg_start = t
        drop_firms = []

    # rebound: joint greedy price crosses from below the stationary line to
    # above it within rebound_window periods
    below_at = None
    for t in range(n_samples):
        if joint[t] < stat_line[t]:
            if below_at is None:
                below_at = t
        elif below_at is not None:
            if periods[t] - periods[below_at] <= rebound_window:
                events.append(
                    TraceEvent(
                        int(periods[t]),
                        "rebound",
                        -1,
                        f"from {joint[below_at]:.6g} to {joint[t]:.6g} "
                        f"over line {stat_line[t]:.6g}",
                    )
                )
            below_at = None

    # alternating maintenance: runs where exactly one firm holds the minimum
    # grid price, with the holder alternating across consecutive runs
    holder = np.full(n_samples, -1, dtype=np.int64)
    at_min = np.abs(greedy - grid_min) < 1e-12
    solo = at_min.sum(axis=1) == 1
    holder[solo] = np.argmax(at_min[solo], axis=1)
    runs: list[tuple[int, int, int]] = []  # (firm, start_idx, length)
    for t in range(n_samples):
        if holder[t] == -1:
            continue
        if runs and runs[-1][0] == holder[t] and t - (runs[-1][1] + runs[-1][2]) <= 1:
            firm, start, length = runs[-1]
            runs[-1] = (firm, start, t - start + 1)
        else:
            runs.append((int(holder[t]), t, 1))
    runs = [r for r in runs if r[2] >= min_run_samples]
    chain_start = 0
    for j in range(1, len(runs) + 1):
        chained = j < len(runs) and runs[j][0] != runs[j - 1][0]
        if chained:
            continue
        if j - chain_start >= 2:
            events.append(
                TraceEvent(
                    int(periods[runs[chain_start][1]]),
                    "alternating-maintenance",
                    -1,
                    f"runs={j - chain_start} holders alternate from firm "
                    f"{runs[chain_start][0]}",
                )
            )
        chain_start = j

    events.sort(key=lambda e: e.period)
    return events


def threshold_estimate(ci_by_min_action: dict) -> float:
    """Minimum-action level where the CI curve falls to half its maximum.

    Inverts the piecewise-linear interpolant of CI against minimum action;
    with several crossings the largest one is returned.
    """
    if len(ci_by_min_action) < 2:
        raise ValueError("need at least two sweep points")
    xs = np.array(sorted(ci_by_min_action))
    ys = np.array([ci_by_min_action[x] for x in xs])
    target = ys.max() / 2.0
    crossing = None
    for i in range(len(xs) - 1):
        y0, y1 = ys[i], ys[i + 1]
        if (y0 - target) * (y1 - target) <= 0 and y0 != y1:
            x = xs[i] + (target - y0) * (xs[i + 1] - xs[i]) / (y1 - y0)
            crossing = float(x)
        elif y0 == target == y1:
            crossing = float(xs[i + 1])
    if crossing is None:
        raise ValueError("CI curve never crosses half its maximum")
    return crossing
