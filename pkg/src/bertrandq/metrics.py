"""Statistics over session outcomes: collusion indices, welfare, market
division, price extremes, and cross-signal correlations.

Everything here is a pure function of immutable outcome collections, so
aggregation can happen in any order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .harness import ExperimentSummary, SessionOutcome
from .market import Benchmarks


def collusion_index(mean_profit: float, pi_n: float, pi_m: float) -> float:
    """(pi_bar - pi^N) / (pi^M - pi^N): 0 competitive, 1 monopoly."""
    denom = pi_m - pi_n
    if denom <= 0:
        raise ValueError(
            f"degenerate benchmark gap: pi^M={pi_m} must exceed pi^N={pi_n}"
        )
    return (mean_profit - pi_n) / denom


def weighted_collusion_index(
    mean_profit: float, pi_n: float, pi1_m: float, pi2_m: float, weight: float
) -> float:
    """CI with the monopoly benchmark as a weighted mix of the two firms'
    individual monopoly profits."""
    if not 0 <= weight <= 1:
        raise ValueError(f"weight must be in [0, 1], got {weight}")
    return collusion_index(mean_profit, pi_n, weight * pi1_m + (1 - weight) * pi2_m)


def per_signal_ci(
    outcomes: list[SessionOutcome], benchmarks: Benchmarks
) -> np.ndarray:
    """Per-session CI conditional on each reference-partition signal.

    Rows are sessions, columns signals of the less informed firm.
    """
    denom = benchmarks.per_signal_m - benchmarks.per_signal_n
    if np.any(denom <= 0):
        bad = int(np.argmin(denom))
        raise ValueError(f"degenerate benchmark gap at signal {bad}")
    rows = [
        (o.scored.ref_signal_profit - benchmarks.per_signal_n) / denom
        for o in outcomes
    ]
    return np.array(rows)


def per_state_ci(
    outcomes: list[SessionOutcome], benchmarks: Benchmarks
) -> np.ndarray:
    """Per-session CI at each WTP level, against per-state benchmarks."""
    denom = benchmarks.per_state_m - benchmarks.per_state_n
    if np.any(denom <= 0):
        bad = int(np.argmin(denom))
        raise ValueError(f"degenerate benchmark gap at state {bad}")
    rows = [(o.scored.state_profit - benchmarks.per_state_n) / denom for o in outcomes]
    return np.array(rows)


def overall_ci(outcomes: list[SessionOutcome], benchmarks: Benchmarks) -> np.ndarray:
    return np.array(
        [
            collusion_index(o.scored.total_profit, benchmarks.pi_n, benchmarks.pi_m)
            for o in outcomes
        ]
    )


@dataclass(frozen=True)
class WelfareReport:
    industry_profit: float
    consumer_surplus: float
    social_welfare: float


def welfare_of(outcome: SessionOutcome, prior: np.ndarray) -> WelfareReport:
    profit = float(prior @ outcome.scored.state_profit)
    surplus = float(prior @ outcome.scored.state_surplus)
    return WelfareReport(profit, surplus, profit + surplus)


def welfare(
    outcomes: list[SessionOutcome], prior: np.ndarray
) -> WelfareReport:
    """Expected per-period industry profit, consumer surplus, and their sum,
    averaged over sessions."""
    reports = [welfare_of(o, prior) for o in outcomes]
    return WelfareReport(
        industry_profit=float(np.mean([r.industry_profit for r in reports])),
        consumer_surplus=float(np.mean([r.consumer_surplus for r in reports])),
        social_welfare=float(np.mean([r.social_welfare for r in reports])),
    )


def market_division(outcomes: list[SessionOutcome]) -> np.ndarray:
    """Expected share of each firm at each WTP level, session average."""
    return np.mean([o.scored.shares for o in outcomes], axis=0)


def price_extremes(outcome: SessionOutcome) -> np.ndarray:
    """(n_firms, 2) array of (max, min) converged price over signals."""
    return np.array(
        [[prices.max(), prices.min()] for prices in outcome.strategy_prices]
    )


def pearson_matrix(samples: np.ndarray) -> np.ndarray:
    """Population-normalized Pearson coefficients between columns.

    Zero-variance columns yield NaN entries rather than silently zero.
    """
    samples = np.asarray(samples, dtype=np.float64)
    if samples.ndim != 2 or samples.shape[0] < 2:
        raise ValueError("need a 2-D sample matrix with at least 2 rows")
    centered = samples - samples.mean(axis=0)
    cov = centered.T @ centered / samples.shape[0]
    sd = np.sqrt(np.diag(cov))
    with np.errstate(invalid="ignore", divide="ignore"):
        rho = cov / np.outer(sd, sd)
    rho[np.isinf(rho)] = np.nan
    return rho


@dataclass
class ExperimentMetrics:
    ci: np.ndarray  # (sessions,)
    ci_per_signal: np.ndarray  # (sessions, k_ref)
    ci_per_state: np.ndarray  # (sessions, m)
    correlation: np.ndarray  # (k_ref, k_ref)
    welfare: WelfareReport
    shares: np.ndarray  # (n, m)
    extremes: np.ndarray  # (sessions, n, 2) of (max, min)
    converged: np.ndarray  # (sessions,) bool
    profits: np.ndarray  # (sessions, n)
    periods: np.ndarray  # (sessions,)

    @property
    def mean_ci(self) -> float:
        return float(self.ci.mean())

    @property
    def n_unconverged(self) -> int:
        return int((~self.converged).sum())


def summarize(
    summary: ExperimentSummary, include_unconverged: bool = True
) -> ExperimentMetrics:
    """All experiment-level statistics. Unconverged sessions are included by
    default and always flagged via the `converged` column."""
    outcomes = summary.outcomes
    if not include_unconverged:
        outcomes = [o for o in outcomes if o.converged]
        if not outcomes:
            raise ValueError("no converged sessions to summarize")
    bench = summary.benchmarks
    prior = summary.env.prior
    sig_ci = per_signal_ci(outcomes, bench)
    corr = (
        pearson_matrix(sig_ci)
        if len(outcomes) >= 2
        else np.full((sig_ci.shape[1],) * 2, np.nan)
    )
    return ExperimentMetrics(
        ci=overall_ci(outcomes, bench),
        ci_per_signal=sig_ci,
        ci_per_state=per_state_ci(outcomes, bench),
        correlation=corr,
        welfare=welfare(outcomes, prior),
        shares=market_division(outcomes),
        extremes=np.array([price_extremes(o) for o in outcomes]),
        converged=np.array([o.converged for o in outcomes]),
        profits=np.array([o.scored.profits for o in outcomes]),
        periods=np.array([o.periods for o in outcomes]),
    )
