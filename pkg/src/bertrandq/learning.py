"""Tabular Q-learning agent: value table, epsilon-greedy choice, update rule."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .market import ActionGrid, InformationStructure, signal_map


@dataclass
class QTable:
    """One agent's signal x action value matrix plus hyperparameters."""

    values: np.ndarray  # (k, l)
    alpha: float
    delta: float
    grids: list[ActionGrid]

    def __post_init__(self):
        if not 0 < self.alpha <= 1:
            raise ValueError(f"learning rate must be in (0, 1], got {self.alpha}")
        if not 0 <= self.delta < 1:
            raise ValueError(f"discount factor must be in [0, 1), got {self.delta}")
        if self.values.shape != (len(self.grids), self.grids[0].l):
            raise ValueError("value matrix shape does not match grids")


@dataclass(frozen=True)
class ExplorationSchedule:
    """Exponential epsilon decay, eps_t = exp(-beta * t)."""

    beta: float

    def __post_init__(self):
        if self.beta < 0:
            raise ValueError(f"decay parameter must be nonnegative, got {self.beta}")

    def epsilon_at(self, t: float) -> float:
        return epsilon(t, self.beta)


def epsilon(t: float, beta: float) -> float:
    if t < 0:
        raise ValueError(f"period must be nonnegative, got {t}")
    return math.exp(-beta * t)


def uniform_opponent_payoff(
    price: float,
    omega: float,
    opponent_grid: ActionGrid,
) -> float:
    """Expected one-shot payoff of quoting `price` at WTP omega against an
    opponent drawing uniformly from its grid (half credit on exact ties)."""
    if price > omega:
        return 0.0
    q = opponent_grid.prices
    win = np.count_nonzero(q > price) + 0.5 * np.count_nonzero(q == price)
    return price * win / len(q)


def init_q(
    grids: list[ActionGrid],
    delta: float,
    structure: InformationStructure | None = None,
    firm: int = 0,
    opponent_grids: list[ActionGrid] | None = None,
    omega: float | None = None,
) -> np.ndarray:
    """Initial Q: discounted payoff against a uniformly randomizing opponent.

    For each own signal s and price a, the stage payoff is averaged over the
    posterior of s, with the opponent drawing uniformly from its own grid at
    the signal co-occurring with each state. `omega` pins a single known WTP
    (single-state environments); then `structure` may be omitted.
    """
    if not 0 <= delta < 1:
        raise ValueError(f"discount factor must be in [0, 1), got {delta}")
    k = len(grids)
    l = grids[0].l
    q0 = np.zeros((k, l))
    divisor = 1.0 - delta if delta > 0 else 1.0
    if structure is None:
        if omega is None:
            raise ValueError("need either a structure or a fixed omega")
        opp = opponent_grids if opponent_grids is not None else grids
        for s in range(k):
            og = opp[min(s, len(opp) - 1)]
            for a in range(l):
                q0[s, a] = (
                    uniform_opponent_payoff(grids[s].prices[a], omega, og) / divisor
                )
        return q0

    space = structure.space
    prior = np.asarray(space.prior)
    part = structure.partitions[firm]
    others = [j for j in range(structure.n_firms) if j != firm]
    opp = others[0]  # two-firm environments
    opp_sig = signal_map(structure.partitions[opp], space.m)
    for s in range(part.k):
        idx = list(part.states_in(s))
        w_cond = prior[idx] / prior[idx].sum()
        for a in range(l):
            p = grids[s].prices[a]
            stage = sum(
                pw
                * uniform_opponent_payoff(
                    p, space.values[w], opponent_grids[opp_sig[w]]
                )
                for w, pw in zip(idx, w_cond)
            )
            q0[s, a] = stage / divisor
    return q0


def choose_action(q: QTable, s: int, eps: float, rng: np.random.Generator) -> int:
    """Epsilon-greedy with uniform tie-breaking among maximizers."""
    row = q.values[s]
    if rng.random() < eps:
        return int(rng.integers(len(row)))
    maximizers = np.flatnonzero(row == row.max())
    if len(maximizers) == 1:
        return int(maximizers[0])
    return int(maximizers[rng.integers(len(maximizers))])


def update(q: QTable, s: int, a: int, payoff: float, s_next: int) -> None:
    """Q(s,a) <- (1-alpha) Q(s,a) + alpha [pi + delta max_a' Q(s_next, a')]."""
    target = payoff + q.delta * q.values[s_next].max()
    q.values[s, a] = (1.0 - q.alpha) * q.values[s, a] + q.alpha * target
