"""Economic environment: states, interval-partition signals, price grids,
demand allocation, and the competitive/monopoly benchmarks.

All functions here are pure and analytic; any randomness (tie-breaking in
realized mode) comes from a caller-supplied generator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

BASELINE_STATES = tuple(range(5, 21))


@dataclass(frozen=True)
class StateSpace:
    """Ordered WTP levels with a prior over them."""

    values: tuple[float, ...] = BASELINE_STATES
    prior: tuple[float, ...] = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if self.prior is None:
            object.__setattr__(
                self, "prior", tuple(1.0 / len(self.values) for _ in self.values)
            )
        if len(self.prior) != len(self.values):
            raise ValueError("prior length must match values length")
        if any(b <= a for a, b in zip(self.values, self.values[1:])):
            raise ValueError("state values must be strictly increasing")
        if any(p <= 0 for p in self.prior):
            raise ValueError("prior probabilities must be strictly positive")
        if abs(sum(self.prior) - 1.0) > 1e-12:
            raise ValueError("prior must sum to 1")

    @property
    def m(self) -> int:
        return len(self.values)

    def index_of(self, omega: float) -> int:
        try:
            return self.values.index(omega)
        except ValueError:
            raise ValueError(f"WTP {omega} not in state space") from None


@dataclass(frozen=True)
class Partition:
    """One firm's contiguous equal-size interval partition of the state space."""

    ranges: tuple[tuple[int, int], ...]  # half-open index ranges [lo, hi)

    @property
    def k(self) -> int:
        return len(self.ranges)

    def states_in(self, signal: int):
        lo, hi = self.ranges[signal]
        return range(lo, hi)


@dataclass(frozen=True)
class InformationStructure:
    """Per-firm partitions of a common state space."""

    space: StateSpace
    partitions: tuple[Partition, ...]

    @property
    def n_firms(self) -> int:
        return len(self.partitions)

    @property
    def signal_counts(self) -> tuple[int, ...]:
        return tuple(p.k for p in self.partitions)

    @property
    def entropies(self) -> tuple[float, ...]:
        m = self.space.m
        return tuple(math.log2(m / p.k) for p in self.partitions)


def build_partition(m: int, k: int) -> Partition:
    """Sequentially divide m ordered states into k equal contiguous intervals."""
    if k <= 0:
        raise ValueError(f"signal count must be positive, got {k}")
    if m % k != 0:
        raise ValueError(f"signal count {k} does not divide state count {m}")
    size = m // k
    return Partition(tuple((i * size, (i + 1) * size) for i in range(k)))


def signal_of(partition: Partition, space: StateSpace, omega: float) -> int:
    """Index of the interval containing WTP level omega."""
    idx = space.index_of(omega)
    for s, (lo, hi) in enumerate(partition.ranges):
        if lo <= idx < hi:
            return s
    raise ValueError(f"state index {idx} not covered by partition")


def signal_map(partition: Partition, m: int) -> np.ndarray:
    """state index -> signal index, as a dense int array."""
    out = np.empty(m, dtype=np.int64)
    for s, (lo, hi) in enumerate(partition.ranges):
        out[lo:hi] = s
    return out


@dataclass(frozen=True)
class ActionGrid:
    """Discretized per-signal price menu.

    prices[j] = signal_max * (j + 2) / l; the lowest price is the unique
    Bertrand-Nash price on the grid, position l-2 equals signal_max, and the
    top price slightly exceeds it.
    """

    prices: np.ndarray
    step: float
    signal_max: float

    nash_index: int = 0

    @property
    def l(self) -> int:
        return len(self.prices)

    @property
    def nash_price(self) -> float:
        return float(self.prices[self.nash_index])

    def index_of_price(self, price: float, tol: float = 1e-9) -> int:
        j = int(np.argmin(np.abs(self.prices - price)))
        if abs(self.prices[j] - price) > tol:
            raise ValueError(f"price {price} not on grid (step {self.step})")
        return j


def action_grid(signal_max: float, l: int) -> ActionGrid:
    if l < 2:
        raise ValueError(f"grid size must be at least 2, got {l}")
    if signal_max <= 0:
        raise ValueError(f"signal maximum must be positive, got {signal_max}")
    prices = signal_max * (np.arange(2, l + 2, dtype=np.float64)) / l
    return ActionGrid(prices=prices, step=signal_max / l, signal_max=signal_max)


def grids_for(partition: Partition, space: StateSpace, l: int) -> list[ActionGrid]:
    """One action grid per signal, scaled to the signal's maximum state."""
    return [
        action_grid(space.values[hi - 1], l) for (lo, hi) in partition.ranges
    ]


@dataclass(frozen=True)
class StageResult:
    quantities: tuple[float, ...]
    payoffs: tuple[float, ...]


def allocate_demand(prices, omega: float, rng=None) -> StageResult:
    """Unit demand to the lowest quoted price not exceeding omega.

    With an rng, ties are resolved by a uniform draw (realized quantities in
    {0,1}); without one, tied firms share 1/#ties each (analytic mode).
    """
    prices = [float(p) for p in prices]
    pmin = min(prices)
    n = len(prices)
    if pmin > omega:
        zeros = (0.0,) * n
        return StageResult(zeros, zeros)
    tied = [i for i, p in enumerate(prices) if p == pmin]
    q = [0.0] * n
    if rng is not None:
        q[tied[int(rng.integers(len(tied)))]] = 1.0
    else:
        for i in tied:
            q[i] = 1.0 / len(tied)
    return StageResult(tuple(q), tuple(p * qi for p, qi in zip(prices, q)))


def monopoly_price(
    states, weights, grid: ActionGrid
) -> tuple[float, float]:
    """Profit-maximizing grid price against the posterior (states, weights).

    Maximizes p * Prob(omega >= p); argmax ties go to the lowest price so the
    benchmark is deterministic.
    """
    states = np.asarray(states, dtype=np.float64)
    weights = np.asarray(weights, dtype=np.float64)
    if states.size == 0:
        raise ValueError("posterior must be nonempty")
    weights = weights / weights.sum()
    # prob of sale at each grid price
    sale_prob = (states[None, :] >= grid.prices[:, None]) @ weights
    profits = grid.prices * sale_prob
    best = int(np.argmax(profits))  # argmax returns the first (lowest) maximizer
    return float(grid.prices[best]), float(profits[best])


def shannon_entropy(weights) -> float:
    """-sum p log2 p in bits, with 0 log 0 = 0."""
    w = np.asarray(weights, dtype=np.float64)
    if np.any(w < 0):
        raise ValueError("weights must be nonnegative")
    if abs(w.sum() - 1.0) > 1e-9:
        raise ValueError(f"weights sum to {w.sum()}, expected 1")
    nz = w[w > 0]
    return float(-np.sum(nz * np.log2(nz)))


@dataclass(frozen=True)
class Benchmarks:
    """Competitive and monopoly profit benchmarks for one structure.

    Per-signal arrays are indexed by the reference partition (the less
    informed firm's in asymmetric structures); the monopoly side always uses
    the information-advantaged firm's discrimination ability.
    """

    pi_n: float
    pi_m: float
    per_signal_n: np.ndarray
    per_signal_m: np.ndarray
    per_state_n: np.ndarray
    per_state_m: np.ndarray
    ref_firm: int
    info_firm: int


def reference_firms(structure: InformationStructure) -> tuple[int, int]:
    """(less informed, more informed) firm indices, by signal count."""
    counts = structure.signal_counts
    ref = int(np.argmin(counts))
    info = int(np.argmax(counts))
    return ref, info


def benchmark_profits(
    structure: InformationStructure, grids: list[list[ActionGrid]]
) -> Benchmarks:
    """Analytic pi^N / pi^M, overall, per reference signal, and per state."""
    space = structure.space
    m = space.m
    prior = np.asarray(space.prior)
    values = np.asarray(space.values, dtype=np.float64)
    ref, info = reference_firms(structure)

    sig = [signal_map(p, m) for p in structure.partitions]

    # Nash: all firms quote p^N(s); transaction at the lowest quote, which
    # sits below every WTP in the signal's support, so the sale executes.
    per_state_n = np.array(
        [
            min(grids[i][sig[i][w]].nash_price for i in range(structure.n_firms))
            for w in range(m)
        ]
    )
    pi_n = float(prior @ per_state_n)

    # Monopoly with the information-advantaged firm's structure: within each
    # of its signals, charge the posterior argmax price. The per-state cap is
    # the best feasible price at that state on the informed firm's grid.
    info_part = structure.partitions[info]
    attained = np.empty(m)  # monopoly-strategy profit realized at each state
    per_state_m = np.empty(m)
    for t in range(info_part.k):
        idx = list(info_part.states_in(t))
        p_m, _ = monopoly_price(
            values[idx], prior[idx], grids[info][t]
        )
        g = grids[info][t].prices
        for w in idx:
            attained[w] = p_m if p_m <= values[w] else 0.0
            per_state_m[w] = float(g[g <= values[w]].max())
    pi_m = float(prior @ attained)

    # Reference-partition conditionals.
    ref_part = structure.partitions[ref]
    per_signal_n = np.empty(ref_part.k)
    per_signal_m = np.empty(ref_part.k)
    for s in range(ref_part.k):
        idx = list(ref_part.states_in(s))
        w_cond = prior[idx] / prior[idx].sum()
        per_signal_n[s] = w_cond @ per_state_n[idx]
        per_signal_m[s] = w_cond @ attained[idx]

    return Benchmarks(
        pi_n=pi_n,
        pi_m=pi_m,
        per_signal_n=per_signal_n,
        per_signal_m=per_signal_m,
        per_state_n=per_state_n,
        per_state_m=per_state_m,
        ref_firm=ref,
        info_firm=info,
    )


@dataclass(frozen=True)
class Deviation:
    firm: int
    signal: int
    from_price: float
    to_price: float
    gain: float


@dataclass(frozen=True)
class BneVerdict:
    is_equilibrium: bool
    deviations: tuple[Deviation, ...]

    def __bool__(self) -> bool:
        return self.is_equilibrium


def expected_profit(
    structure: InformationStructure,
    grids: list[list[ActionGrid]],
    strategy: list[np.ndarray],
    firm: int,
    signal: int,
    price: float,
) -> float:
    """Firm's expected profit conditional on its signal, quoting `price`
    while everyone else follows `strategy` (action indices per signal)."""
    space = structure.space
    prior = np.asarray(space.prior)
    part = structure.partitions[firm]
    idx = list(part.states_in(signal))
    w_cond = prior[idx] / prior[idx].sum()
    sig = [signal_map(p, space.m) for p in structure.partitions]
    total = 0.0
    for w, pw in zip(idx, w_cond):
        prices = [
            grids[j][sig[j][w]].prices[strategy[j][sig[j][w]]]
            for j in range(structure.n_firms)
        ]
        prices[firm] = price
        res = allocate_demand(prices, space.values[w])
        total += pw * res.payoffs[firm]
    return total


def verify_bne(
    structure: InformationStructure,
    grids: list[list[ActionGrid]],
    strategy: list[np.ndarray],
    tol: float = 1e-12,
) -> BneVerdict:
    """Exhaustive unilateral-deviation scan over every firm's grid.

    The check is deviation-proofness on the discretized grid (prices are
    bounded away from zero), not the continuum equilibrium claim.
    """
    deviations = []
    for i in range(structure.n_firms):
        part = structure.partitions[i]
        for s in range(part.k):
            grid = grids[i][s]
            a0 = strategy[i][s]
            if not 0 <= a0 < grid.l:
                raise ValueError(
                    f"firm {i} signal {s}: action {a0} outside grid of size {grid.l}"
                )
            base = expected_profit(structure, grids, strategy, i, s, grid.prices[a0])
            best_gain = 0.0
            best_price = None
            for a in range(grid.l):
                if a == a0:
                    continue
                alt = expected_profit(
                    structure, grids, strategy, i, s, grid.prices[a]
                )
                if alt - base > best_gain + tol:
                    best_gain = alt - base
                    best_price = float(grid.prices[a])
            if best_price is not None:
                deviations.append(
                    Deviation(i, s, float(grid.prices[a0]), best_price, best_gain)
                )
    return BneVerdict(not deviations, tuple(deviations))


def nash_strategy(
    structure: InformationStructure, grids: list[list[ActionGrid]]
) -> list[np.ndarray]:
    """The all-p^N profile, as action indices."""
    return [
        np.full(p.k, grids[i][0].nash_index, dtype=np.int64)
        for i, p in enumerate(structure.partitions)
    ]


def make_structure(space: StateSpace, ks) -> InformationStructure:
    return InformationStructure(
        space=space, partitions=tuple(build_partition(space.m, k) for k in ks)
    )
