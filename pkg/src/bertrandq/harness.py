"""Seeded sessions, experiments, and the named parameter sweeps.

Seed derivation (stable contract): a sweep point with index p under master
seed M runs with experiment seed SeedSequence([M, p]); session i of an
experiment with seed E uses streams SeedSequence([E, i, j]) where j is the
firm index and j = n_firms is nature. Aggregation is order-independent, so
summaries do not depend on the degree of parallelism.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import engine, learning, market
from .note_lab import note_grid

MAIN_STATES = tuple(range(5, 21))

DESK_L = 20
DESK_NU = 100.0
DESK_MAX_PERIODS = 20_000_000
DESK_SESSIONS = 100


def beta_from_nu(nu: float, k: int, l: int) -> float:
    """Decay rate giving nu expected pure-exploration visits per Q cell."""
    if nu <= 0 or k <= 0 or l <= 0:
        raise ValueError("nu, k, l must all be positive")
    cells = nu * k * l
    if cells <= 1:
        raise ValueError(f"nu*k*l = {cells} <= 1 admits no valid decay rate")
    return -math.log1p(-1.0 / cells)


def nu_from_beta(beta: float, k: int, l: int) -> float:
    return 1.0 / (k * l * (1.0 - math.exp(-beta)))


@dataclass(frozen=True)
class SessionConfig:
    environment: str = "main"  # "main" | "note"
    k: tuple[int, ...] = (1, 1)
    l: int = 200
    alpha: float = 0.15
    delta: float = 0.95
    beta: float | None = 3e-6
    nu: float | None = None
    max_periods: int = 1_000_000_000
    convergence_window: int = 100_000
    q_init: str = "uniform-opponent"  # | "zeros" | "constant"
    q_init_value: float = 0.0
    tie_rule: str = "split"  # equal shares at ties | "random" winner-take-all
    seed: int = 0
    # degenerate-state experiment with payoff-irrelevant signals
    fixed_state: float | None = None
    irrelevant_signals: int = 1
    common_signal: bool = True
    # single-state diagnostic environment
    note_actions: int = 20
    note_a: float = 1.0
    note_c: float = 0.0
    note_min_action: float | None = None
    # tracing
    trace: bool = False
    trace_dense: int = 100_000
    trace_stride: int = 100

    def __post_init__(self):
        if self.environment not in ("main", "note"):
            raise ValueError(f"unknown environment {self.environment!r}")
        if (self.beta is None) == (self.nu is None):
            raise ValueError("exactly one of beta and nu must be set")
        if not 0 < self.alpha <= 1:
            raise ValueError(f"alpha must be in (0, 1], got {self.alpha}")
        if not 0 <= self.delta < 1:
            raise ValueError(f"delta must be in [0, 1), got {self.delta}")
        if self.convergence_window < 1:
            raise ValueError("convergence window must be at least 1")
        if self.max_periods < self.convergence_window:
            raise ValueError("max periods must be at least the convergence window")
        if self.q_init not in ("uniform-opponent", "zeros", "constant"):
            raise ValueError(f"unknown q_init {self.q_init!r}")
        if self.tie_rule not in ("split", "random"):
            raise ValueError(f"unknown tie_rule {self.tie_rule!r}")
        if self.environment == "main" and self.fixed_state is None:
            m = len(MAIN_STATES)
            for ki in self.k:
                if ki <= 0 or m % ki != 0:
                    raise ValueError(f"signal count {ki} does not divide {m}")
        if self.fixed_state is not None and self.irrelevant_signals < 1:
            raise ValueError("need at least one payoff-irrelevant signal")

    @property
    def n_firms(self) -> int:
        return len(self.k) if self.environment == "main" else 2


def desk_scale(cfg: SessionConfig) -> SessionConfig:
    """Scaled-down defaults so a full experiment runs in minutes."""
    if cfg.environment == "note":
        return replace(cfg, max_periods=min(cfg.max_periods, DESK_MAX_PERIODS))
    return replace(
        cfg,
        l=DESK_L,
        beta=None,
        nu=DESK_NU,
        max_periods=min(cfg.max_periods, DESK_MAX_PERIODS),
    )


@dataclass
class Environment:
    """Everything the kernel and the analytic scorer need, precomputed."""

    cfg: SessionConfig
    values: np.ndarray  # (m,)
    prior: np.ndarray  # (m,)
    sig: np.ndarray  # (n, m) state -> signal (partition mode)
    kvec: np.ndarray  # (n,)
    grid_objs: list[list[market.ActionGrid]]
    grids: np.ndarray  # (n, kmax, l)
    q0: np.ndarray  # (n, kmax, l)
    betas: np.ndarray  # (n,)
    benchmarks: market.Benchmarks
    structure: market.InformationStructure | None
    common_signals: int
    independent_signals: bool
    tie_split: bool
    # joint distribution of (state, signal profile): rows (prob, w, s_0..s_{n-1})
    joint: list[tuple[float, int, tuple[int, ...]]]


def _resolve_betas(cfg: SessionConfig, kvec, l: int) -> np.ndarray:
    if cfg.beta is not None:
        return np.full(len(kvec), float(cfg.beta))
    # nu mode: each firm's decay is matched to its own cell count
    return np.array([beta_from_nu(cfg.nu, int(ki), l) for ki in kvec])


def build_environment(cfg: SessionConfig) -> Environment:
    n = cfg.n_firms
    if cfg.environment == "note":
        grid = note_grid(
            cfg.note_actions, cfg.note_a, cfg.note_c, cfg.note_min_action
        )
        values = np.array([cfg.note_a])
        prior = np.array([1.0])
        grid_objs = [[grid] for _ in range(n)]
        kvec = np.ones(n, dtype=np.int64)
        sig = np.zeros((n, 1), dtype=np.int64)
        bench = market.Benchmarks(
            pi_n=float(grid.prices[0]),
            pi_m=float(cfg.note_a),
            per_signal_n=np.array([grid.prices[0]]),
            per_signal_m=np.array([cfg.note_a]),
            per_state_n=np.array([grid.prices[0]]),
            per_state_m=np.array([cfg.note_a]),
            ref_firm=0,
            info_firm=0,
        )
        structure = None
        common_signals = 0
        independent = False
        tie_split = True
        joint = [(1.0, 0, tuple(0 for _ in range(n)))]
        l = grid.l
    elif cfg.fixed_state is not None:
        ns = cfg.irrelevant_signals
        values = np.array([float(cfg.fixed_state)])
        prior = np.array([1.0])
        grid_objs = [
            [market.action_grid(float(cfg.fixed_state), cfg.l) for _ in range(ns)]
            for _ in range(n)
        ]
        kvec = np.full(n, ns, dtype=np.int64)
        sig = np.zeros((n, 1), dtype=np.int64)
        p_n = grid_objs[0][0].nash_price
        bench = market.Benchmarks(
            pi_n=p_n,
            pi_m=float(cfg.fixed_state),
            per_signal_n=np.full(ns, p_n),
            per_signal_m=np.full(ns, float(cfg.fixed_state)),
            per_state_n=np.array([p_n]),
            per_state_m=np.array([float(cfg.fixed_state)]),
            ref_firm=0,
            info_firm=0,
        )
        structure = None
        common_signals = ns
        independent = not cfg.common_signal
        tie_split = cfg.tie_rule == "split"
        if cfg.common_signal:
            joint = [(1.0 / ns, 0, tuple(s for _ in range(n))) for s in range(ns)]
        else:
            combos = np.indices((ns,) * n).reshape(n, -1).T
            joint = [
                (1.0 / ns**n, 0, tuple(int(c) for c in combo)) for combo in combos
            ]
        l = cfg.l
    else:
        space = market.StateSpace(MAIN_STATES)
        structure = market.make_structure(space, cfg.k)
        values = np.array(space.values, dtype=np.float64)
        prior = np.array(space.prior)
        grid_objs = [
            market.grids_for(part, space, cfg.l) for part in structure.partitions
        ]
        kvec = np.array(structure.signal_counts, dtype=np.int64)
        sig = np.stack(
            [market.signal_map(part, space.m) for part in structure.partitions]
        )
        bench = market.benchmark_profits(structure, grid_objs)
        common_signals = 0
        independent = False
        tie_split = cfg.tie_rule == "split"
        joint = [
            (float(prior[w]), w, tuple(int(sig[i, w]) for i in range(n)))
            for w in range(space.m)
        ]
        l = cfg.l

    kmax = int(kvec.max())
    grids = np.zeros((n, kmax, l))
    for i in range(n):
        for s, g in enumerate(grid_objs[i]):
            grids[i, s] = g.prices

    q0 = np.zeros((n, kmax, l))
    if cfg.q_init == "constant":
        q0[:] = cfg.q_init_value
    elif cfg.q_init == "uniform-opponent":
        for i in range(n):
            opp = 1 - i if n == 2 else (i + 1) % n
            if structure is not None:
                qi = learning.init_q(
                    grid_objs[i],
                    cfg.delta,
                    structure=structure,
                    firm=i,
                    opponent_grids=grid_objs[opp],
                )
            else:
                qi = learning.init_q(
                    grid_objs[i],
                    cfg.delta,
                    opponent_grids=grid_objs[opp],
                    omega=float(values[0]),
                )
            q0[i, : kvec[i]] = qi

    betas = _resolve_betas(cfg, kvec, l)
    return Environment(
        cfg=cfg,
        values=values,
        prior=prior,
        sig=sig,
        kvec=kvec,
        grid_objs=grid_objs,
        grids=grids,
        q0=q0,
        betas=betas,
        benchmarks=bench,
        structure=structure,
        common_signals=common_signals,
        independent_signals=independent,
        tie_split=tie_split,
        joint=joint,
    )


@dataclass
class Trace:
    periods: np.ndarray
    chosen_price: np.ndarray  # (rows, n)
    greedy_price: np.ndarray
    max_q: np.ndarray


@dataclass
class Scored:
    """Analytic evaluation of a pure strategy profile over the environment."""

    profits: np.ndarray  # (n,) expected per-period profit per firm
    total_profit: float
    shares: np.ndarray  # (n, m) expected share per firm and state
    state_profit: np.ndarray  # (m,) expected transaction profit per state
    state_surplus: np.ndarray  # (m,) expected buyer surplus per state
    sale_prob: np.ndarray  # (m,)
    ref_signal_profit: np.ndarray  # (k_ref,) E[transaction profit | ref signal]


def score_strategies(env: Environment, strategies: list[np.ndarray]) -> Scored:
    n = len(strategies)
    m = len(env.values)
    ref = env.benchmarks.ref_firm
    k_ref = int(env.kvec[ref])
    profits = np.zeros(n)
    shares = np.zeros((n, m))
    state_profit = np.zeros(m)
    state_surplus = np.zeros(m)
    sale_prob = np.zeros(m)
    ref_profit = np.zeros(k_ref)
    ref_weight = np.zeros(k_ref)
    state_weight = np.zeros(m)
    for prob, w, sigs in env.joint:
        prices = [
            float(env.grid_objs[i][sigs[i]].prices[strategies[i][sigs[i]]])
            for i in range(n)
        ]
        res = market.allocate_demand(prices, float(env.values[w]))
        total = sum(res.payoffs)
        pmin = min(prices)
        sale = pmin <= env.values[w]
        for i in range(n):
            profits[i] += prob * res.payoffs[i]
            shares[i, w] += prob * res.quantities[i]
        state_profit[w] += prob * total
        state_surplus[w] += prob * ((env.values[w] - pmin) if sale else 0.0)
        sale_prob[w] += prob * (1.0 if sale else 0.0)
        state_weight[w] += prob
        ref_profit[sigs[ref]] += prob * total
        ref_weight[sigs[ref]] += prob
    # normalize conditionals
    shares /= state_weight[None, :]
    state_profit /= state_weight
    state_surplus /= state_weight
    sale_prob /= state_weight
    ref_profit /= ref_weight
    return Scored(
        profits=profits,
        total_profit=float(profits.sum()),
        shares=shares,
        state_profit=state_profit,
        state_surplus=state_surplus,
        sale_prob=sale_prob,
        ref_signal_profit=ref_profit,
    )


@dataclass
class SessionOutcome:
    converged: bool
    periods: int
    strategies: list[np.ndarray]  # per firm, action index per signal
    strategy_prices: list[np.ndarray]
    scored: Scored
    session_index: int
    trace: Trace | None = None
    final_q: np.ndarray | None = None


def run_session(
    cfg: SessionConfig,
    session_index: int = 0,
    master_seed: int | None = None,
    env: Environment | None = None,
    keep_q: bool = False,
) -> SessionOutcome:
    if env is None:
        env = build_environment(cfg)
    if master_seed is None:
        master_seed = cfg.seed
    n = env.grids.shape[0]
    q = env.q0.copy()
    rng_state = engine.seed_streams(master_seed, session_index, n)
    last_action = np.zeros((n, env.grids.shape[1]), dtype=np.int64)
    for i in range(n):
        for s in range(int(env.kvec[i])):
            last_action[i, s] = int(np.argmax(q[i, s]))
    if cfg.trace:
        dense = min(cfg.trace_dense, cfg.max_periods)
        stride = cfg.trace_stride
        cap = dense + (cfg.max_periods - dense) // stride + 2
        t_period = np.zeros(cap, dtype=np.int64)
        t_price = np.zeros((cap, n))
        t_greedy = np.zeros((cap, n))
        t_maxq = np.zeros((cap, n))
    else:
        dense, stride = 0, 0
        t_period = np.zeros(0, dtype=np.int64)
        t_price = np.zeros((0, n))
        t_greedy = np.zeros((0, n))
        t_maxq = np.zeros((0, n))

    prior_cdf = np.cumsum(env.prior)
    periods, converged, n_rec = engine.run_loop(
        env.values,
        prior_cdf,
        env.sig,
        env.kvec,
        env.grids,
        q,
        cfg.alpha,
        env.betas,
        cfg.delta,
        env.common_signals,
        env.independent_signals,
        env.tie_split,
        cfg.max_periods,
        cfg.convergence_window,
        rng_state,
        last_action,
        dense,
        stride,
        t_period,
        t_price,
        t_greedy,
        t_maxq,
    )
    strategies = [last_action[i, : env.kvec[i]].copy() for i in range(n)]
    strategy_prices = [
        np.array(
            [env.grid_objs[i][s].prices[a] for s, a in enumerate(strategies[i])]
        )
        for i in range(n)
    ]
    trace = None
    if cfg.trace:
        trace = Trace(
            periods=t_period[:n_rec].copy(),
            chosen_price=t_price[:n_rec].copy(),
            greedy_price=t_greedy[:n_rec].copy(),
            max_q=t_maxq[:n_rec].copy(),
        )
    return SessionOutcome(
        converged=bool(converged),
        periods=int(periods),
        strategies=strategies,
        strategy_prices=strategy_prices,
        scored=score_strategies(env, strategies),
        session_index=session_index,
        trace=trace,
        final_q=q if keep_q else None,
    )


@dataclass
class ExperimentSummary:
    cfg: SessionConfig
    master_seed: int
    outcomes: list[SessionOutcome]
    benchmarks: market.Benchmarks
    env: Environment = field(repr=False, default=None)  # type: ignore[assignment]

    @property
    def n_sessions(self) -> int:
        return len(self.outcomes)


def run_experiment(
    cfg: SessionConfig,
    sessions: int,
    master_seed: int | None = None,
    parallel: int = 1,
    keep_q: bool = False,
) -> ExperimentSummary:
    if sessions < 1:
        raise ValueError("need at least one session")
    if master_seed is None:
        master_seed = cfg.seed
    env = build_environment(cfg)

    def one(i: int) -> SessionOutcome:
        return run_session(cfg, i, master_seed, env=env, keep_q=keep_q)

    if parallel > 1:
        with ThreadPoolExecutor(max_workers=parallel) as pool:
            outcomes = list(pool.map(one, range(sessions)))
    else:
        outcomes = [one(i) for i in range(sessions)]
    outcomes.sort(key=lambda o: o.session_index)
    return ExperimentSummary(
        cfg=cfg,
        master_seed=master_seed,
        outcomes=outcomes,
        benchmarks=env.benchmarks,
        env=env,
    )


def fixed_state_experiment(
    signal_count: int,
    sessions: int = DESK_SESSIONS,
    master_seed: int = 0,
    desk: bool = True,
    parallel: int = 1,
    wtp: float = 10.0,
) -> ExperimentSummary:
    """Degenerate prior with payoff-irrelevant signals shared by both firms."""
    if not 1 <= signal_count <= 4:
        raise ValueError(f"signal count must be in 1..4, got {signal_count}")
    cfg = SessionConfig(fixed_state=wtp, irrelevant_signals=signal_count)
    if desk:
        cfg = desk_scale(cfg)
    return run_experiment(cfg, sessions, master_seed, parallel=parallel)


def _k_of_entropy(h: int) -> int:
    return len(MAIN_STATES) >> h


NOTE_BASE = SessionConfig(
    environment="note", alpha=0.95, beta=5e-4, delta=0.95, note_actions=20
)


def preset_points(name: str) -> list[tuple[str, SessionConfig]]:
    base = SessionConfig()
    if name == "symmetric-entropy":
        return [
            (f"H({h},{h})", replace(base, k=(_k_of_entropy(h),) * 2))
            for h in range(5)
        ]
    if name == "asymmetric-entropy":
        # Winner-take-all ties: under an information asymmetry the informed
        # firm's teaching premium only shows up when ties are broken randomly.
        return [
            (f"H(0,{h})", replace(base, k=(16, _k_of_entropy(h)), tie_rule="random"))
            for h in range(5)
        ]
    if name == "entropy-grid":
        return [
            (
                f"H({h1},{h2})",
                replace(base, k=(_k_of_entropy(h1), _k_of_entropy(h2))),
            )
            for h1 in range(5)
            for h2 in range(5)
        ]
    if name == "fixed-state":
        return [
            (f"signals={ns}", SessionConfig(fixed_state=10.0, irrelevant_signals=ns))
            for ns in range(1, 5)
        ]
    if name == "robust-nu100":
        return [
            (
                f"H({h},{h})",
                replace(base, k=(_k_of_entropy(h),) * 2, beta=None, nu=100.0),
            )
            for h in range(5)
        ]
    if name == "robust-alpha":
        return [
            (
                f"alpha={a},H({h},{h})",
                replace(base, alpha=a, k=(_k_of_entropy(h),) * 2),
            )
            for a in (0.05, 0.1, 0.2)
            for h in range(5)
        ]
    if name == "note-alpha-beta":
        alphas = np.linspace(0.05, 1.0, 20)
        betas = np.linspace(5e-5, 5e-3, 21)
        return [
            (f"alpha={a:.4f},beta={b:.6f}", replace(NOTE_BASE, alpha=a, beta=b))
            for a in alphas
            for b in betas
        ]
    if name == "note-delta":
        deltas = [round(0.5 + 0.05 * i, 2) for i in range(10)] + [0.99]
        return [(f"delta={d}", replace(NOTE_BASE, delta=d)) for d in deltas]
    if name == "note-min-action":
        # Run at a moderate learning rate: near alpha = 1 every update
        # overwrites the stale optimistic values that sustain the price
        # bubble, so the floor-collapse threshold is only observable for
        # alpha well below 1.
        mins = [round(0.1 + 0.01 * i, 2) for i in range(41)]
        return [
            (f"min={p}", replace(NOTE_BASE, alpha=0.15, note_min_action=p))
            for p in mins
        ]
    if name in ("note-action-count", "note-action-count-fixed-beta"):
        mins = [round(0.2 + 0.05 * i, 2) for i in range(5)]
        counts = list(range(10, 101, 10))
        pts = []
        for p in mins:
            for m in counts:
                cfg = replace(NOTE_BASE, note_min_action=p, note_actions=m)
                if name == "note-action-count":
                    cfg = replace(cfg, beta=None, nu=100.0)
                else:
                    cfg = replace(cfg, beta=5e-4)
                pts.append((f"min={p},m={m}", cfg))
        return pts
    raise ValueError(f"unknown sweep preset {name!r}")


def sweep(
    preset: str,
    master_seed: int = 0,
    sessions: int | None = None,
    desk: bool = False,
    parallel: int = 1,
) -> dict[str, ExperimentSummary]:
    points = preset_points(preset)
    if sessions is None:
        sessions = DESK_SESSIONS if desk else 1000
    results: dict[str, ExperimentSummary] = {}
    for p, (label, cfg) in enumerate(points):
        if desk:
            cfg = desk_scale(cfg)
        seed = int(np.random.SeedSequence([master_seed, p]).generate_state(1)[0])
        results[label] = run_experiment(
            cfg, sessions, master_seed=seed, parallel=parallel
        )
    return results
