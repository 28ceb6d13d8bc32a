"""Metrics unit tests: collusion indices, welfare, shares, correlations.

Synthetic strategy profiles are scored analytically, so every statistic can be
checked against hand-computed values.
"""

import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bertrandq import metrics
from bertrandq.harness import (
    ExperimentSummary,
    SessionConfig,
    SessionOutcome,
    build_environment,
    desk_scale,
    run_experiment,
    score_strategies,
)
from bertrandq.metrics import (
    collusion_index,
    market_division,
    overall_ci,
    pearson_matrix,
    per_signal_ci,
    per_state_ci,
    price_extremes,
    summarize,
    weighted_collusion_index,
    welfare,
    welfare_of,
)

DESK = desk_scale(SessionConfig())


def make_outcome(env, strategies, index=0, converged=True):
    strategies = [np.asarray(s, dtype=np.int64) for s in strategies]
    prices = [
        np.array(
            [env.grid_objs[i][s].prices[a] for s, a in enumerate(strategies[i])]
        )
        for i in range(len(strategies))
    ]
    return SessionOutcome(
        converged=converged,
        periods=0,
        strategies=strategies,
        strategy_prices=prices,
        scored=score_strategies(env, strategies),
        session_index=index,
    )


def nash_profile(env):
    return [np.zeros(int(k), dtype=np.int64) for k in env.kvec]


def monopoly_profile(env):
    # index l-2 prices exactly the signal's top WTP
    return [np.full(int(k), env.grids.shape[2] - 2, dtype=np.int64) for k in env.kvec]


# ----------------------------------------------------------- index arithmetic


def test_collusion_index_endpoints():
    assert collusion_index(0.2, 0.2, 6.875) == 0.0
    assert collusion_index(6.875, 0.2, 6.875) == 1.0


@given(
    pi=st.floats(min_value=-5, max_value=30),
    t=st.floats(min_value=0, max_value=1),
)
def test_collusion_index_affine(pi, t):
    # affinity: CI of a convex combination is the combination of CIs
    lo, hi = 0.2, 12.5
    mix = (1 - t) * pi + t * hi
    want = (1 - t) * collusion_index(pi, lo, hi) + t * 1.0
    assert math.isclose(collusion_index(mix, lo, hi), want, abs_tol=1e-9)


def test_collusion_index_degenerate():
    with pytest.raises(ValueError):
        collusion_index(1.0, 5.0, 5.0)
    with pytest.raises(ValueError):
        collusion_index(1.0, 5.0, 4.0)


def test_weighted_ci():
    # weight 0 selects the second firm's monopoly benchmark
    assert weighted_collusion_index(3.0, 0.2, 12.5, 6.875, 0.0) == collusion_index(
        3.0, 0.2, 6.875
    )
    assert weighted_collusion_index(0.2, 0.2, 12.5, 6.875, 0.5) == 0.0
    with pytest.raises(ValueError):
        weighted_collusion_index(1.0, 0.2, 12.5, 6.875, 1.5)


# --------------------------------------------------- scored-profile endpoints


@pytest.mark.parametrize("ks", [(16, 16), (16, 1), (4, 4)])
def test_nash_profile_scores_zero(ks):
    env = build_environment(replace(DESK, k=ks))
    out = make_outcome(env, nash_profile(env))
    bench = env.benchmarks
    assert np.allclose(overall_ci([out], bench), 0.0, atol=1e-12)
    assert np.allclose(per_signal_ci([out], bench), 0.0, atol=1e-12)
    assert np.allclose(per_state_ci([out], bench), 0.0, atol=1e-12)


def test_monopoly_profile_scores_one():
    env = build_environment(replace(DESK, k=(16, 16)))
    out = make_outcome(env, monopoly_profile(env))
    bench = env.benchmarks
    assert np.allclose(overall_ci([out], bench), 1.0, atol=1e-12)
    assert np.allclose(per_signal_ci([out], bench), 1.0, atol=1e-12)
    assert np.allclose(per_state_ci([out], bench), 1.0, atol=1e-12)


def test_welfare_accounting():
    env = build_environment(replace(DESK, k=(16, 16)))
    nash = make_outcome(env, nash_profile(env))
    mono = make_outcome(env, monopoly_profile(env))
    wn = welfare_of(nash, env.prior)
    wm = welfare_of(mono, env.prior)
    # every sale executes in both profiles, so total surplus is E[WTP] = 12.5
    assert math.isclose(wn.social_welfare, 12.5, rel_tol=1e-12)
    assert math.isclose(wm.social_welfare, 12.5, rel_tol=1e-12)
    # Nash prices are WTP/10; full discrimination extracts everything
    assert math.isclose(wn.industry_profit, 1.25, rel_tol=1e-12)
    assert math.isclose(wm.consumer_surplus, 0.0, abs_tol=1e-12)
    assert math.isclose(
        wn.social_welfare, wn.industry_profit + wn.consumer_surplus, rel_tol=1e-12
    )
    avg = welfare([nash, mono], env.prior)
    assert math.isclose(
        avg.industry_profit, (wn.industry_profit + wm.industry_profit) / 2
    )


def test_market_division_split_and_undercut():
    env = build_environment(replace(DESK, k=(16, 16)))
    same = make_outcome(env, nash_profile(env))
    assert np.allclose(market_division([same]), 0.5, atol=1e-12)
    undercut = make_outcome(
        env,
        [np.zeros(16, dtype=np.int64), np.ones(16, dtype=np.int64)],
    )
    div = market_division([undercut])
    assert np.allclose(div[0], 1.0, atol=1e-12)
    assert np.allclose(div[1], 0.0, atol=1e-12)


def test_price_extremes():
    env = build_environment(replace(DESK, k=(16, 16)))
    const = make_outcome(env, [np.full(16, 3, dtype=np.int64)] * 2)
    ext = price_extremes(const)
    assert ext.shape == (2, 2)
    # the informed grid scales with the signal, so a constant action index
    # still spans prices; top-of-signal quotes span exactly [5, 20]
    top = make_outcome(env, monopoly_profile(env))
    ext = price_extremes(top)
    assert np.allclose(ext, [[20.0, 5.0], [20.0, 5.0]])


# --------------------------------------------------------------- correlations


def test_pearson_perfect():
    x = np.array([[1.0, 2.0], [2.0, 4.0], [3.0, 6.0]])
    assert np.allclose(pearson_matrix(x), 1.0)
    y = np.array([[1.0, -1.0], [2.0, -2.0], [3.0, -3.0]])
    rho = pearson_matrix(y)
    assert np.allclose(np.diag(rho), 1.0)
    assert math.isclose(rho[0, 1], -1.0, abs_tol=1e-12)


def test_pearson_matches_numpy():
    rng = np.random.default_rng(7)
    x = rng.normal(size=(40, 4))
    assert np.allclose(pearson_matrix(x), np.corrcoef(x, rowvar=False), atol=1e-12)


def test_pearson_degenerate_column_is_nan():
    x = np.array([[1.0, 5.0], [2.0, 5.0], [3.0, 5.0]])
    rho = pearson_matrix(x)
    assert np.isnan(rho[0, 1]) and np.isnan(rho[1, 1])
    assert math.isclose(rho[0, 0], 1.0)


def test_pearson_needs_two_rows():
    with pytest.raises(ValueError):
        pearson_matrix(np.ones((1, 3)))


# ------------------------------------------------------------------ summarize


def synthetic_summary(ks=(16, 16), n=3):
    cfg = replace(DESK, k=ks)
    env = build_environment(cfg)
    outs = []
    for i in range(n):
        prof = nash_profile(env) if i % 2 else monopoly_profile(env)
        outs.append(make_outcome(env, prof, index=i, converged=(i != 1)))
    return ExperimentSummary(
        cfg=cfg, master_seed=0, outcomes=outs, benchmarks=env.benchmarks, env=env
    )


def test_summarize_shapes_and_flags():
    em = summarize(synthetic_summary())
    assert em.ci.shape == (3,)
    assert em.ci_per_signal.shape == (3, 16)
    assert em.ci_per_state.shape == (3, 16)
    assert em.correlation.shape == (16, 16)
    assert em.shares.shape == (2, 16)
    assert em.extremes.shape == (3, 2, 2)
    assert em.profits.shape == (3, 2)
    assert em.n_unconverged == 1
    assert math.isclose(em.mean_ci, 2.0 / 3.0, rel_tol=1e-12)


def test_summarize_can_exclude_unconverged():
    em = summarize(synthetic_summary(), include_unconverged=False)
    assert em.ci.shape == (2,)
    assert em.n_unconverged == 0
    assert math.isclose(em.mean_ci, 1.0, rel_tol=1e-12)


def test_summarize_requires_a_converged_session():
    s = synthetic_summary()
    for o in s.outcomes:
        o.converged = False
    with pytest.raises(ValueError):
        summarize(s, include_unconverged=False)


def test_summarize_on_simulated_note_sessions():
    cfg = SessionConfig(
        environment="note",
        alpha=0.15,
        beta=5e-4,
        delta=0.95,
        convergence_window=20_000,
        max_periods=200_000,
    )
    em = summarize(run_experiment(cfg, 4, master_seed=0))
    assert em.ci.shape == (4,)
    assert em.ci_per_signal.shape == (4, 1)
    assert np.isfinite(em.ci).all()
    assert em.periods.shape == (4,)
    assert (em.periods <= 200_000).all()
