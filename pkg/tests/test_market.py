"""Economic-environment unit tests: partitions, grids, demand, benchmarks.

Benchmark values are checked against independent brute-force oracles coded
directly in this file, not against the library's own formulas.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bertrandq import market
from bertrandq.market import (
    ActionGrid,
    StateSpace,
    action_grid,
    allocate_demand,
    benchmark_profits,
    build_partition,
    grids_for,
    make_structure,
    monopoly_price,
    nash_strategy,
    reference_firms,
    shannon_entropy,
    signal_map,
    signal_of,
    verify_bne,
)

SPACE = StateSpace()
DIVISORS = [1, 2, 4, 8, 16]


# ---------------------------------------------------------------- state space


def test_baseline_space():
    assert SPACE.m == 16
    assert SPACE.values == tuple(range(5, 21))
    assert all(p == 1 / 16 for p in SPACE.prior)
    assert SPACE.index_of(5) == 0
    assert SPACE.index_of(20) == 15


def test_space_validation():
    with pytest.raises(ValueError):
        StateSpace(values=(1.0, 1.0))  # not strictly increasing
    with pytest.raises(ValueError):
        StateSpace(values=(1.0, 2.0), prior=(0.5, 0.6))  # does not sum to 1
    with pytest.raises(ValueError):
        StateSpace(values=(1.0, 2.0), prior=(1.0, 0.0))  # zero probability
    with pytest.raises(ValueError):
        SPACE.index_of(4.5)


# ----------------------------------------------------------------- partitions


@pytest.mark.parametrize("k", DIVISORS)
def test_partition_covers_states(k):
    part = build_partition(16, k)
    assert part.k == k
    covered = [w for s in range(k) for w in part.states_in(s)]
    assert covered == list(range(16))
    sizes = {len(list(part.states_in(s))) for s in range(k)}
    assert sizes == {16 // k}


def test_partition_errors():
    with pytest.raises(ValueError):
        build_partition(16, 3)
    with pytest.raises(ValueError):
        build_partition(16, 0)


@pytest.mark.parametrize("k", DIVISORS)
def test_signal_of_matches_map(k):
    part = build_partition(16, k)
    dense = signal_map(part, 16)
    for w, omega in enumerate(SPACE.values):
        assert signal_of(part, SPACE, omega) == dense[w]


def test_entropy_mapping_exact():
    # information precision 1/k for k = 16, 8, 4, 2, 1 -> 0, 1, 2, 3, 4 bits
    for h, k in zip(range(5), [16, 8, 4, 2, 1]):
        structure = make_structure(SPACE, (k, k))
        assert structure.entropies == (float(h), float(h))


def test_posterior_entropy_agrees_with_shannon():
    for k in DIVISORS:
        part = build_partition(16, k)
        size = 16 // k
        posterior = np.full(size, 1.0 / size)
        structure = make_structure(SPACE, (k,))
        assert shannon_entropy(posterior) == pytest.approx(
            structure.entropies[0], abs=1e-12
        )


# ---------------------------------------------------------------- price grids


def test_integer_grid_at_coarse_scale():
    grid = action_grid(20.0, 20)
    assert np.array_equal(grid.prices, np.arange(2.0, 22.0))
    assert grid.nash_price == 2.0
    assert grid.step == 1.0
    assert grid.prices[grid.l - 2] == 20.0  # signal maximum sits at l-2


@given(
    l=st.integers(min_value=2, max_value=400),
    top=st.sampled_from([float(v) for v in SPACE.values]),
)
def test_grid_shape_properties(l, top):
    grid = action_grid(top, l)
    assert grid.l == l
    assert np.all(np.diff(grid.prices) > 0)
    assert grid.prices[0] == pytest.approx(2 * top / l, rel=1e-12)
    assert grid.prices[-1] == pytest.approx(top * (l + 1) / l, rel=1e-12)
    assert grid.nash_price == grid.prices.min()
    # every price recoverable from its own value
    assert grid.index_of_price(float(grid.prices[l // 2])) == l // 2


def test_grid_errors():
    with pytest.raises(ValueError):
        action_grid(20.0, 1)
    with pytest.raises(ValueError):
        action_grid(0.0, 20)
    with pytest.raises(ValueError):
        action_grid(20.0, 20).index_of_price(2.5)


def test_grids_for_scale_to_signal_max():
    part = build_partition(16, 4)
    grids = grids_for(part, SPACE, 20)
    assert [g.signal_max for g in grids] == [8.0, 12.0, 16.0, 20.0]


# --------------------------------------------------------------------- demand


def test_demand_examples():
    res = allocate_demand((4.0, 4.0), 5.0)
    assert res.quantities == (0.5, 0.5)
    assert res.payoffs == (2.0, 2.0)
    res = allocate_demand((3.0, 4.0), 5.0)
    assert res.quantities == (1.0, 0.0)
    assert res.payoffs == (3.0, 0.0)
    res = allocate_demand((6.0, 7.0), 5.0)  # min price above WTP: no sale
    assert res.quantities == (0.0, 0.0)
    assert res.payoffs == (0.0, 0.0)


@given(
    prices=st.lists(
        st.floats(min_value=0.1, max_value=25.0, allow_nan=False),
        min_size=2,
        max_size=4,
    ),
    omega=st.sampled_from([float(v) for v in SPACE.values]),
)
def test_demand_conservation(prices, omega):
    res = allocate_demand(prices, omega)
    total = sum(res.quantities)
    if min(prices) <= omega:
        assert total == pytest.approx(1.0, abs=1e-12)
    else:
        assert total == 0.0
    for p, q, pay in zip(prices, res.quantities, res.payoffs):
        assert pay == pytest.approx(p * q, abs=1e-12)


def test_realized_mode_matches_analytic_in_expectation():
    rng = np.random.default_rng(7)
    prices = (4.0, 4.0, 6.0)
    draws = 100_000
    counts = np.zeros(3)
    for _ in range(draws):
        counts += allocate_demand(prices, 5.0, rng=rng).quantities
    expected = np.array(allocate_demand(prices, 5.0).quantities)
    # binomial 3-sigma band per firm
    sigma = np.sqrt(np.maximum(expected * (1 - expected), 1e-12) / draws)
    assert np.all(np.abs(counts / draws - expected) <= 3 * sigma + 1e-9)


def test_realized_mode_is_winner_take_all():
    rng = np.random.default_rng(3)
    res = allocate_demand((4.0, 4.0), 5.0, rng=rng)
    assert sorted(res.quantities) == [0.0, 1.0]


# ----------------------------------------------------------------- benchmarks


def brute_monopoly(states, weights, prices):
    """Independent argmax of p * Prob(omega >= p), lowest-price tie-break."""
    weights = np.asarray(weights, dtype=float)
    weights = weights / weights.sum()
    best_p, best_profit = None, -1.0
    for p in prices:
        profit = float(p) * float(
            sum(w for s, w in zip(states, weights) if s >= p)
        )
        if profit > best_profit + 1e-15:
            best_profit = profit
            best_p = float(p)
    return best_p, best_profit


def test_monopoly_oracle_full_support():
    grid = action_grid(20.0, 200)
    price, profit = monopoly_price(SPACE.values, SPACE.prior, grid)
    bp, bprof = brute_monopoly(SPACE.values, SPACE.prior, grid.prices)
    assert price == bp
    assert profit == pytest.approx(bprof, abs=1e-12)
    # the documented genuine tie: 10 and 11 both attain 6.875; lowest wins
    assert price == 10.0
    assert profit == pytest.approx(6.875, abs=1e-12)
    profits = grid.prices * (
        (np.array(SPACE.values)[None, :] >= grid.prices[:, None])
        @ np.array(SPACE.prior)
    )
    ties = set(np.round(grid.prices[np.isclose(profits, profits.max())], 9))
    assert ties == {10.0, 11.0}


@pytest.mark.parametrize("k", DIVISORS)
@pytest.mark.parametrize("l", [20, 200])
def test_monopoly_oracle_every_signal(k, l):
    part = build_partition(16, k)
    grids = grids_for(part, SPACE, l)
    values = np.array(SPACE.values, dtype=float)
    prior = np.array(SPACE.prior)
    for s in range(k):
        idx = list(part.states_in(s))
        price, profit = monopoly_price(values[idx], prior[idx], grids[s])
        bp, bprof = brute_monopoly(values[idx], prior[idx], grids[s].prices)
        assert price == bp
        assert profit == pytest.approx(bprof, abs=1e-12)


def brute_benchmarks(ks, l):
    """Independent overall pi^N / pi^M for a symmetric or asymmetric pair."""
    parts = [build_partition(16, k) for k in ks]
    grids = [grids_for(p, SPACE, l) for p in parts]
    sig = [signal_map(p, 16) for p in parts]
    values = np.array(SPACE.values, dtype=float)
    prior = np.array(SPACE.prior)
    pi_n = 0.0
    for w in range(16):
        quotes = [grids[i][sig[i][w]].prices[0] for i in range(len(ks))]
        pi_n += prior[w] * min(quotes)
    info = int(np.argmax(ks))
    pi_m = 0.0
    for s in range(parts[info].k):
        idx = list(parts[info].states_in(s))
        p_m, _ = brute_monopoly(values[idx], prior[idx], grids[info][s].prices)
        for w in idx:
            pi_m += prior[w] * (p_m if p_m <= values[w] else 0.0)
    return pi_n, pi_m


@pytest.mark.parametrize("ks", [(1, 1), (4, 4), (16, 16), (16, 1), (16, 4)])
@pytest.mark.parametrize("l", [20, 200])
def test_benchmark_profits_oracle(ks, l):
    structure = make_structure(SPACE, ks)
    grids = [grids_for(p, SPACE, l) for p in structure.partitions]
    bench = benchmark_profits(structure, grids)
    pi_n, pi_m = brute_benchmarks(ks, l)
    assert bench.pi_n == pytest.approx(pi_n, abs=1e-12)
    assert bench.pi_m == pytest.approx(pi_m, abs=1e-12)
    # per-signal values aggregate back to the overall numbers
    prior = np.array(SPACE.prior)
    ref = structure.partitions[bench.ref_firm]
    weights = np.array([prior[list(ref.states_in(s))].sum() for s in range(ref.k)])
    assert weights @ bench.per_signal_n == pytest.approx(pi_n, abs=1e-12)
    assert weights @ bench.per_signal_m == pytest.approx(pi_m, abs=1e-12)
    assert prior @ bench.per_state_n == pytest.approx(pi_n, abs=1e-12)
    # the per-state monopoly cap dominates what the monopoly strategy attains
    assert np.all(bench.per_state_m >= -1e-12)


def test_reference_firms():
    structure = make_structure(SPACE, (16, 1))
    assert reference_firms(structure) == (1, 0)
    bench = benchmark_profits(
        structure, [grids_for(p, SPACE, 20) for p in structure.partitions]
    )
    assert bench.ref_firm == 1 and bench.info_firm == 0
    assert len(bench.per_signal_n) == 1  # indexed by the less informed firm


def test_uninformed_benchmarks_flat_grid():
    structure = make_structure(SPACE, (1, 1))
    grids = [grids_for(p, SPACE, 200) for p in structure.partitions]
    bench = benchmark_profits(structure, grids)
    assert bench.pi_n == pytest.approx(0.2, abs=1e-12)  # 20 * 2/200, sells always
    assert bench.pi_m == pytest.approx(6.875, abs=1e-12)


# ------------------------------------------------------------------- entropy


def test_shannon_entropy_values():
    assert shannon_entropy([1.0]) == 0.0
    assert shannon_entropy([0.5, 0.5]) == pytest.approx(1.0, abs=1e-12)
    assert shannon_entropy([0.5, 0.5, 0.0]) == pytest.approx(1.0, abs=1e-12)
    assert shannon_entropy(np.full(16, 1 / 16)) == pytest.approx(4.0, abs=1e-12)
    with pytest.raises(ValueError):
        shannon_entropy([0.9, 0.2])
    with pytest.raises(ValueError):
        shannon_entropy([-0.5, 1.5])


@given(
    weights=st.lists(
        st.floats(min_value=1e-6, max_value=1.0), min_size=1, max_size=12
    )
)
def test_entropy_bounds(weights):
    w = np.array(weights) / np.sum(weights)
    h = shannon_entropy(w)
    assert -1e-9 <= h <= math.log2(len(w)) + 1e-9


# ------------------------------------------------------------------ BNE check


@pytest.mark.parametrize("ks", [(1, 1), (2, 2), (4, 4), (8, 8), (16, 16)])
@pytest.mark.parametrize("l", [20, 200])
def test_all_nash_profile_is_equilibrium(ks, l):
    structure = make_structure(SPACE, ks)
    grids = [grids_for(p, SPACE, l) for p in structure.partitions]
    verdict = verify_bne(structure, grids, nash_strategy(structure, grids))
    assert verdict.is_equilibrium
    assert bool(verdict)
    assert verdict.deviations == ()


@pytest.mark.parametrize("ks", [(1, 1), (4, 4)])
def test_raised_price_creates_deviation_for_rival(ks):
    structure = make_structure(SPACE, ks)
    grids = [grids_for(p, SPACE, 20) for p in structure.partitions]
    strategy = nash_strategy(structure, grids)
    strategy[0] = strategy[0].copy()
    strategy[0][0] = 5  # firm 0 raises its quote at its first signal
    verdict = verify_bne(structure, grids, strategy)
    assert not verdict.is_equilibrium
    assert any(d.firm == 1 and d.gain > 0 for d in verdict.deviations)


def test_verify_bne_rejects_out_of_range_action():
    structure = make_structure(SPACE, (1, 1))
    grids = [grids_for(p, SPACE, 20) for p in structure.partitions]
    strategy = nash_strategy(structure, grids)
    strategy[0] = np.array([99])
    with pytest.raises(ValueError):
        verify_bne(structure, grids, strategy)
