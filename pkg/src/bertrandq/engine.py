"""Numba inner loop for one learning session.

The loop is deterministic given the seed material: every stream is an
explicit xoroshiro128++ state held in `rng_state` (one row per firm plus a
final row for nature), seeded outside via numpy SeedSequence. No global RNG
is touched, so sessions can run concurrently on threads (nogil).
"""

from __future__ import annotations

import numpy as np
from numba import njit

U64 = np.uint64
_INV53 = 1.0 / 9007199254740992.0  # 2**-53


def seed_streams(master_seed: int, session_index: int, n_firms: int) -> np.ndarray:
    """Independent per-firm streams plus a nature stream.

    Derivation (stable across versions): stream j of session i is
    SeedSequence([master_seed, session_index, j]) with j = n_firms for nature.
    """
    state = np.empty((n_firms + 1, 2), dtype=np.uint64)
    for j in range(n_firms + 1):
        ss = np.random.SeedSequence([master_seed, session_index, j])
        state[j] = ss.generate_state(2, np.uint64)
    return state


@njit(inline="always")
def _rotl(x, r):
    return (x << r) | (x >> (U64(64) - r))


@njit(inline="always")
def _next_u64(state, i):
    s0 = state[i, 0]
    s1 = state[i, 1]
    result = _rotl(s0 + s1, U64(17)) + s0
    s1 ^= s0
    state[i, 0] = _rotl(s0, U64(49)) ^ s1 ^ (s1 << U64(21))
    state[i, 1] = _rotl(s1, U64(28))
    return result


@njit(inline="always")
def _uniform(state, i):
    return (_next_u64(state, i) >> U64(11)) * _INV53


@njit(inline="always")
def _randint(state, i, n):
    # n <= a few hundred here; modulo bias at 2**-53 scale is immaterial
    j = int(_uniform(state, i) * n)
    return j if j < n else n - 1


@njit(nogil=True, cache=True)
def run_loop(
    values,  # (m,) WTP per state
    prior_cdf,  # (m,)
    sig,  # (n, m) state -> signal
    kvec,  # (n,) signals per firm
    grids,  # (n, kmax, l) prices
    q,  # (n, kmax, l), mutated in place
    alpha,
    betas,  # (n,)
    delta,
    common_signals,  # 0: partition signals; >0: payoff-irrelevant signal count
    independent_signals,  # irrelevant signals drawn per firm instead of shared
    tie_split,  # True: tied firms split demand (continuum); False: random winner
    max_periods,
    window,
    rng_state,  # (n+1, 2) uint64, mutated
    last_action,  # (n, kmax), pre-seeded greedily, mutated
    trace_dense,
    trace_stride,  # 0 disables tracing
    trace_period,
    trace_price,
    trace_greedy,
    trace_maxq,
):
    n = grids.shape[0]
    l = grids.shape[2]
    m = values.shape[0]
    nature = n

    streak = np.zeros(n, dtype=np.int64)
    prev_s = np.full(n, -1, dtype=np.int64)
    prev_a = np.zeros(n, dtype=np.int64)
    prev_pay = np.zeros(n)
    sig_t = np.zeros(n, dtype=np.int64)
    act_t = np.zeros(n, dtype=np.int64)
    prices = np.zeros(n)

    converged = False
    n_rec = 0
    t = 0
    while t < max_periods:
        # nature: draw the state, then the signals
        if m == 1:
            w = 0
        else:
            u = _uniform(rng_state, nature)
            w = 0
            while prior_cdf[w] <= u:
                w += 1
        if common_signals > 0:
            if independent_signals:
                for i in range(n):
                    sig_t[i] = _randint(rng_state, nature, common_signals)
            else:
                cs = _randint(rng_state, nature, common_signals)
                for i in range(n):
                    sig_t[i] = cs
        else:
            for i in range(n):
                sig_t[i] = sig[i, w]

        # settle last period's cells now that the next signal is known
        for i in range(n):
            if prev_s[i] >= 0:
                row = q[i, sig_t[i]]
                mx = row[0]
                for a in range(1, l):
                    if row[a] > mx:
                        mx = row[a]
                cell = q[i, prev_s[i], prev_a[i]]
                q[i, prev_s[i], prev_a[i]] = (1.0 - alpha) * cell + alpha * (
                    prev_pay[i] + delta * mx
                )

        # epsilon-greedy choices
        for i in range(n):
            s = sig_t[i]
            eps = np.exp(-betas[i] * t)
            if _uniform(rng_state, i) < eps:
                a = _randint(rng_state, i, l)
            else:
                row = q[i, s]
                mx = row[0]
                ties = 1
                for b in range(1, l):
                    if row[b] > mx:
                        mx = row[b]
                        ties = 1
                    elif row[b] == mx:
                        ties += 1
                if ties == 1:
                    a = 0
                    for b in range(l):
                        if row[b] == mx:
                            a = b
                            break
                else:
                    pick = _randint(rng_state, i, ties)
                    a = 0
                    seen = 0
                    for b in range(l):
                        if row[b] == mx:
                            if seen == pick:
                                a = b
                                break
                            seen += 1
            act_t[i] = a
            prices[i] = grids[i, s, a]
            if a != last_action[i, s]:
                last_action[i, s] = a
                streak[i] = 0
            else:
                streak[i] += 1

        # demand allocation
        wtp = values[w]
        pmin = prices[0]
        for i in range(1, n):
            if prices[i] < pmin:
                pmin = prices[i]
        for i in range(n):
            prev_pay[i] = 0.0
        if pmin <= wtp:
            ties = 0
            for i in range(n):
                if prices[i] == pmin:
                    ties += 1
            if tie_split:
                for i in range(n):
                    if prices[i] == pmin:
                        prev_pay[i] = prices[i] / ties
            else:
                if ties == 1:
                    for i in range(n):
                        if prices[i] == pmin:
                            prev_pay[i] = prices[i]
                else:
                    pick = _randint(rng_state, nature, ties)
                    seen = 0
                    for i in range(n):
                        if prices[i] == pmin:
                            if seen == pick:
                                prev_pay[i] = prices[i]
                                break
                            seen += 1
        for i in range(n):
            prev_s[i] = sig_t[i]
            prev_a[i] = act_t[i]

        if trace_stride > 0 and (
            t < trace_dense or t % trace_stride == 0
        ):
            if n_rec < trace_period.shape[0]:
                trace_period[n_rec] = t
                for i in range(n):
                    s = sig_t[i]
                    row = q[i, s]
                    mx = row[0]
                    g = 0
                    for b in range(1, l):
                        if row[b] > mx:
                            mx = row[b]
                            g = b
                    trace_price[n_rec, i] = prices[i]
                    trace_greedy[n_rec, i] = grids[i, s, g]
                    trace_maxq[n_rec, i] = mx
                n_rec += 1

        t += 1
        done = True
        for i in range(n):
            if streak[i] < window:
                done = False
                break
        if done:
            converged = True
            break

    return t, converged, n_rec
