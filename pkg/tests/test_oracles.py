import itertools
import math

import numpy as np
import pytest

from rcusaddle import (
    ChannelModel,
    bsc_exact_rcu,
    bsc_exact_rcuss,
    builtin_bsc,
    exact_rcu_small,
    exact_rcus_small,
    exact_rcuss_small,
    monte_carlo_rcu,
    select_s,
    tilting_solution,
    to_nats,
)
from rcusaddle.errors import OracleUnavailableError
from rcusaddle.oracles import log_m_minus_one

ASYM = ChannelModel(W=[[0.7, 0.2, 0.1], [0.1, 0.3, 0.6]], Q=[0.4, 0.6])


def brute_force_rcu(channel, n, log_m):
    """Triple loop over (x, y, x') straight from the definition, ties included."""
    W, Q = channel.W, channel.Q
    m1 = math.expm1(log_m)
    xs = list(itertools.product(range(W.shape[0]), repeat=n))
    ys = list(itertools.product(range(W.shape[1]), repeat=n))
    qn = {x: math.prod(Q[i] for i in x) for x in xs}
    total = 0.0
    for y in ys:
        lik = {x: math.prod(W[a, b] for a, b in zip(x, y)) for x in xs}
        for x in xs:
            p = qn[x] * lik[x]
            if p == 0:
                continue
            pair = sum(qn[xb] for xb in xs if lik[xb] >= lik[x] * (1 - 1e-12))
            total += p * min(1.0, m1 * pair)
    return total


def brute_force_rcus(channel, n, log_m, s):
    W, Q = channel.W, channel.Q
    m1 = math.expm1(log_m)
    total = 0.0
    for x in itertools.product(range(W.shape[0]), repeat=n):
        for y in itertools.product(range(W.shape[1]), repeat=n):
            p = math.prod(Q[a] * W[a, b] for a, b in zip(x, y))
            if p == 0:
                continue
            info = sum(s * math.log(W[a, b]) - math.log(sum(Q[k] * W[k, b] ** s for k in range(W.shape[0])))
                       for a, b in zip(x, y))
            total += p * min(1.0, m1 * math.exp(-info))
    return total


def test_bsc_rcu_single_letter():
    assert bsc_exact_rcu(0.15, 1, math.log(2)).value == pytest.approx(0.575, abs=1e-15)


def test_m_equal_one_gives_zero(bsc):
    assert bsc_exact_rcu(0.15, 10, 0.0).value == 0.0
    assert bsc_exact_rcuss(0.15, 10, -math.inf, 1.0, weakened=True).value == 0.0
    assert exact_rcus_small(bsc, 3, 0.0, 1.0).value == 0.0
    assert exact_rcu_small(bsc, 3, 0.0).value == 0.0
    mc = monte_carlo_rcu(bsc, 10, 0.0, 1000, seed=3)
    assert mc.value == 0.0 and mc.ci_halfwidth == 0.0


def test_log_m_minus_one():
    assert log_m_minus_one(math.log(3.0)) == pytest.approx(math.log(2.0), rel=1e-15)
    assert log_m_minus_one(1e-20) == pytest.approx(math.log(1e-20), rel=1e-12)
    assert log_m_minus_one(100.0) == pytest.approx(100.0, rel=1e-15)
    assert log_m_minus_one(-1.0) == -math.inf


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_exhaustive_matches_brute_force(n):
    for log_m in (0.3, 1.0, 2.5):
        assert exact_rcu_small(ASYM, n, log_m).value == pytest.approx(brute_force_rcu(ASYM, n, log_m), rel=1e-12)
        assert exact_rcus_small(ASYM, n, log_m, 0.7).value == pytest.approx(
            brute_force_rcus(ASYM, n, log_m, 0.7), rel=1e-12)


def test_bsc_flip_count_matches_exhaustive(bsc):
    for n in range(1, 9):
        for log_m in (0.5 * n * 0.2, n * 0.2, n * 0.35):
            assert bsc_exact_rcu(0.15, n, log_m).value == pytest.approx(exact_rcu_small(bsc, n, log_m).value,
                                                                        rel=1e-12, abs=1e-15)


def test_bsc_relabel_symmetry():
    swapped = ChannelModel(W=[[0.15, 0.85], [0.85, 0.15]], Q=[0.5, 0.5])
    for n in (3, 6):
        for log_m in (0.5, 1.5):
            a = bsc_exact_rcu(0.15, n, log_m).value
            assert exact_rcu_small(swapped, n, log_m).value == pytest.approx(a, rel=1e-12)


def test_rcuss_degenerate_constant():
    # s -> 0 makes both information-density values 0, so the min argument is constant
    n, log_m = 20, 1.0
    coeff = math.exp(log_m) * 2.0 / math.sqrt(2 * math.pi * n * 0.5)
    got = bsc_exact_rcuss(0.15, n, log_m, 1e-300, psi_s=2.0, c3=0.5).value
    assert got == pytest.approx(min(1.0, coeff), rel=1e-12)


def test_rcuss_matches_exhaustive(bsc):
    sol = tilting_solution(bsc, to_nats(0.2))
    for n in (2, 5, 8):
        log_m = n * sol.rate
        a = bsc_exact_rcuss(0.15, n, log_m, sol.s, sol.psi_s, sol.c3).value
        b = exact_rcuss_small(bsc, n, log_m, sol.s, sol.psi_s, sol.c3).value
        assert a == pytest.approx(b, rel=1e-12)


@pytest.mark.parametrize("channel", [builtin_bsc(0.15), ASYM], ids=["bsc", "asym2x3"])
def test_weakening_chain(channel):
    for n in range(1, 11):
        grid = [0.1 * n, 0.25 * n] if (n < 10 or channel.output_size == 2) else [0.1 * n]
        for log_m in grid:
            s = select_s(channel, log_m / n)
            rcu = exact_rcu_small(channel, n, log_m).value
            rcus = exact_rcus_small(channel, n, log_m, s).value
            assert rcu <= rcus + 1e-12
            assert 0.0 <= rcu <= 1.0 and 0.0 <= rcus <= 1.0


def test_oracle_values_in_unit_interval():
    for n in (1, 10, 1000, 100_000):
        for rate in (0.0, 0.1, 0.3, 0.6):
            for res in (bsc_exact_rcu(0.15, n, n * rate),
                        bsc_exact_rcuss(0.15, n, n * rate, 0.7, 2.0, 0.3),
                        bsc_exact_rcuss(0.15, n, n * rate, 0.7, weakened=True)):
                assert 0.0 <= res.value <= 1.0
                assert res.exact and res.ci_halfwidth is None


def test_size_guards(bsc):
    with pytest.raises(OracleUnavailableError):
        exact_rcu_small(ASYM, 13, 1.0)
    with pytest.raises(OracleUnavailableError):
        bsc_exact_rcu(0.15, 100_001, 1.0)
    with pytest.raises(ValueError):
        bsc_exact_rcu(0.6, 10, 1.0)
    with pytest.raises(ValueError):
        monte_carlo_rcu(bsc, 10, 1.0, 999, seed=0)


def test_monte_carlo_deterministic(bsc):
    a = monte_carlo_rcu(ASYM, 15, 2.0, 1000, seed=11)
    b = monte_carlo_rcu(ASYM, 15, 2.0, 1000, seed=11)
    assert a == b
    c = monte_carlo_rcu(ASYM, 15, 2.0, 1000, seed=12)
    assert c.value != a.value


def test_monte_carlo_unbiased_over_seeds(bsc):
    n, log_m = 20, 20 * 0.2
    exact = bsc_exact_rcu(0.15, n, log_m).value
    estimates = np.array([monte_carlo_rcu(bsc, n, log_m, 1000, seed=k).value for k in range(50)])
    assert abs(estimates.mean() - exact) < 4 * estimates.std(ddof=1) / math.sqrt(50)


def test_monte_carlo_general_channel_within_ci():
    n, log_m = 8, 0.8
    exact = exact_rcu_small(ASYM, n, log_m).value
    mc = monte_carlo_rcu(ASYM, n, log_m, 4000, seed=5)
    assert abs(mc.value - exact) <= 3 / 1.96 * mc.ci_halfwidth


def test_monte_carlo_tilted_matches_exact_at_n500(bsc):
    n = 500
    rate = to_nats(0.2)
    exact = bsc_exact_rcu(0.15, n, n * rate).value
    sol = tilting_solution(bsc, rate)
    mc = monte_carlo_rcu(bsc, n, n * rate, 2000, seed=1, tilt=(sol.rho_hat, sol.s))
    assert abs(mc.value - exact) <= 3 / 1.96 * mc.ci_halfwidth
    assert mc.ci_halfwidth < 0.2 * exact
