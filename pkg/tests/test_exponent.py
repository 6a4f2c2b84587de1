import math

import numpy as np
import pytest

from rcusaddle import (
    c1_c2,
    critical_rate,
    density_moments,
    e0,
    information_density,
    random_coding_exponent,
    rho_hat,
    select_s,
    tilting_solution,
    to_bits,
    to_nats,
)
from rcusaddle.errors import DegenerateChannelError, SingularChannelError
from rcusaddle.exponent import _fixed_point_residual

from oracle_e0 import fd_derivatives


def _i_s(ch, s):
    return density_moments(information_density(ch, s)).mean


def test_critical_rate_bsc(bsc):
    assert to_bits(critical_rate(bsc, 0.5)) == pytest.approx(0.124, abs=1e-3)


def test_critical_rate_trivial_channels(identical_rows, noiseless3):
    assert critical_rate(identical_rows, 0.5) == pytest.approx(0.0, abs=1e-15)
    assert critical_rate(noiseless3, 0.5) == pytest.approx(math.log(3), rel=1e-14)


def test_rho_hat_boundaries(bsc, nonlattice):
    for ch in (bsc, nonlattice):
        for s in (0.5, 0.55, 0.6):
            r_cr, i_s = critical_rate(ch, s), _i_s(ch, s)
            assert r_cr > 0
            assert rho_hat(ch, 1.01 * i_s, s) == 0.0
            assert rho_hat(ch, 0.5 * r_cr, s) == 1.0
            assert rho_hat(ch, r_cr, s) == 1.0
            assert rho_hat(ch, i_s, s) == 0.0


def test_rho_hat_stationary_against_finite_difference(bsc):
    s = 0.5
    rate = 0.5 * (critical_rate(bsc, s) + _i_s(bsc, s))
    rho = rho_hat(bsc, rate, s)
    assert 0 < rho < 1
    slope, _ = fd_derivatives(bsc.W.tolist(), bsc.Q.tolist(), rho, s)
    assert abs(slope - rate) <= 1e-10


def test_c1_sign_pattern(bsc, nonlattice):
    for ch in (bsc, nonlattice):
        s = 0.5
        r_cr, i_s = critical_rate(ch, s), _i_s(ch, s)
        c1, c2 = c1_c2(ch, 0.0, s)
        assert c1 < 0 and rho_hat(ch, 0.0, s) == 1.0
        c1, _ = c1_c2(ch, 0.5 * r_cr, s)
        assert c1 < 0
        assert c1_c2(ch, r_cr, s)[0] == pytest.approx(0.0, abs=1e-12)
        assert c1_c2(ch, 0.5 * (r_cr + i_s), s)[0] == pytest.approx(0.0, abs=1e-10)
        assert c1_c2(ch, i_s, s)[0] == pytest.approx(0.0, abs=1e-12)
        c1, c2 = c1_c2(ch, 2 * i_s, s)
        assert c1 == pytest.approx(i_s, rel=1e-12) and c1 > 0
        assert c2 > 0


def test_c1_at_zero_rate_is_minus_critical_slope(bsc):
    c1, _ = c1_c2(bsc, 0.0, 0.5)
    assert c1 == pytest.approx(-0.0858695, abs=1e-7)


def test_rho_hat_monotone(bsc, random34):
    for ch in (bsc, random34):
        s = 0.8
        r_cr, i_s = critical_rate(ch, s), _i_s(ch, s)
        rates = np.linspace(0, 1.2 * i_s, 200)
        rhos = np.array([rho_hat(ch, r, s) for r in rates])
        assert np.all(np.diff(rhos) <= 0)
        inner = (rates > r_cr) & (rates < i_s)
        assert np.all(np.diff(rhos[inner]) < 0)


def test_random_coding_exponent_matches_grid(bsc, random34):
    rhos = np.linspace(0, 1, 201)
    svals = np.linspace(0.3, 2.0, 171)
    for ch in (bsc, random34):
        for rate in (0.0, 0.05, 0.1, 0.2):
            er, rho, s = random_coding_exponent(ch, rate)
            grid = max(e0(ch, r, s_) - r * rate for r in rhos[::10] for s_ in svals[::10])
            fine = max(e0(ch, r, 1 / (1 + r)) - r * rate for r in rhos)
            assert er >= grid - 1e-8
            assert er >= fine - 1e-8
            assert er - fine <= 1e-4
            assert er == pytest.approx(e0(ch, rho, s) - rho * rate, rel=1e-14)


def test_random_coding_exponent_shape(bsc):
    cap = _i_s(bsc, 1.0)
    rates = np.linspace(0, 1.3 * cap, 60)
    er = np.array([random_coding_exponent(bsc, r)[0] for r in rates])
    assert np.all(np.diff(er) <= 1e-12)
    assert np.all(np.diff(er, 2) >= -1e-9)
    assert np.all(er[rates >= cap] == pytest.approx(0.0, abs=1e-12))


def test_random_coding_exponent_examples(bsc):
    er, rho, s = random_coding_exponent(bsc, 0.0)
    assert er == pytest.approx(0.154234, abs=1e-6)
    assert rho == 1.0 and s == 0.5
    er, rho, s = random_coding_exponent(bsc, 0.5)
    assert er == 0.0 and rho == 0.0 and s == 1.0
    er, rho, s = random_coding_exponent(bsc, critical_rate(bsc, 0.5))
    assert rho == pytest.approx(1.0, abs=1e-9)


def test_select_s_regimes(bsc, nonlattice, random34):
    for ch in (bsc, nonlattice, random34):
        cap = _i_s(ch, 1.0)
        assert select_s(ch, 1.1 * cap) == 1.0
        assert select_s(ch, 0.0) == 0.5
        for frac in (0.3, 0.5, 0.7, 0.9):
            rate = frac * cap
            s = select_s(ch, rate)
            assert 0.5 <= s <= 1.0
            assert _fixed_point_residual(ch, rate, s) <= 1e-9


def test_select_s_between_is_interior(bsc):
    rate = to_nats(0.2)
    s = select_s(bsc, rate)
    assert 0.5 < s < 1.0
    assert abs(s - 1 / (1 + rho_hat(bsc, rate, s))) <= 1e-10


def test_tilting_solution_invariants(bsc):
    sol = tilting_solution(bsc, to_nats(0.2))
    assert 0.5 < sol.s < 1 and 0 < sol.rho_hat < 1
    assert sol.c1 == pytest.approx(0.0, abs=1e-10)
    assert sol.c2 > 0 and sol.c3 > 0 and sol.psi_s >= 1
    assert sol.exponent == pytest.approx(sol.e0_at_rho_hat - sol.rho_hat * sol.rate, rel=1e-15)
    assert sol.s == pytest.approx(0.6550675, abs=1e-6)
    assert sol.rho_hat == pytest.approx(0.5265601, abs=1e-6)


def test_tilting_solution_zero_rate(bsc):
    sol = tilting_solution(bsc, 0.0, 0.5)
    assert sol.rho_hat == 1.0 and sol.c1 < 0


def test_tilting_solution_rejects(bsc, identical_rows, noiseless3):
    with pytest.raises(SingularChannelError, match="singular pair"):
        tilting_solution(identical_rows, 0.1)
    with pytest.raises(SingularChannelError):
        tilting_solution(noiseless3, 0.1, 1.0)
    with pytest.raises(DegenerateChannelError):
        rho_hat(noiseless3, 0.1, 1.0)
    with pytest.raises(ValueError):
        tilting_solution(bsc, -0.1)
