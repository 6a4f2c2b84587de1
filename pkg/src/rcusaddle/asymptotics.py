"""Exact asymptotics, normal and error-exponent approximations, rate inversion."""

from __future__ import annotations

import math

from .channel import ChannelModel, bsc_crossover
from .errors import BracketError, DegenerateChannelError, OracleUnavailableError, RegimeBoundaryError
from .exponent import TiltingSolution, random_coding_exponent, tilting_solution
from .information import density_moments, information_density
from .lattice import LatticeInfo
from .oracles import (
    bsc_exact_rcu,
    bsc_exact_rcuss,
    exact_rcu_small,
    exact_rcus_small,
    exact_rcuss_small,
    monte_carlo_rcu,
)
from .regimes import Regime, classify_regime, classify_solution
from .saddlepoint import (
    LOG_2PI,
    ApproxResult,
    lattice_grid,
    log_gaussian_q,
    log_threshold,
    rate_lattice,
    saddlepoint_approx,
)

BOUNDARY_GUARD = 1e-3
RATE_TOL = 1e-9

METHODS = ("saddlepoint", "exact_asymptotics", "normal", "normal_no_half_log", "exponent",
           "oracle_rcu", "oracle_rcuss", "oracle_mc")

__all__ = [
    "Regime",
    "classify_regime",
    "exact_asymptotics_prefactor",
    "exact_asymptotics_approx",
    "q_inverse",
    "normal_approx_logM",
    "error_exponent_approx",
    "log_value_at_rate",
    "rate_for_epsilon",
    "METHODS",
]


def exact_asymptotics_prefactor(sol: TiltingSolution, n: int, lattice: LatticeInfo, regime) -> float:
    """Closed-form large-n behaviour of the saddlepoint prefactor in each regime.

    ``lattice`` describes ``R - i_s(X, Y)`` and only matters between the
    critical rate and ``I_s``, where the lattice phase enters.
    """
    regime = Regime(regime)
    t = log_threshold(sol, n)
    if regime is Regime.ABOVE_IS:
        return 1.0
    if regime is Regime.AT_IS:
        return 0.5
    if regime is Regime.BELOW_CRITICAL:
        return math.exp(-t)
    if regime is Regime.AT_CRITICAL:
        return 0.5 * math.exp(-t)

    rho = sol.rho_hat
    if rho < BOUNDARY_GUARD or 1.0 - rho < BOUNDARY_GUARD:
        raise RegimeBoundaryError(
            f"rho_hat = {rho:.6g} is within {BOUNDARY_GUARD} of a regime boundary; "
            "the between-regime expansion diverges there")
    log_common = -rho * t - 0.5 * (LOG_2PI + math.log(n * sol.c2))
    if not (lattice.is_lattice and lattice.span > 0):
        return math.exp(log_common) / (rho * (1.0 - rho))
    grid = lattice_grid(sol, n, lattice)
    h = grid.h
    phase = grid.gamma_n + grid.i_star * h - t
    upper = math.exp(-rho * phase) / -math.expm1(-rho * h)
    lower = math.exp((1.0 - rho) * (phase - h)) / -math.expm1(-(1.0 - rho) * h)
    return math.exp(log_common) * h * (upper + lower)


def exact_asymptotics_approx(channel: ChannelModel, n: int, rate: float, s="auto") -> ApproxResult:
    sol = tilting_solution(channel, rate, s)
    lat = rate_lattice(channel, sol.s, rate)
    regime = classify_solution(channel, sol)
    pref = exact_asymptotics_prefactor(sol, n, lat, regime)
    return ApproxResult(n, float(rate), "exact_asymptotics", math.log(pref) - n * sol.exponent,
                        pref, sol.exponent, sol, regime, lat)


def q_inverse(eps: float) -> float:
    """Inverse of the standard normal upper tail, by bracketed Newton on ``log Q``."""
    if not 0.0 < eps < 1.0:
        raise ValueError(f"epsilon must lie in (0, 1), got {eps}")
    target = math.log(eps)
    lo, hi = -40.0, 40.0
    x = 0.0
    for _ in range(200):
        f = log_gaussian_q(x) - target
        if f == 0.0:
            return x
        if f > 0:
            lo = x
        else:
            hi = x
        # d/dx log Q(x) = -phi(x) / Q(x)
        slope = -math.exp(-0.5 * x * x - 0.5 * LOG_2PI - log_gaussian_q(x))
        step = x - f / slope
        if not lo <= step <= hi:
            step = 0.5 * (lo + hi)
        if abs(step - x) <= 1e-12 * max(1.0, abs(x)):
            return step
        x = step
    return x


def normal_approx_logM(channel: ChannelModel, n: int, epsilon: float, s: float = 1.0,
                       include_half_log_n: bool = True) -> float:
    """``n I_s - sqrt(n U_s) Q^{-1}(eps) [+ log(n) / 2]`` with the O(1) term set to 0."""
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")
    mom = density_moments(information_density(channel, s))
    if mom.variance <= 0:
        raise DegenerateChannelError("U_s(Q) = 0: the normal approximation is undefined")
    log_m = n * mom.mean - math.sqrt(n * mom.variance) * q_inverse(epsilon)
    if include_half_log_n:
        log_m += 0.5 * math.log(n)
    return log_m


def error_exponent_approx(channel: ChannelModel, n: int, rate: float) -> ApproxResult:
    """``exp(-n Er(R))`` with a unit prefactor."""
    er, _, _ = random_coding_exponent(channel, rate)
    return ApproxResult(n, float(rate), "exponent", -n * er, 1.0, er)


def _oracle_log_value(channel, n, rate, method, s, samples, seed, mc_tilt):
    log_m = n * rate
    delta = bsc_crossover(channel)
    if method == "oracle_rcu":
        if delta is not None:
            return bsc_exact_rcu(delta, n, log_m).log_value
        if n > 12:
            raise OracleUnavailableError("oracle unavailable at this size")
        return exact_rcu_small(channel, n, log_m).log_value
    if method == "oracle_rcus":
        s_val = tilting_solution(channel, rate, s).s if s == "auto" else float(s)
        if delta is not None:
            return bsc_exact_rcuss(delta, n, log_m, s_val, weakened=True).log_value
        return exact_rcus_small(channel, n, log_m, s_val).log_value
    if method == "oracle_rcuss":
        sol = tilting_solution(channel, rate, s)
        if delta is not None:
            return bsc_exact_rcuss(delta, n, log_m, sol.s, sol.psi_s, sol.c3).log_value
        if n > 12:
            raise OracleUnavailableError("oracle unavailable at this size")
        return exact_rcuss_small(channel, n, log_m, sol.s, sol.psi_s, sol.c3).log_value
    if method == "oracle_mc":
        tilt = None
        if mc_tilt:
            sol = tilting_solution(channel, rate, s)
            tilt = (sol.rho_hat, sol.s)
        return monte_carlo_rcu(channel, n, log_m, samples, seed, tilt=tilt).log_value
    raise ValueError(f"unknown method {method!r}")


def log_value_at_rate(channel: ChannelModel, n: int, rate: float, method: str, s="auto",
                      samples: int = 10_000, seed: int = 0, mc_tilt: bool = False) -> float:
    """Natural log of the error probability predicted by ``method`` at ``rate`` (nats)."""
    if method == "saddlepoint":
        return saddlepoint_approx(channel, n, rate, s).log_value
    if method == "exact_asymptotics":
        return exact_asymptotics_approx(channel, n, rate, s).log_value
    if method == "exponent":
        return error_exponent_approx(channel, n, rate).log_value
    if method in ("normal", "normal_no_half_log"):
        # normal approximation as an error probability: eps = Q((n I_s + h - log M) / sqrt(n U_s))
        s_val = 1.0 if s == "auto" else float(s)
        mom = density_moments(information_density(channel, s_val))
        shift = 0.5 * math.log(n) if method == "normal" else 0.0
        return log_gaussian_q((n * rate - n * mom.mean - shift) / math.sqrt(n * mom.variance))
    return _oracle_log_value(channel, n, rate, method, s, samples, seed, mc_tilt)


def rate_for_epsilon(channel: ChannelModel, n: int, epsilon: float, method: str, s="auto",
                     tol: float = RATE_TOL, **kwargs) -> float:
    """Rate (nats) at which ``method`` predicts error probability ``epsilon``.

    Bisection over ``[0, log |X|]``. The normal methods are solved in closed
    form with ``s = 1`` unless ``s`` is given.
    """
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")
    if method in ("normal", "normal_no_half_log"):
        s_val = 1.0 if s == "auto" else float(s)
        return normal_approx_logM(channel, n, epsilon, s_val, method == "normal") / n
    target = math.log(epsilon)

    def f(rate):
        try:
            return log_value_at_rate(channel, n, rate, method, s, **kwargs) - target
        except RegimeBoundaryError:
            # the between-regime expansion blows up at both ends of the regime
            return math.inf

    lo, hi = 0.0, math.log(channel.input_size)
    f_lo, f_hi = f(lo), f(hi)
    if f_lo > 0:
        raise BracketError(f"{method}: error probability at rate 0 exceeds {epsilon} at n={n}")
    if f_hi < 0:
        raise BracketError(f"{method}: error probability at the maximal rate is below {epsilon} at n={n}")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if f(mid) > 0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)
