"""Optimal tilting parameter, critical rate and the random-coding exponent.

All rates are in nats per channel use.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .channel import ChannelModel, singularity_report
from .errors import ConvergenceError, DegenerateChannelError, SingularChannelError
from .information import (
    _c3_table,
    _derivs_table,
    _e0_table,
    density_moments,
    information_density,
    psi_s,
)
from .lattice import LatticeInfo

RHO_TOL = 1e-12
FIXED_POINT_TOL = 1e-10
MAX_FIXED_POINT_ITER = 100


@dataclass(frozen=True)
class TiltingSolution:
    """Everything the saddlepoint prefactor needs at one (Q, W, R, s)."""

    s: float
    rho_hat: float
    e0_at_rho_hat: float
    c1: float
    c2: float
    c3: float
    psi_s: float
    rate: float
    psi_lattice: LatticeInfo | None = None

    @property
    def exponent(self) -> float:
        """``E0(Q, rho_hat, s) - rho_hat * R`` in nats."""
        return self.e0_at_rho_hat - self.rho_hat * self.rate


def _is_degenerate(table) -> bool:
    m = density_moments(table)
    return m.variance <= 1e-14 * max(1.0, m.mean * m.mean)


def _bisect_decreasing(f, target, lo=0.0, hi=1.0, tol=RHO_TOL):
    """Root of a decreasing ``f(rho) = target`` with f(lo) > target > f(hi)."""
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if f(mid) > target:
            lo = mid
        else:
            hi = mid
    return lo, hi


def _rho_hat_table(table, rate: float) -> float:
    if _derivs_table(table, 1.0)[0] >= rate:
        return 1.0
    if _derivs_table(table, 0.0)[0] <= rate:
        return 0.0
    lo, hi = _bisect_decreasing(lambda r: _derivs_table(table, r)[0], rate)
    rho = 0.5 * (lo + hi)
    for _ in range(2):
        first, second = _derivs_table(table, rho)
        if second == 0.0:
            break
        step = rho - (first - rate) / second
        if not lo <= step <= hi:
            break
        rho = step
    return rho


def rho_hat(channel: ChannelModel, rate: float, s: float) -> float:
    """Maximizer over ``rho in [0, 1]`` of ``E0(Q, rho, s) - rho * rate``.

    Boundary ties resolve to the closed interval: ``rho_hat = 1`` at the
    critical rate and ``rho_hat = 0`` at ``I_s(Q)``.
    """
    if rate < 0:
        raise ValueError("rate must be nonnegative")
    table = information_density(channel, s)
    if _is_degenerate(table):
        raise DegenerateChannelError("information density has zero variance; E0 is linear in rho")
    return _rho_hat_table(table, rate)


def c1_c2(channel: ChannelModel, rate: float, s: float) -> tuple[float, float]:
    rho = rho_hat(channel, rate, s)
    first, second = _derivs_table(information_density(channel, s), rho)
    return rate - first, -second


def critical_rate(channel: ChannelModel, s: float) -> float:
    """Largest rate with ``rho_hat = 1``: the rho-derivative of E0 at rho = 1."""
    return _derivs_table(information_density(channel, s), 1.0)[0]


def _envelope_slope(channel, rho):
    # d/drho E0(rho, 1/(1+rho)); the s-partial vanishes at s = 1/(1+rho)
    return _derivs_table(information_density(channel, 1.0 / (1.0 + rho)), rho)[0]


def _alternation(channel, rate, s0=1.0):
    s = s0
    prev_step = None
    damped = False
    for _ in range(MAX_FIXED_POINT_ITER):
        rho = _rho_hat_table(information_density(channel, s), rate)
        target = 1.0 / (1.0 + rho)
        step = target - s
        if prev_step is not None and step * prev_step < 0:
            damped = True
        s_new = 0.5 * s + 0.5 * target if damped else target
        if abs(s_new - s) <= FIXED_POINT_TOL:
            return s_new
        prev_step = step
        s = s_new
    return None


def _golden_max(f, lo, hi, tol=1e-10):
    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c, d = b - inv_phi * (b - a), a + inv_phi * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - inv_phi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv_phi * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def _fixed_point_residual(channel, rate, s):
    rho = _rho_hat_table(information_density(channel, s), rate)
    return abs(s * (1.0 + rho) - 1.0)


def select_s(channel: ChannelModel, rate: float) -> float:
    """Fixed point of ``s = 1 / (1 + rho_hat(Q, rate, s))``; lies in [1/2, 1].

    The fixed point is the stationary point of the Gallager exponent
    ``E0(rho, 1/(1+rho)) - rho * rate``, whose rho-derivative is monotone,
    so it is located by bisection. The damped alternation and a golden
    section search over s are kept as fallbacks.
    """
    if rate < 0:
        raise ValueError("rate must be nonnegative")
    if _envelope_slope(channel, 1.0) >= rate:
        rho = 1.0
    elif _envelope_slope(channel, 0.0) <= rate:
        rho = 0.0
    else:
        lo, hi = _bisect_decreasing(lambda r: _envelope_slope(channel, r), rate)
        rho = 0.5 * (lo + hi)
    s = 1.0 / (1.0 + rho)
    if _fixed_point_residual(channel, rate, s) <= 1e-9:
        return s
    s = _alternation(channel, rate)
    if s is not None and _fixed_point_residual(channel, rate, s) <= 1e-9:
        return s

    def best(s_):
        table = information_density(channel, s_)
        r = _rho_hat_table(table, rate)
        return _e0_table(table, r) - r * rate

    s = _golden_max(best, 1e-6, 2.0)
    if _fixed_point_residual(channel, rate, s) > 1e-9:
        raise ConvergenceError(f"no fixed point s = 1/(1+rho_hat) found at rate {rate}")
    return s


def random_coding_exponent(channel: ChannelModel, rate: float) -> tuple[float, float, float]:
    """Return ``(Er, rho*, s*)`` maximizing ``E0(Q, rho, s) - rho * rate``."""
    s = select_s(channel, rate)
    table = information_density(channel, s)
    rho = _rho_hat_table(table, rate)
    return _e0_table(table, rho) - rho * rate, rho, s


def tilting_solution(channel: ChannelModel, rate: float, s="auto") -> TiltingSolution:
    """Bundle rho_hat, E0, c1, c2, c3 and psi_s for one evaluation point.

    ``s="auto"`` selects ``s = 1/(1 + rho_hat)``.
    """
    if rate < 0:
        raise ValueError("rate must be nonnegative")
    if singularity_report(channel).is_singular:
        raise SingularChannelError("singular pair: saddlepoint quantities are undefined")
    if s == "auto":
        s = select_s(channel, rate)
    s = float(s)
    table = information_density(channel, s)
    if _is_degenerate(table):
        raise DegenerateChannelError("information density has zero variance")
    rho = _rho_hat_table(table, rate)
    first, second = _derivs_table(table, rho)
    psi, lat = psi_s(channel, s)
    return TiltingSolution(
        s=s,
        rho_hat=rho,
        e0_at_rho_hat=_e0_table(table, rho),
        c1=rate - first,
        c2=-second,
        c3=_c3_table(channel, table, rho),
        psi_s=psi,
        rate=float(rate),
        psi_lattice=lat,
    )
