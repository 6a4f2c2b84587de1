"""Saddlepoint prefactor beta_n and the approximation beta_n * exp(-n(E0 - rho R)).

The prefactor is a Gaussian integral (non-lattice case) or a sampled
Gaussian sum (lattice case). Both pieces are computed as logarithms and
combined with ``logaddexp`` since they can differ by hundreds of orders of
magnitude.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.special import log_ndtr, logsumexp, ndtr

from .channel import ChannelModel
from .errors import DegenerateChannelError
from .exponent import TiltingSolution, tilting_solution
from .information import support_lattice
from .lattice import LatticeInfo
from .regimes import classify_solution

LOG_2PI = math.log(2.0 * math.pi)
WINDOW_SD = 12.0
MAX_TERMS = 10_000_000


def gaussian_q(x: float) -> float:
    """Upper tail of the standard normal, ``P[N(0,1) > x]``."""
    return float(ndtr(-x))


def log_gaussian_q(x: float) -> float:
    """``log Q(x)``, finite far into the upper tail (e.g. about -804.608 at 40)."""
    return float(log_ndtr(-x))


def log_exp_gauss_integral(a: float, b: float, mu: float, sigma2: float) -> float:
    """Log of ``int_a^inf exp(b z) phi(z; mu, sigma2) dz``."""
    if not sigma2 > 0:
        raise ValueError("sigma2 must be positive")
    sigma = math.sqrt(sigma2)
    return mu * b + 0.5 * sigma2 * b * b + log_gaussian_q((a - mu - b * sigma2) / sigma)


def _log_exp_gauss_integral_below(a, b, mu, sigma2):
    # int_{-inf}^a, via the reflected tail; avoids full-minus-tail cancellation
    sigma = math.sqrt(sigma2)
    return mu * b + 0.5 * sigma2 * b * b + log_gaussian_q(-(a - mu - b * sigma2) / sigma)


def exp_gauss_integral(a: float, b: float, mu: float, sigma2: float) -> float:
    return math.exp(log_exp_gauss_integral(a, b, mu, sigma2))


def _check_solution(sol: TiltingSolution):
    if not (sol.c2 > 0 and sol.c3 > 0):
        raise DegenerateChannelError(f"need c2 > 0 and c3 > 0 (got c2={sol.c2}, c3={sol.c3})")


def log_threshold(sol: TiltingSolution, n: int) -> float:
    """``log(sqrt(2 pi n c3) / psi_s)``, the split point between the two pieces."""
    return 0.5 * (LOG_2PI + math.log(n * sol.c3)) - math.log(sol.psi_s)


def log_beta_n_nonlattice(sol: TiltingSolution, n: int) -> float:
    _check_solution(sol)
    t = log_threshold(sol, n)
    mu, var = n * sol.c1, n * sol.c2
    upper = log_exp_gauss_integral(t, -sol.rho_hat, mu, var)
    lower = -t + _log_exp_gauss_integral_below(t, 1.0 - sol.rho_hat, mu, var)
    return float(np.logaddexp(upper, lower))


def beta_n_nonlattice(sol: TiltingSolution, n: int) -> float:
    """Prefactor for a non-lattice information density."""
    return math.exp(log_beta_n_nonlattice(sol, n))


@dataclass(frozen=True)
class LatticeGrid:
    gamma_n: float
    i_star: int
    h: float
    gamma: float


def lattice_grid(sol: TiltingSolution, n: int, lattice: LatticeInfo) -> LatticeGrid:
    """Phase ``gamma_n`` of the n-fold lattice and the first index above the threshold.

    ``lattice`` describes ``R - i_s(X, Y)``. The reduction of ``n * gamma``
    modulo the span is done in exact rational arithmetic on the double
    inputs.
    """
    if not lattice.is_lattice or lattice.span <= 0:
        raise ValueError("lattice_grid needs a lattice with positive span")
    h = lattice.span
    gamma_n = float((n * Fraction(lattice.offset)) % Fraction(h))
    if gamma_n >= h:
        gamma_n = 0.0
    t = log_threshold(sol, n)
    i_star = math.ceil((t - gamma_n) / h)
    while gamma_n + (i_star - 1) * h >= t:
        i_star -= 1
    while gamma_n + i_star * h < t:
        i_star += 1
    return LatticeGrid(gamma_n, i_star, h, lattice.offset)


def _log_series(log_scale, b, mu, var, grid: LatticeGrid, lo, hi, width_sd):
    """log of ``sum_{lo <= i <= hi} exp(b z_i) phi_h(z_i; mu, var)``, z_i = gamma_n + i h.

    Only indices within ``width_sd`` index-space standard deviations of the
    (range-clipped) peak are kept.
    """
    h = grid.h
    # peak of b z - (z - mu)^2 / (2 var) in z, mapped to index space
    peak = (mu + b * var - grid.gamma_n) / h
    sd = math.sqrt(var) / h
    center = min(max(peak, lo), hi)
    half = math.ceil(width_sd * sd) + 1
    start = max(lo, math.floor(center) - half)
    stop = min(hi, math.ceil(center) + half)
    if stop - start + 1 > MAX_TERMS:
        start = max(start, math.floor(center) - MAX_TERMS // 2)
        stop = min(stop, start + MAX_TERMS - 1)
    i = np.arange(start, stop + 1, dtype=float)
    z = grid.gamma_n + i * h
    terms = b * z - (z - mu) ** 2 / (2.0 * var)
    return log_scale + math.log(h) - 0.5 * (LOG_2PI + math.log(var)) + float(logsumexp(terms))


def log_beta_n_lattice(sol: TiltingSolution, n: int, grid: LatticeGrid, width_sd: float = WINDOW_SD) -> float:
    _check_solution(sol)
    if grid.h <= 0:
        raise ValueError("lattice span must be positive")
    mu, var = n * sol.c1, n * sol.c2
    t = log_threshold(sol, n)
    upper = _log_series(0.0, -sol.rho_hat, mu, var, grid, grid.i_star, math.inf, width_sd)
    lower = _log_series(-t, 1.0 - sol.rho_hat, mu, var, grid, -math.inf, grid.i_star - 1, width_sd)
    return float(np.logaddexp(upper, lower))


def beta_n_lattice(sol: TiltingSolution, n: int, grid: LatticeGrid, width_sd: float = WINDOW_SD) -> float:
    """Prefactor for a lattice information density (sampled Gaussian sums)."""
    return math.exp(log_beta_n_lattice(sol, n, grid, width_sd))


def rate_lattice(channel: ChannelModel, s: float, rate: float) -> LatticeInfo:
    """Lattice structure of ``R - i_s(X, Y)``."""
    return support_lattice(channel, s).shifted(rate, negate=True)


@dataclass(frozen=True)
class ApproxResult:
    n: int
    rate: float
    method: str
    log_value: float
    prefactor: float
    exponent: float
    solution: TiltingSolution | None = None
    regime: str | None = None
    lattice: LatticeInfo | None = None

    @property
    def value(self) -> float:
        return math.exp(self.log_value)


def log_prefactor(sol: TiltingSolution, n: int, lattice: LatticeInfo) -> float:
    """Dispatch on the lattice structure of ``R - i_s(X, Y)``."""
    if lattice.is_lattice and lattice.span > 0:
        return log_beta_n_lattice(sol, n, lattice_grid(sol, n, lattice))
    return log_beta_n_nonlattice(sol, n)


def saddlepoint_approx(channel: ChannelModel, n: int, rate: float, s="auto") -> ApproxResult:
    """Saddlepoint approximation of the refined RCU bound at ``M = exp(n * rate)``."""
    if n < 1:
        raise ValueError("n must be a positive integer")
    sol = tilting_solution(channel, rate, s)
    lat = rate_lattice(channel, sol.s, rate)
    log_beta = log_prefactor(sol, n, lat)
    return ApproxResult(
        n=n,
        rate=float(rate),
        method="saddlepoint",
        log_value=log_beta - n * sol.exponent,
        prefactor=math.exp(log_beta),
        exponent=sol.exponent,
        solution=sol,
        regime=classify_solution(channel, sol),
        lattice=lat,
    )
