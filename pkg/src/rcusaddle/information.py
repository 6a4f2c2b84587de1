"""Generalized information density, E0 and the tilted distributions.

Everything is computed on dense ``(X, Y)`` arrays in the log domain;
entries outside the support of ``Q x W`` carry ``-inf`` log-probability and
are masked out of every expectation.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import logsumexp

from .channel import ChannelModel, singularity_report
from .errors import SingularChannelError
from .lattice import LatticeInfo, detect_lattice

LN2 = float(np.log(2.0))


def to_bits(nats):
    return nats / LN2


def to_nats(bits):
    return bits * LN2


@dataclass(frozen=True, eq=False)
class DensityTable:
    """Support-restricted values of ``i_s(x, y)`` with joint probabilities.

    ``x``, ``y``, ``p``, ``v`` are flat arrays over the support of Q x W.
    ``logp`` holds ``log(Q(x) W(y|x))``.
    """

    s: float
    x: np.ndarray
    y: np.ndarray
    p: np.ndarray
    logp: np.ndarray
    v: np.ndarray

    @property
    def entries(self):
        return list(zip(self.x.tolist(), self.y.tolist(), self.p.tolist(), self.v.tolist()))


@dataclass(frozen=True)
class MomentPair:
    mean: float
    variance: float


@dataclass(frozen=True, eq=False)
class TiltedJoint:
    probabilities: np.ndarray
    rho: float
    s: float

    @property
    def y_marginal(self) -> np.ndarray:
        return self.probabilities.sum(axis=0)


@dataclass(frozen=True, eq=False)
class ReverseConditional:
    """``probabilities[x, y] = P~_s(x|y)``; columns of unreachable y are zero."""

    probabilities: np.ndarray
    s: float
    reachable: np.ndarray


def _check_s(s):
    if not s > 0 or not np.isfinite(s):
        raise ValueError(f"s must be a positive real, got {s}")


def _log_channel(channel: ChannelModel):
    with np.errstate(divide="ignore"):
        return np.log(channel.Q), np.log(channel.W)


def _log_reverse(channel: ChannelModel, s: float):
    """log P~_s(x|y) and the per-y log denominator."""
    logq, logw = _log_channel(channel)
    num = logq[:, None] + s * logw
    denom = logsumexp(num, axis=0)
    with np.errstate(invalid="ignore"):
        return num - denom[None, :], denom


@lru_cache(maxsize=256)
def _density(channel: ChannelModel, s: float) -> DensityTable:
    logq, logw = _log_channel(channel)
    _, denom = _log_reverse(channel, s)
    logp = logq[:, None] + logw
    xs, ys = np.nonzero(np.isfinite(logp))
    v = s * logw[xs, ys] - denom[ys]
    lp = logp[xs, ys]
    arrays = [xs, ys, np.exp(lp), lp, v]
    for a in arrays:
        a.setflags(write=False)
    return DensityTable(s, *arrays)


def information_density(channel: ChannelModel, s: float) -> DensityTable:
    """Table of ``i_s(x,y) = log W(y|x)^s / sum_x' Q(x') W(y|x')^s`` on the support."""
    _check_s(s)
    return _density(channel, float(s))


def density_moments(table: DensityTable) -> MomentPair:
    mean = float(np.dot(table.p, table.v))
    var = float(np.dot(table.p, (table.v - mean) ** 2))
    return MomentPair(mean, var)


def _tilt(table: DensityTable, rho: float):
    w = table.logp - rho * table.v
    logz = logsumexp(w)
    return np.exp(w - logz), float(logz)


def _e0_table(table: DensityTable, rho: float) -> float:
    return -float(logsumexp(table.logp - rho * table.v))


def _derivs_table(table: DensityTable, rho: float):
    probs, _ = _tilt(table, rho)
    first = float(np.dot(probs, table.v))
    second = -float(np.dot(probs, (table.v - first) ** 2))
    return first, second


def _check_rho(rho):
    if not 0.0 <= rho <= 1.0:
        raise ValueError(f"rho must lie in [0, 1], got {rho}")


def e0(channel: ChannelModel, rho: float, s: float) -> float:
    """Gallager-type function ``-log E[exp(-rho i_s(X, Y))]`` in nats."""
    _check_rho(rho)
    return _e0_table(information_density(channel, s), rho)


def e0_derivatives(channel: ChannelModel, rho: float, s: float) -> tuple[float, float]:
    """First and second rho-derivatives of E0 via the tilted joint.

    The first derivative is the tilted mean of ``i_s`` and the second is
    minus the tilted variance.
    """
    _check_rho(rho)
    return _derivs_table(information_density(channel, s), rho)


def tilted_joint(channel: ChannelModel, rho: float, s: float) -> TiltedJoint:
    _check_rho(rho)
    table = information_density(channel, s)
    probs, _ = _tilt(table, rho)
    mat = np.zeros(channel.W.shape)
    mat[table.x, table.y] = probs
    return TiltedJoint(mat, float(rho), float(s))


def reverse_conditional(channel: ChannelModel, s: float) -> ReverseConditional:
    _check_s(s)
    logr, denom = _log_reverse(channel, s)
    reachable = np.isfinite(denom)
    probs = np.where(np.isfinite(logr), np.exp(np.where(np.isfinite(logr), logr, 0.0)), 0.0)
    probs[:, ~reachable] = 0.0
    return ReverseConditional(probs, float(s), reachable)


def _c3_table(channel: ChannelModel, table: DensityTable, rho: float) -> float:
    probs, _ = _tilt(table, rho)
    py = np.bincount(table.y, weights=probs, minlength=channel.output_size)
    logr, _ = _log_reverse(channel, table.s)
    rev = np.exp(logr[table.x, table.y])
    # per-y two-pass variance of i_s under P~_s(.|y)
    mean_y = np.bincount(table.y, weights=rev * table.v, minlength=channel.output_size)
    dev = table.v - mean_y[table.y]
    var_y = np.bincount(table.y, weights=rev * dev * dev, minlength=channel.output_size)
    return float(np.dot(py, var_y))


def conditional_variance_c3(channel: ChannelModel, rho_hat: float, s: float) -> float:
    """Expected per-output variance of ``i_s`` under the reverse conditional.

    Outputs are weighted by the y-marginal of the tilted joint at
    ``rho_hat``. Returns 0 for singular pairs; callers that need a positive
    value must reject that case.
    """
    _check_rho(rho_hat)
    return _c3_table(channel, information_density(channel, s), rho_hat)


def lattice_factor(span: float) -> float:
    """``h / (1 - exp(-h))``, continuous at ``h = 0`` where it equals 1."""
    if span == 0.0:
        return 1.0
    return float(span / -np.expm1(-span))


def psi_s(channel: ChannelModel, s: float) -> tuple[float, LatticeInfo]:
    """Lattice correction factor from the values of ``i_s`` on outputs in Y1(Q).

    Returns ``(psi, lattice)`` with ``psi = 1`` for a non-lattice set.

    Raises
    ------
    SingularChannelError
        If Y1(Q) is empty.
    """
    table = information_density(channel, s)
    report = singularity_report(channel)
    if report.is_singular:
        raise SingularChannelError("singular pair: the set Y1(Q) is empty")
    mask = np.isin(table.y, sorted(report.y1_set))
    lat = detect_lattice(table.v[mask])
    if not lat.is_lattice:
        return 1.0, lat
    return lattice_factor(lat.span), lat


def support_lattice(channel: ChannelModel, s: float) -> LatticeInfo:
    """Lattice structure of ``i_s(X, Y)`` over the full support of Q x W."""
    return detect_lattice(information_density(channel, s).v)


def mutual_information(channel: ChannelModel) -> float:
    """I(X;Y) in nats, computed directly from the joint and its marginals."""
    joint = channel.Q[:, None] * channel.W
    py = joint.sum(axis=0)
    mask = joint > 0
    ratio = joint[mask] / (channel.Q[:, None] * py[None, :])[mask]
    return float(np.sum(joint[mask] * np.log(ratio)))
