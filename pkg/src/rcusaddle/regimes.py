"""Rate regimes relative to the critical rate and ``I_s(Q)``."""

from __future__ import annotations

from enum import Enum

from .channel import ChannelModel
from .exponent import TiltingSolution, critical_rate, select_s
from .information import density_moments, information_density

EQUALITY_BAND = 1e-9


class Regime(str, Enum):
    BELOW_CRITICAL = "below_critical"
    AT_CRITICAL = "at_critical"
    BETWEEN = "between"
    AT_IS = "at_Is"
    ABOVE_IS = "above_Is"

    def __str__(self):
        return self.value


def _classify(rate, r_cr, i_s, band):
    if abs(rate - r_cr) <= band:
        return Regime.AT_CRITICAL
    if abs(rate - i_s) <= band:
        return Regime.AT_IS
    if rate < r_cr:
        return Regime.BELOW_CRITICAL
    if rate > i_s:
        return Regime.ABOVE_IS
    return Regime.BETWEEN


def classify_regime(channel: ChannelModel, rate: float, s="auto", band: float = EQUALITY_BAND) -> Regime:
    """Position of ``rate`` relative to ``R_cr^s(Q)`` and ``I_s(Q)`` (nats)."""
    if s == "auto":
        s = select_s(channel, rate)
    r_cr = critical_rate(channel, s)
    i_s = density_moments(information_density(channel, s)).mean
    return _classify(rate, r_cr, i_s, band)


def classify_solution(channel: ChannelModel, sol: TiltingSolution, band: float = EQUALITY_BAND) -> Regime:
    return classify_regime(channel, sol.rate, sol.s, band)
