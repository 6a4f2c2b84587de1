"""Exact and Monte-Carlo reference values of the RCU family.

``rcu`` uses ``M - 1`` competing codewords and the tie-inclusive pairwise
event ``W^n(y|xbar) >= W^n(y|x)``. ``rcu_s`` is its Markov weakening with
the same ``M - 1``. The refined bound ``rcu_s**`` uses the coefficient
``M psi_s / sqrt(2 pi n c3)``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .channel import ChannelModel
from .errors import OracleUnavailableError
from .information import information_density

MAX_BSC_N = 100_000
MAX_EXHAUSTIVE_PAIRS = 10**8
MAX_DP_SUPPORT = 1_000_000
_LOG_2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True)
class OracleResult:
    value: float
    log_value: float
    method: str
    exact: bool
    ci_halfwidth: float | None = None


def _exact(log_value, method):
    log_value = min(float(log_value), 0.0)
    return OracleResult(math.exp(log_value), log_value, method, True)


def log_m_minus_one(log_m: float) -> float:
    """``log(M - 1)`` for ``M = exp(log_m)``; ``-inf`` when ``M <= 1``."""
    if log_m <= 0:
        return -math.inf
    if log_m > 30:
        return log_m + math.log1p(-math.exp(-log_m))
    return math.log(math.expm1(log_m))


def _log_factorials(n: int) -> np.ndarray:
    out = np.zeros(n + 1)
    out[1:] = np.cumsum(np.log(np.arange(1, n + 1)))
    return out


def _log_binomial_row(n: int) -> np.ndarray:
    lf = _log_factorials(n)
    return lf[n] - lf - lf[::-1]


def _check_bsc(delta, n):
    if not 0 < delta < 0.5:
        raise ValueError(f"delta must lie in (0, 0.5), got {delta}")
    if not 1 <= n <= MAX_BSC_N:
        raise OracleUnavailableError(f"BSC oracle supports 1 <= n <= {MAX_BSC_N}, got {n}")


def _log_flip_pmf(delta, n):
    t = np.arange(n + 1)
    return _log_binomial_row(n) + t * math.log(delta) + (n - t) * math.log1p(-delta)


def bsc_exact_rcu(delta: float, n: int, logM: float) -> OracleResult:
    """Exact RCU for the BSC with uniform input, by conditioning on the flip count.

    A competing codeword wins (ties included) iff its distance to the output
    is at most the number of flips ``t``.
    """
    _check_bsc(delta, n)
    log_coeff = log_m_minus_one(logM)
    if log_coeff == -math.inf:
        return OracleResult(0.0, -math.inf, "rcu", True)
    log_pairwise = np.logaddexp.accumulate(_log_binomial_row(n)) - n * math.log(2.0)
    terms = _log_flip_pmf(delta, n) + np.minimum(0.0, log_coeff + log_pairwise)
    return _exact(logsumexp(terms), "rcu")


def bsc_exact_rcuss(delta: float, n: int, logM: float, s: float, psi_s: float = 1.0, c3: float = 1.0,
                    weakened: bool = False) -> OracleResult:
    """Exact ``rcu_s**`` (or ``rcu_s`` with ``weakened=True``) for the BSC.

    ``i_s^n`` only depends on the flip count: ``(n - t) a + t b`` with ``a``
    and ``b`` the agree and flip values of ``i_s``.
    """
    _check_bsc(delta, n)
    if weakened:
        log_coeff = log_m_minus_one(logM)
        method = "rcu_s"
    else:
        log_coeff = logM + math.log(psi_s) - 0.5 * (_LOG_2PI + math.log(n * c3))
        method = "rcu_ss"
    if log_coeff == -math.inf:
        return OracleResult(0.0, -math.inf, method, True)
    # i_s(x, y) = s log W(y|x) - log(sum_x' Q(x') W(y|x')^s), same denominator for both y
    log_den = math.log(0.5) + np.logaddexp(s * math.log1p(-delta), s * math.log(delta))
    a = s * math.log1p(-delta) - log_den
    b = s * math.log(delta) - log_den
    t = np.arange(n + 1)
    info = (n - t) * a + t * b
    terms = _log_flip_pmf(delta, n) + np.minimum(0.0, log_coeff - info)
    return _exact(logsumexp(terms), method)


def _letter_arrays(channel: ChannelModel, s: float):
    table = information_density(channel, s)
    return table.logp, table.v


def _enumerate_product(logp, vals, n, log_coeff):
    """``sum over support^n of exp(logp) * min(1, exp(log_coeff - vals))``."""
    half = n // 2
    lp_a = np.zeros(1)
    v_a = np.zeros(1)
    for _ in range(half):
        lp_a = (lp_a[:, None] + logp[None, :]).ravel()
        v_a = (v_a[:, None] + vals[None, :]).ravel()
    lp_b = np.zeros(1)
    v_b = np.zeros(1)
    for _ in range(n - half):
        lp_b = (lp_b[:, None] + logp[None, :]).ravel()
        v_b = (v_b[:, None] + vals[None, :]).ravel()
    chunk = max(1, 2_000_000 // lp_b.size)
    parts = []
    for k in range(0, lp_a.size, chunk):
        lp = lp_a[k:k + chunk, None] + lp_b[None, :]
        v = v_a[k:k + chunk, None] + v_b[None, :]
        parts.append(logsumexp(lp + np.minimum(0.0, log_coeff - v)))
    return logsumexp(parts)


def _check_exhaustive(channel, n):
    if n < 1 or n > 12:
        raise OracleUnavailableError(f"exhaustive oracle needs 1 <= n <= 12, got {n}")
    pairs = (channel.input_size * channel.output_size) ** n
    if pairs > MAX_EXHAUSTIVE_PAIRS:
        raise OracleUnavailableError(f"exhaustive oracle: {pairs} sequence pairs exceed {MAX_EXHAUSTIVE_PAIRS}")


def exact_rcus_small(channel: ChannelModel, n: int, logM: float, s: float) -> OracleResult:
    """``E[min(1, (M-1) exp(-i_s^n(X, Y)))]`` by exhaustive enumeration."""
    _check_exhaustive(channel, n)
    log_coeff = log_m_minus_one(logM)
    if log_coeff == -math.inf:
        return OracleResult(0.0, -math.inf, "rcu_s", True)
    logp, vals = _letter_arrays(channel, s)
    return _exact(_enumerate_product(logp, vals, n, log_coeff), "rcu_s")


def exact_rcuss_small(channel: ChannelModel, n: int, logM: float, s: float, psi_s: float, c3: float) -> OracleResult:
    """``rcu_s**`` by exhaustive enumeration."""
    _check_exhaustive(channel, n)
    log_coeff = logM + math.log(psi_s) - 0.5 * (_LOG_2PI + math.log(n * c3))
    logp, vals = _letter_arrays(channel, s)
    return _exact(_enumerate_product(logp, vals, n, log_coeff), "rcu_ss")


def _merge(values, probs, tol):
    order = np.argsort(values, kind="stable")
    values, probs = values[order], probs[order]
    if values.size <= 1:
        return values, probs
    new_group = np.empty(values.size, dtype=bool)
    new_group[0] = True
    new_group[1:] = np.diff(values) > tol
    idx = np.cumsum(new_group) - 1
    merged_p = np.bincount(idx, weights=probs)
    merged_v = values[new_group]
    return merged_v, merged_p


def _convolve(a, b, tol):
    va, pa = a
    vb, pb = b
    if va.size * vb.size > MAX_DP_SUPPORT * 16:
        raise OracleUnavailableError("pairwise-error DP value set too large")
    v, p = _merge((va[:, None] + vb[None, :]).ravel(), (pa[:, None] * pb[None, :]).ravel(), tol)
    if v.size > MAX_DP_SUPPORT:
        raise OracleUnavailableError(
            f"pairwise-error DP support exceeds {MAX_DP_SUPPORT} values; channel is not lattice enough")
    return v, p


def _power(dist, k, tol):
    result = (np.zeros(1), np.ones(1))
    base = dist
    while k:
        if k & 1:
            result = _convolve(result, base, tol)
        k >>= 1
        if k:
            base = _convolve(base, base, tol)
    return result


def _competitor_distributions(channel: ChannelModel, counts, tol):
    """Distribution of ``sum_i log W(y_i|Xbar_i)`` given per-output counts."""
    with np.errstate(divide="ignore"):
        logw = np.log(channel.W)
    q = channel.Q
    dist = (np.zeros(1), np.ones(1))
    for y, k in enumerate(counts):
        if k == 0:
            continue
        mask = (q > 0) & (channel.W[:, y] > 0)
        letter = _merge(logw[mask, y], q[mask], tol)
        dist = _convolve(dist, _power(letter, int(k), tol), tol)
    return dist


def _pairwise_log_prob(dist, own, tol):
    """log P[competitor >= own] with ties included up to ``tol``."""
    values, probs = dist
    tail = np.concatenate([np.cumsum(probs[::-1])[::-1], [0.0]])
    idx = np.searchsorted(values, own - tol, side="left")
    with np.errstate(divide="ignore"):
        return np.log(np.minimum(tail[idx], 1.0))


def exact_rcu_small(channel: ChannelModel, n: int, logM: float) -> OracleResult:
    """Exact RCU by enumerating output sequences and exact pairwise probabilities."""
    _check_exhaustive(channel, n)
    log_coeff = log_m_minus_one(logM)
    if log_coeff == -math.inf:
        return OracleResult(0.0, -math.inf, "rcu", True)
    tol = 1e-9 * max(1, n)
    with np.errstate(divide="ignore"):
        logw = np.log(channel.W)
        logq = np.log(channel.Q)
    cache = {}
    parts = []
    for ys in itertools.product(range(channel.output_size), repeat=n):
        ys = np.array(ys)
        counts = tuple(np.bincount(ys, minlength=channel.output_size))
        if counts not in cache:
            cache[counts] = _competitor_distributions(channel, counts, tol)
        dist = cache[counts]
        # all input sequences at once: own log-likelihood and log Q^n W^n
        own = np.zeros(1)
        lp = np.zeros(1)
        for y in ys:
            own = (own[:, None] + logw[:, y][None, :]).ravel()
            lp = (lp[:, None] + (logq + logw[:, y])[None, :]).ravel()
        keep = np.isfinite(lp)
        if not keep.any():
            continue
        own, lp = own[keep], lp[keep]
        parts.append(logsumexp(lp + np.minimum(0.0, log_coeff + _pairwise_log_prob(dist, own, tol))))
    return _exact(logsumexp(parts), "rcu")


def _sample_sequences(joint: np.ndarray, n: int, seed: int, index: int):
    # counter-based: sample ``index`` is a pure function of (seed, index); the
    # index sits in the high counter word so per-sample streams never overlap
    rng = np.random.Generator(np.random.Philox(key=seed & (2**64 - 1), counter=[0, 0, 0, index]))
    cdf = np.cumsum(joint.ravel())
    idx = np.searchsorted(cdf, rng.random(n) * cdf[-1], side="right")
    idx = np.minimum(idx, cdf.size - 1)
    return np.divmod(idx, joint.shape[1])


def monte_carlo_rcu(channel: ChannelModel, n: int, logM: float, samples: int, seed: int,
                    tilt: tuple[float, float] | None = None) -> OracleResult:
    """Monte-Carlo estimate of the RCU with exact per-sample pairwise probabilities.

    Each draw ``(x, y) ~ Q^n W^n`` contributes ``min(1, (M-1) p)`` where ``p``
    is computed exactly from the distribution of the competitor's
    log-likelihood (a convolution over the output counts).

    With ``tilt=(rho, s)`` the letters are drawn from the tilted joint
    proportional to ``Q(x) W(y|x) exp(-rho i_s(x, y))`` instead, and each
    draw is reweighted by its likelihood ratio. The estimate stays unbiased
    and resolves error probabilities far below ``1 / samples``.
    """
    if samples < 1000:
        raise ValueError("monte_carlo_rcu needs at least 1000 samples")
    method = "rcu_mc" if tilt is None else "rcu_mc_tilted"
    log_coeff = log_m_minus_one(logM)
    if log_coeff == -math.inf:
        return OracleResult(0.0, -math.inf, method, False, 0.0)
    tol = 1e-9 * max(1, n)
    with np.errstate(divide="ignore"):
        logw = np.log(channel.W)
        log_joint = np.log(channel.Q)[:, None] + logw
    if tilt is None:
        log_ratio = np.zeros_like(log_joint)
        joint = np.exp(log_joint)
    else:
        rho, s = tilt
        table = information_density(channel, s)
        log_tilted = np.full(log_joint.shape, -np.inf)
        log_tilted[table.x, table.y] = table.logp - rho * table.v
        log_tilted -= logsumexp(log_tilted)
        log_ratio = np.where(np.isfinite(log_tilted), log_joint - log_tilted, 0.0)
        joint = np.exp(log_tilted)
    cache = {}
    logs = np.empty(samples)
    for i in range(samples):
        xs, ys = _sample_sequences(joint, n, seed, i)
        counts = tuple(np.bincount(ys, minlength=channel.output_size))
        if counts not in cache:
            cache[counts] = _competitor_distributions(channel, counts, tol)
        own = float(np.sum(logw[xs, ys]))
        lp = _pairwise_log_prob(cache[counts], np.array([own]), tol)[0]
        logs[i] = min(0.0, log_coeff + lp) + float(np.sum(log_ratio[xs, ys]))
    top = float(logs.max())
    if top == -math.inf:
        return OracleResult(0.0, -math.inf, method, False, 0.0)
    scaled = np.exp(logs - top)
    log_mean = top + math.log(scaled.mean())
    half = 1.96 * math.exp(top) * float(scaled.std(ddof=1)) / math.sqrt(samples)
    return OracleResult(math.exp(log_mean), log_mean, method, False, half)
