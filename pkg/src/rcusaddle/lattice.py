"""Lattice structure of finite sets of reals.

A finite set is lattice with span ``h`` and offset ``gamma`` when every
element is ``gamma + i*h`` for an integer ``i`` and no larger ``h`` works.
Detection runs a real-valued Euclidean algorithm on the pairwise
differences; a remainder below ``tol`` ends the reduction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

DEFAULT_TOL = 1e-9
MAX_ITERATIONS = 64
# Genuine lattices from log-likelihoods of rational channels have small
# integer coordinates. A tolerance-terminated Euclid on incommensurate reals
# also terminates, but with a tiny span and enormous coordinates.
MAX_MULTIPLIER = 10_000


@dataclass(frozen=True)
class LatticeInfo:
    is_lattice: bool
    span: float
    offset: float
    tolerance_used: float

    @property
    def degenerate(self) -> bool:
        """True when the set has a single point at zero (no usable span)."""
        return self.is_lattice and self.span == 0.0

    def shifted(self, shift: float, negate: bool = False) -> LatticeInfo:
        """Lattice info of ``shift + v`` (or ``shift - v``) for v in the set."""
        if not self.is_lattice or self.span == 0.0:
            return self
        base = shift - self.offset if negate else shift + self.offset
        return LatticeInfo(True, self.span, _canonical_offset(base, self.span, self.tolerance_used),
                           self.tolerance_used)


def _canonical_offset(value: float, span: float, tol: float) -> float:
    off = math.fmod(value, span)
    if off < 0:
        off += span
    if off >= span - tol or off < tol:
        return 0.0
    return off


def _real_gcd(a: float, b: float, tol: float, max_iter: int) -> float | None:
    a, b = max(a, b), min(a, b)
    for _ in range(max_iter):
        if b <= tol:
            return a
        r = math.fmod(a, b)
        # symmetric remainder keeps float noise near b from stalling the loop
        a, b = b, min(r, b - r)
    return a if b <= tol else None


def detect_lattice(values, tol: float = DEFAULT_TOL, max_iter: int = MAX_ITERATIONS) -> LatticeInfo:
    """Detect whether ``values`` lie on a lattice ``{offset + i*span}``.

    Parameters
    ----------
    values : iterable of float
        Finite, non-empty collection. Order and duplicates are irrelevant.
    tol : float
        Absolute tolerance on Euclidean remainders and on the final fit.
    max_iter : int
        Reduction steps allowed per pair before declaring non-lattice.

    Returns
    -------
    LatticeInfo
        A single distinct value ``v`` gives span ``|v|`` and offset 0; the
        single value 0 gives span 0 (degenerate, rejected by callers that
        need a span).
    """
    arr = np.sort(np.asarray(list(values), dtype=float).ravel())
    if arr.size == 0:
        raise ValueError("detect_lattice needs at least one value")
    if tol <= 0:
        raise ValueError("tol must be positive")
    if not np.all(np.isfinite(arr)):
        raise ValueError("values must be finite")

    distinct = [float(arr[0])]
    for v in arr[1:]:
        if v - distinct[-1] > tol:
            distinct.append(float(v))

    if len(distinct) == 1:
        v = distinct[0]
        if abs(v) <= tol:
            return LatticeInfo(True, 0.0, 0.0, tol)
        return LatticeInfo(True, abs(v), 0.0, tol)

    diffs = np.array(distinct[1:]) - distinct[0]
    g = float(diffs[0])
    for d in diffs[1:]:
        g = _real_gcd(g, float(d), tol, max_iter)
        if g is None:
            return LatticeInfo(False, 0.0, 0.0, tol)

    mult = np.rint(diffs / g)
    if mult.max() > MAX_MULTIPLIER:
        return LatticeInfo(False, 0.0, 0.0, tol)
    # least-squares refit of the span on the integer coordinates
    span = float(np.dot(mult, diffs) / np.dot(mult, mult))
    if np.max(np.abs(diffs - mult * span)) > tol:
        return LatticeInfo(False, 0.0, 0.0, tol)
    if math.gcd(*(int(k) for k in mult)) != 1:
        span *= math.gcd(*(int(k) for k in mult))
    return LatticeInfo(True, span, _canonical_offset(distinct[0], span, tol), tol)
