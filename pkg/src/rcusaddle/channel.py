"""Discrete memoryless channels with an input distribution.

Channel files are line oriented::

    # binary symmetric channel
    X 2
    Y 2
    Q 0.5 0.5
    W 0.85 0.15
    W 0.15 0.85

Lines starting with ``#`` are comments. ``W`` rows appear in input order.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ChannelSpecError

STOCHASTIC_TOL = 1e-12
ZERO_FLOOR = 1e-300

_DECIMAL = re.compile(r"^[+-]?(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?$")


@dataclass(frozen=True, eq=False)
class ChannelModel:
    """Transition matrix ``W[x, y] = W(y|x)`` and input distribution ``Q``."""

    W: np.ndarray
    Q: np.ndarray

    def __post_init__(self):
        W = np.array(self.W, dtype=float)
        Q = np.array(self.Q, dtype=float).ravel()
        if W.ndim != 2 or W.shape[0] < 1 or W.shape[1] < 1:
            raise ChannelSpecError("W must be a non-empty matrix")
        if Q.shape[0] != W.shape[0]:
            raise ChannelSpecError(f"Q has {Q.shape[0]} entries but W has {W.shape[0]} rows")
        # sub-1e-300 probabilities are exact zeros
        W = np.where((W >= 0) & (W < ZERO_FLOOR), 0.0, W)
        Q = np.where((Q >= 0) & (Q < ZERO_FLOOR), 0.0, Q)
        for x, row in enumerate(W):
            if np.any(row < 0) or np.any(row > 1) or not np.all(np.isfinite(row)):
                raise ChannelSpecError(f"W row {x}: entries must lie in [0, 1]")
            if abs(row.sum() - 1.0) > STOCHASTIC_TOL:
                raise ChannelSpecError(f"W row {x}: row not stochastic (sums to {row.sum():.17g})")
        if np.any(Q < 0) or np.any(Q > 1) or not np.all(np.isfinite(Q)):
            raise ChannelSpecError("Q: entries must lie in [0, 1]")
        if abs(Q.sum() - 1.0) > STOCHASTIC_TOL:
            raise ChannelSpecError(f"Q: not a probability vector (sums to {Q.sum():.17g})")
        if not np.any(Q[:, None] * W > 0):
            raise ChannelSpecError("no (x, y) pair with positive probability")
        W.setflags(write=False)
        Q.setflags(write=False)
        object.__setattr__(self, "W", W)
        object.__setattr__(self, "Q", Q)

    @property
    def input_size(self) -> int:
        return self.W.shape[0]

    @property
    def output_size(self) -> int:
        return self.W.shape[1]

    def __eq__(self, other):
        if not isinstance(other, ChannelModel):
            return NotImplemented
        return np.array_equal(self.W, other.W) and np.array_equal(self.Q, other.Q)

    def __hash__(self):
        return hash((self.W.shape, self.W.tobytes(), self.Q.tobytes()))

    def __repr__(self):
        return f"ChannelModel(W={self.W.tolist()}, Q={self.Q.tolist()})"


@dataclass(frozen=True)
class SingularityReport:
    y1_set: frozenset
    is_singular: bool


def builtin_bsc(delta: float) -> ChannelModel:
    """Binary symmetric channel with crossover ``delta`` and uniform input."""
    if not 0.0 < delta < 0.5:
        raise ChannelSpecError(f"BSC crossover must lie in (0, 0.5), got {delta}")
    return ChannelModel(W=[[1 - delta, delta], [delta, 1 - delta]], Q=[0.5, 0.5])


def bsc_crossover(channel: ChannelModel) -> float | None:
    """Return delta if ``channel`` is a BSC with uniform input, else None."""
    W, Q = channel.W, channel.Q
    if W.shape != (2, 2) or Q[0] != 0.5 or Q[1] != 0.5:
        return None
    if W[0, 0] != W[1, 1] or W[0, 1] != W[1, 0]:
        return None
    delta = min(W[0, 1], W[0, 0])
    return float(delta) if 0.0 < delta < 0.5 else None


def _parse_numbers(tokens, lineno):
    out = []
    for tok in tokens:
        if not _DECIMAL.match(tok):
            raise ChannelSpecError(f"not a decimal number: {tok!r}", lineno)
        out.append(float(tok))
    return out


def _parse_size(tokens, key, lineno):
    if len(tokens) != 1 or not tokens[0].isdigit() or int(tokens[0]) < 1:
        raise ChannelSpecError(f"{key} expects one positive integer", lineno)
    return int(tokens[0])


def parse_channel_spec(text: str) -> ChannelModel:
    """Parse the line-oriented channel format into a validated ChannelModel."""
    x_size = y_size = None
    q = None
    rows = []
    last_line = 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        last_line = lineno
        key, *tokens = line.split()
        if key == "X":
            if x_size is not None:
                raise ChannelSpecError("duplicate X line", lineno)
            x_size = _parse_size(tokens, "X", lineno)
        elif key == "Y":
            if x_size is None or y_size is not None:
                raise ChannelSpecError("Y line must follow X and appear once", lineno)
            y_size = _parse_size(tokens, "Y", lineno)
        elif key == "Q":
            if y_size is None or q is not None:
                raise ChannelSpecError("Q line must follow X and Y and appear once", lineno)
            q = _parse_numbers(tokens, lineno)
            if len(q) != x_size:
                raise ChannelSpecError(f"Q has {len(q)} entries, expected {x_size}", lineno)
        elif key == "W":
            if q is None:
                raise ChannelSpecError("W lines must follow the Q line", lineno)
            row = _parse_numbers(tokens, lineno)
            if len(row) != y_size:
                raise ChannelSpecError(f"W row has {len(row)} entries, expected {y_size}", lineno)
            if len(rows) == x_size:
                raise ChannelSpecError(f"more than {x_size} W rows", lineno)
            if any(w < 0 or w > 1 for w in row):
                raise ChannelSpecError("W entries must lie in [0, 1]", lineno)
            if abs(sum(row) - 1.0) > STOCHASTIC_TOL:
                raise ChannelSpecError(f"row not stochastic (sums to {sum(row):.17g})", lineno)
            rows.append(row)
        else:
            raise ChannelSpecError(f"unknown directive {key!r}", lineno)
    if x_size is None or y_size is None or q is None:
        raise ChannelSpecError("missing X, Y or Q line", last_line or None)
    if len(rows) != x_size:
        raise ChannelSpecError(f"expected {x_size} W rows, found {len(rows)}", last_line)
    try:
        return ChannelModel(W=rows, Q=q)
    except ChannelSpecError as exc:
        raise ChannelSpecError(str(exc), last_line) from None


def format_channel_spec(channel: ChannelModel) -> str:
    """Serialize to the channel file format with 17 significant digits."""
    fmt = lambda vals: " ".join(f"{v:.17g}" for v in vals)  # noqa: E731
    lines = [f"X {channel.input_size}", f"Y {channel.output_size}", f"Q {fmt(channel.Q)}"]
    lines += [f"W {fmt(row)}" for row in channel.W]
    return "\n".join(lines) + "\n"


def load_channel(source: str) -> ChannelModel:
    """Load from a file path or a builtin of the form ``bsc:<delta>``."""
    if source.startswith("bsc:"):
        value = source[4:]
        if not _DECIMAL.match(value):
            raise ChannelSpecError(f"bad BSC crossover {value!r}")
        return builtin_bsc(float(value))
    try:
        text = Path(source).read_text(encoding="utf-8")
    except OSError as exc:
        raise ChannelSpecError(f"cannot read channel file {source}: {exc}") from None
    try:
        return parse_channel_spec(text)
    except ChannelSpecError as exc:
        raise ChannelSpecError(f"{source}: {exc}") from None


def singularity_report(channel: ChannelModel) -> SingularityReport:
    """Outputs reachable from two inputs with different transition probabilities.

    Equality of ``W(y|x)`` values is exact: singularity is a structural
    property of the specified numbers.
    """
    W, Q = channel.W, channel.Q
    y1 = set()
    for y in range(channel.output_size):
        vals = {W[x, y] for x in range(channel.input_size) if Q[x] > 0 and W[x, y] > 0}
        if len(vals) > 1:
            y1.add(y)
    return SingularityReport(frozenset(y1), not y1)
