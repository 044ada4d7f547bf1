"""Signals, sketches, and the measurement map y = A x.

Signals are sparse maps index -> nonzero value; sketches are dense
length-m vectors.  Integer-valued inputs stay exact end to end: sums of
a few thousand small integers in double precision incur no rounding, so
gap comparisons and the RIP-1 bounds are exact in that mode.  Real
inputs use an explicit tolerance (see decode.default_quantum).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

from ._exactla import gram_matrix, gram_null_vector, primitive_integer_vector
from .errors import (
    BudgetExceededError,
    DimensionMismatchError,
    InvalidParametersError,
    ParseError,
    ValidationError,
    enumeration_budget,
)
from .graph import BipartiteGraph


@dataclass(eq=True)
class SparseSignal:
    """Length-n vector stored as a map from index to nonzero value."""

    n: int
    entries: dict[int, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.n < 1:
            raise InvalidParametersError("signal dimension must be >= 1")
        for idx, value in self.entries.items():
            if not 0 <= idx < self.n:
                raise InvalidParametersError(f"signal index {idx} out of range [0, {self.n})")
            if value == 0:
                raise InvalidParametersError(f"stored value at index {idx} must be nonzero")

    @property
    def sparsity(self) -> int:
        return len(self.entries)

    def norm1(self) -> float:
        return sum(abs(v) for v in self.entries.values())

    def to_pairs(self) -> list[tuple[int, float]]:
        return sorted(self.entries.items())

    def to_dense(self) -> list[float]:
        dense = [0.0] * self.n
        for idx, value in self.entries.items():
            dense[idx] = value
        return dense

    def is_integral(self) -> bool:
        return all(float(v).is_integer() for v in self.entries.values())


@dataclass(eq=True)
class Sketch:
    """Dense measurement vector y of length m."""

    m: int
    values: list[float] = field(default_factory=list)

    def __post_init__(self):
        if self.m < 1:
            raise InvalidParametersError("sketch dimension must be >= 1")
        if len(self.values) != self.m:
            raise DimensionMismatchError(
                f"sketch has {len(self.values)} values, expected {self.m}"
            )
        self.values = [float(v) for v in self.values]

    def norm1(self) -> float:
        return sum(abs(v) for v in self.values)

    def is_integral(self) -> bool:
        return all(v.is_integer() for v in self.values)


def encode(g: BipartiteGraph, x: SparseSignal) -> Sketch:
    """Measure: y_i = sum of x_j over left nodes j adjacent to i.

    Cost O(sparsity * d).  Exact for integer-valued signals.
    """
    if x.n != g.n:
        raise DimensionMismatchError(f"signal dimension {x.n} != graph n {g.n}")
    y = [0.0] * g.m
    for j, value in sorted(x.entries.items()):
        for i in g.adjacency[j]:
            y[i] += value
    return Sketch(g.m, y)


def rip1_bounds(
    g: BipartiteGraph, x: SparseSignal, epsilon: float
) -> tuple[float, float, float, bool]:
    """Evaluate (1-2*eps)*d*|x|_1 <= |Ax|_1 <= d*|x|_1.

    Returns (lower, value, upper, holds).  The caller is responsible for
    x being sparse enough for the graph's certified expansion; the
    bounds are computed regardless, and a False result for a sparse x
    flags non-expansion.
    """
    if x.n != g.n:
        raise DimensionMismatchError(f"signal dimension {x.n} != graph n {g.n}")
    norm = x.norm1()
    lower = (1.0 - 2.0 * epsilon) * g.d * norm
    upper = g.d * norm
    value = encode(g, x).norm1()
    return lower, value, upper, lower <= value <= upper


def nullspace_sparse_search(
    g: BipartiteGraph, s: int, *, budget: int | None = None
) -> SparseSignal | None:
    """Search for a nonzero z with at most s nonzeros and A z = 0.

    Enumerates supports of size 1..s in ascending size then
    lexicographic order and rank-tests the restricted columns exactly
    (integer Gram matrices over rationals), so no float round-off can
    produce a false witness or miss one.  Returns the first witness as a
    primitive integer vector, or None.
    """
    if s < 0 or s > g.n:
        raise InvalidParametersError(f"support size must be in [0, {g.n}]")
    if s == 0:
        return None
    required = sum(math.comb(g.n, size) for size in range(1, s + 1))
    cap = enumeration_budget(budget)
    if required > cap:
        raise BudgetExceededError(required, cap)
    masks = g.neighbor_masks
    for size in range(1, s + 1):
        for support in itertools.combinations(range(g.n), size):
            gram = gram_matrix(masks, support)
            z = gram_null_vector(gram)
            if z is None:
                continue
            ints = primitive_integer_vector(z)
            entries = {
                support[t]: float(v) for t, v in enumerate(ints) if v != 0
            }
            return SparseSignal(g.n, entries)
    return None


SIGNAL_MAGIC = "SIGNAL 1"
SKETCH_MAGIC = "SKETCH 1"


def format_number(v: float) -> str:
    """Shortest round-trip decimal; integral values print without '.0'."""
    if v == int(v) and abs(v) < 1e16:
        return str(int(v))
    return repr(v)


def save_signal(x: SparseSignal, path) -> None:
    lines = [f"{SIGNAL_MAGIC} {x.n}"]
    for idx, value in x.to_pairs():
        lines.append(f"{idx} {format_number(value)}")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def load_signal(path) -> SparseSignal:
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise ParseError("empty signal file", line=1)
    header = lines[0].split()
    if len(header) != 3 or " ".join(header[:2]) != SIGNAL_MAGIC:
        raise ParseError(f"expected header `{SIGNAL_MAGIC} <n>`", line=1)
    try:
        n = int(header[2])
    except ValueError:
        raise ParseError("signal dimension is not an integer", line=1) from None
    entries: dict[int, float] = {}
    previous = -1
    for offset, line in enumerate(lines[1:]):
        lineno = offset + 2
        tokens = line.split()
        if len(tokens) != 2:
            raise ParseError("expected `<index> <value>`", line=lineno)
        try:
            idx = int(tokens[0])
            value = float(tokens[1])
        except ValueError:
            raise ParseError("bad index or value literal", line=lineno) from None
        if idx <= previous:
            raise ValidationError("indices must be strictly ascending", line=lineno)
        if not 0 <= idx < n:
            raise ValidationError(f"index {idx} out of range [0, {n})", line=lineno)
        if value == 0:
            raise ValidationError("explicit zero entries are not allowed", line=lineno)
        previous = idx
        entries[idx] = value
    return SparseSignal(n, entries)


def save_sketch(y: Sketch, path) -> None:
    lines = [f"{SKETCH_MAGIC} {y.m}"]
    lines.extend(format_number(v) for v in y.values)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def load_sketch(path) -> Sketch:
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise ParseError("empty sketch file", line=1)
    header = lines[0].split()
    if len(header) != 3 or " ".join(header[:2]) != SKETCH_MAGIC:
        raise ParseError(f"expected header `{SKETCH_MAGIC} <m>`", line=1)
    try:
        m = int(header[2])
    except ValueError:
        raise ParseError("sketch dimension is not an integer", line=1) from None
    if len(lines) != m + 1:
        raise ParseError(f"expected {m} values, found {len(lines) - 1}", line=len(lines))
    values = []
    for offset, line in enumerate(lines[1:]):
        lineno = offset + 2
        tokens = line.split()
        if len(tokens) != 1:
            raise ParseError("expected one value per line", line=lineno)
        try:
            values.append(float(tokens[0]))
        except ValueError:
            raise ParseError("bad value literal", line=lineno) from None
    return Sketch(m, values)
