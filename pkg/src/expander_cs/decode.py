"""Exact recovery of k-sparse signals from expander sketches.

Two decoders share one loop: starting from x = 0, repeatedly find a
left node whose measurements carry enough identical nonzero gaps
g_i = y_i - (Ax)_i and add that shared gap to the coordinate.

* ``decode_majority`` requires more than half of the node's d
  measurements to agree (works on 3/4-expanders, O(k*d) iterations).
* ``decode_fast`` requires at least (1-2*eps)*d agreeing measurements
  with eps < 1/4; on a certified (3k, 1-eps) expander it recovers any
  k-sparse signal within k/(1-4*eps) iterations, e.g. at most 2k when
  eps = 1/8, because every fix shrinks the gap support by at least
  (1-4*eps)*d.

Both are deterministic: the candidate with the largest agreeing count
wins, ties to the smallest node index.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

from . import _kernels
from ._exactla import gram_matrix, gram_rank, solve_gram
from ._kernels._pure import (
    STATUS_ITERATION_CAP,
    STATUS_RECOVERED,
    STATUS_STUCK,
    GapState,
)
from .errors import (
    AmbiguousSolutionError,
    BudgetExceededError,
    DimensionMismatchError,
    InvalidParametersError,
    enumeration_budget,
)
from .graph import BipartiteGraph
from .sketch import Sketch, SparseSignal, encode

RECOVERED = "recovered"
STUCK = "stuck"
ITERATION_CAP = "iteration-cap"

_STATUS_NAMES = {
    STATUS_RECOVERED: RECOVERED,
    STATUS_STUCK: STUCK,
    STATUS_ITERATION_CAP: ITERATION_CAP,
}


@dataclass(eq=True)
class TraceRow:
    iteration: int
    node: int
    value: float
    gap_support_before: int
    gap_support_after: int


@dataclass
class DecodeTrace:
    """Per-iteration record of a decode run plus the terminal status."""

    rows: list[TraceRow]
    status: str

    @property
    def iterations(self) -> int:
        return len(self.rows)

    def support_sizes(self) -> list[int]:
        """|G_t| trajectory: initial support followed by each post-fix size."""
        if not self.rows:
            return []
        return [self.rows[0].gap_support_before] + [r.gap_support_after for r in self.rows]


def default_quantum(g: BipartiteGraph, y: Sketch) -> float:
    """Gap-comparison tolerance: 0 (exact) for integer sketches, else
    1e-9 * d * max |y_i|."""
    if y.is_integral():
        return 0.0
    peak = max((abs(v) for v in y.values), default=0.0)
    return 1e-9 * g.d * peak if peak else 0.0


def majority_threshold(d: int) -> int:
    return d // 2 + 1


def fast_threshold(d: int, epsilon: float) -> int:
    return math.ceil((1.0 - 2.0 * epsilon) * d)


def _run(
    g: BipartiteGraph,
    y: Sketch,
    threshold: int,
    max_iters: int,
    quantum: float | None,
) -> tuple[SparseSignal, DecodeTrace]:
    if y.m != g.m:
        raise DimensionMismatchError(f"sketch dimension {y.m} != graph m {g.m}")
    if quantum is None:
        quantum = default_quantum(g, y)
    estimate, rows, status = _kernels.decode_run(
        g.adjacency, g.reverse_adjacency, y.values, threshold, max_iters, quantum
    )
    signal = SparseSignal(g.n, {j: v for j, v in estimate.items() if v != 0})
    trace = DecodeTrace([TraceRow(*row) for row in rows], _STATUS_NAMES[status])
    return signal, trace


def decode_majority(
    g: BipartiteGraph,
    y: Sketch,
    max_iters: int | None = None,
    *,
    quantum: float | None = None,
) -> tuple[SparseSignal, DecodeTrace]:
    """Recover with the more-than-half identical-gap rule.

    Returns the estimate and its trace; a stuck or capped run returns
    the partial estimate with the corresponding status rather than
    raising.
    """
    if max_iters is None:
        max_iters = 3 * g.m
    return _run(g, y, majority_threshold(g.d), max_iters, quantum)


def decode_fast(
    g: BipartiteGraph,
    y: Sketch,
    epsilon: float,
    max_iters: int | None = None,
    *,
    k_hint: int | None = None,
    quantum: float | None = None,
) -> tuple[SparseSignal, DecodeTrace]:
    """Recover with the (1-2*eps)*d identical-gap rule, eps < 1/4.

    On a graph certified as a (3k, 1-eps) expander and a sketch of a
    k-sparse signal this terminates within ceil(k/(1-4*eps)) iterations
    with the unique k-sparse preimage.  A stuck status means the graph
    lacked the assumed expansion for this instance.
    """
    if not 0 < epsilon < 0.25:
        raise InvalidParametersError("decode_fast requires 0 < epsilon < 1/4")
    threshold = fast_threshold(g.d, epsilon)
    # With eps < 1/4 two distinct gap values can never both reach the
    # threshold at one node, so the applied value is well defined.
    assert 2 * threshold > g.d
    if max_iters is None:
        if k_hint is not None:
            max_iters = math.ceil(k_hint / (1.0 - 4.0 * epsilon)) + 2
        else:
            max_iters = math.ceil(3 * g.m / g.d)
    return _run(g, y, threshold, max_iters, quantum)


def candidate_update(state: GapState, j: int, value: float) -> GapState:
    """Apply one fix to a GapState in place (see GapState.apply); returns
    the same state for chaining.  The incremental result is always
    identical to a full rebuild, which tests verify."""
    state.apply(j, value)
    return state


def build_gap_state(
    g: BipartiteGraph,
    y: Sketch,
    threshold: int = 1,
    quantum: float | None = None,
) -> GapState:
    """Fresh decoder state for a sketch (gaps = y, estimate = 0)."""
    if y.m != g.m:
        raise DimensionMismatchError(f"sketch dimension {y.m} != graph m {g.m}")
    if quantum is None:
        quantum = default_quantum(g, y)
    return GapState(g.adjacency, g.reverse_adjacency, y.values, threshold, quantum)


def verify_solution(
    g: BipartiteGraph, y: Sketch, x: SparseSignal, *, quantum: float | None = None
) -> bool:
    """True iff encode(g, x) == y, exactly in integer mode or within the
    gap tolerance in float mode."""
    if y.m != g.m:
        raise DimensionMismatchError(f"sketch dimension {y.m} != graph m {g.m}")
    if quantum is None:
        quantum = default_quantum(g, y)
    ax = encode(g, x)
    if quantum == 0.0:
        return ax.values == y.values
    return all(abs(a - b) <= quantum for a, b in zip(ax.values, y.values))


def brute_force_decode(
    g: BipartiteGraph, y: Sketch, k: int, *, budget: int | None = None
) -> SparseSignal | None:
    """Ground-truth oracle: enumerate every support of size <= k and
    solve the restricted system exactly.

    Returns the unique consistent <=k-sparse signal, None when no
    support fits, and raises AmbiguousSolutionError when two distinct
    solutions fit (which certifies the graph is not a good expander at
    this sparsity).  Integer sketches are solved over rationals, so the
    answer is exact.
    """
    if y.m != g.m:
        raise DimensionMismatchError(f"sketch dimension {y.m} != graph m {g.m}")
    if k < 0 or k > g.n:
        raise InvalidParametersError(f"sparsity must be in [0, {g.n}]")
    required = sum(math.comb(g.n, size) for size in range(0, k + 1))
    cap = enumeration_budget(budget)
    if required > cap:
        raise BudgetExceededError(required, cap)
    if not y.is_integral():
        return _brute_force_float(g, y, k)
    y_int = [int(v) for v in y.values]
    y_dot_y = sum(v * v for v in y_int)
    masks = g.neighbor_masks
    solution: SparseSignal | None = None
    if all(v == 0 for v in y_int):
        return SparseSignal(g.n, {})
    for size in range(1, k + 1):
        for support in itertools.combinations(range(g.n), size):
            gram = gram_matrix(masks, support)
            if gram_rank(gram) < size:
                # Dependent columns: any consistent solution here is
                # also reachable through a smaller or different support.
                continue
            rhs = [
                sum(y_int[i] for i in g.adjacency[j]) for j in support
            ]
            z = solve_gram(gram, rhs)
            if z is None:
                continue
            # Exact zero-residual test:
            # |y - A_S z|^2 = y.y - 2 z.(A_S^T y) + z.G.z
            zAy = sum(zi * ri for zi, ri in zip(z, rhs))
            zGz = Fraction(0)
            for a in range(size):
                for b in range(size):
                    if gram[a][b]:
                        zGz += z[a] * gram[a][b] * z[b]
            if y_dot_y - 2 * zAy + zGz != 0:
                continue
            entries = {
                support[t]: float(v) for t, v in enumerate(z) if v != 0
            }
            candidate = SparseSignal(g.n, entries)
            if solution is None:
                solution = candidate
            elif candidate != solution:
                raise AmbiguousSolutionError(solution, candidate)
    return solution


def _brute_force_float(g: BipartiteGraph, y: Sketch, k: int) -> SparseSignal | None:
    import numpy as np

    eta = default_quantum(g, y)
    dense = np.array(y.values)
    if bool(np.all(np.abs(dense) <= eta)):
        return SparseSignal(g.n, {})
    columns = np.zeros((g.m, g.n))
    for j, row in enumerate(g.adjacency):
        for i in row:
            columns[i, j] = 1.0
    solution: SparseSignal | None = None
    for size in range(1, k + 1):
        for support in itertools.combinations(range(g.n), size):
            sub = columns[:, support]
            z, _, _, _ = np.linalg.lstsq(sub, dense, rcond=None)
            if bool(np.max(np.abs(sub @ z - dense)) > eta):
                continue
            entries = {
                support[t]: float(v) for t, v in enumerate(z) if abs(v) > eta
            }
            candidate = SparseSignal(g.n, entries)
            if solution is None:
                solution = candidate
            elif candidate != solution:
                raise AmbiguousSolutionError(solution, candidate)
    return solution


def gap_elimination_violations(
    trace: DecodeTrace, d: int, epsilon: float
) -> list[int]:
    """Iterations whose gap-support decrease falls short of
    floor((1-4*eps)*d) + 1; empty on a run obeying the per-iteration
    progress bound for certified expanders."""
    minimum = math.floor((1.0 - 4.0 * epsilon) * d) + 1
    bad = []
    for row in trace.rows:
        if row.gap_support_before - row.gap_support_after < minimum:
            bad.append(row.iteration)
    return bad


def initial_gap_ok(trace: DecodeTrace, true_sparsity: int, d: int) -> bool:
    """|G_1| <= (true sparsity) * d; vacuously true for an empty trace."""
    if not trace.rows:
        return True
    return trace.rows[0].gap_support_before <= true_sparsity * d
