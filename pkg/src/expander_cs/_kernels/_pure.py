"""Pure-Python kernels: subset-expansion scans and the gap decoder.

This module is the reference implementation and the fallback when the
compiled extension is unavailable.  The compiled twin in ``_speedups``
must reproduce every result here exactly, including iteration order,
tie-breaking, and floating-point operation order; the equivalence is
pinned by tests.

Decoder state layout
--------------------
``GapState`` tracks, for a fixed measurement graph and sketch:

* ``gaps``             residual vector g = y - A x for the current estimate x;
* per-left-node mode summaries: the most frequent nonzero gap value among
  the node's d neighbors, as (mode_value, mode_count);
* a lazy max-heap over nodes keyed by (mode_count desc, node index asc).

Applying a candidate fix touches only the d neighbor gaps and the mode
summaries of left nodes sharing a measurement with the fixed node, which
is what keeps an iteration near O(d log d) instead of O(n).

Gap values are grouped exactly when ``quantum`` is 0 (integer-valued
sketches) and by buckets of width ``quantum`` otherwise.  The value a
fix applies is always the actual gap at the lowest-index measurement in
the winning bucket, never the bucket center.
"""

from __future__ import annotations

import heapq

STATUS_RECOVERED = 0
STATUS_STUCK = 1
STATUS_ITERATION_CAP = 2


def neighbor_masks(adj_flat: list[int], n: int, d: int) -> list[int]:
    """Per-left-node neighborhood bitmask (bit i set iff measurement i used)."""
    masks = []
    for j in range(n):
        m = 0
        for t in range(j * d, (j + 1) * d):
            m |= 1 << adj_flat[t]
        masks.append(m)
    return masks


def expansion_scan(
    adj_flat: list[int],
    n: int,
    m: int,
    d: int,
    s_max: int,
    epsilon: float,
    cap: int,
) -> tuple[float, list[int] | None, int]:
    """Exhaustively check |N(S)| > (1-epsilon)*d*|S| for all subsets of
    left nodes with 1 <= |S| <= s_max.

    Subsets are visited in lexicographic DFS order ({0}, {0,1}, {0,1,2},
    ...), stopping at the first violation.  Returns
    (worst_ratio, witness_or_None, subsets_checked) where worst_ratio is
    min |N(S)| / (d |S|) over the subsets actually checked.
    """
    masks = neighbor_masks(adj_flat, n, d)
    thresholds = [0.0] + [(1.0 - epsilon) * d * s for s in range(1, s_max + 1)]
    worst = 2.0
    checked = 0
    prefix: list[int] = []
    witness: list[int] | None = None

    def visit(start: int, depth: int, union: int) -> bool:
        nonlocal worst, checked, witness
        for v in range(start, n):
            u = union | masks[v]
            c = u.bit_count()
            checked += 1
            ratio = c / (d * depth)
            if ratio < worst:
                worst = ratio
            prefix.append(v)
            if c <= thresholds[depth]:
                witness = list(prefix)
                prefix.pop()
                return False
            if depth < s_max and not visit(v + 1, depth + 1, u):
                prefix.pop()
                return False
            prefix.pop()
        return True

    visit(0, 1, 0)
    return worst, witness, checked


def evaluate_subsets(
    adj_flat: list[int], n: int, m: int, d: int, subsets: list[list[int]]
) -> list[int]:
    """|N(S)| for each given subset of left nodes."""
    masks = neighbor_masks(adj_flat, n, d)
    sizes = []
    for subset in subsets:
        u = 0
        for v in subset:
            u |= masks[v]
        sizes.append(u.bit_count())
    return sizes


class GapState:
    """Residual gaps plus the per-node candidate index for gap decoding.

    Parameters
    ----------
    adj : sequence of sorted neighbor tuples, one per left node.
    rev : sequence of left-node tuples, one per right node (reverse adjacency).
    gaps : initial residual vector (a copy is taken).
    threshold : minimum mode_count for apply() to accept a fix.
    quantum : 0.0 for exact grouping, else the gap bucket width.
    """

    def __init__(self, adj, rev, gaps, threshold=1, quantum=0.0, estimate=None):
        self.adj = adj
        self.rev = rev
        self.n = len(adj)
        self.m = len(rev)
        self.d = len(adj[0]) if self.n else 0
        self.threshold = threshold
        self.quantum = quantum
        self.gaps = list(gaps)
        self.estimate: dict[int, float] = dict(estimate) if estimate else {}
        self.gap_support_size = sum(1 for g in self.gaps if self._key(g) != 0)
        self.mode_value = [0.0] * self.n
        self.mode_count = [0] * self.n
        self._gen = [0] * self.n
        self._heap: list[tuple[int, int, int]] = []
        for j in range(self.n):
            self._refresh_node(j)

    def _key(self, g: float):
        if self.quantum == 0.0:
            return g
        return round(g / self.quantum)

    def _refresh_node(self, j: int) -> None:
        """Recompute node j's mode summary from its neighbor gaps.

        Mode = most frequent nonzero gap bucket; ties broken toward the
        smaller bucket key.  The stored value is the gap at the
        lowest-index neighbor in the winning bucket.
        """
        counts: dict = {}
        best_key = None
        best = 0
        for i in self.adj[j]:
            k = self._key(self.gaps[i])
            if k == 0:
                continue
            c = counts.get(k, 0) + 1
            counts[k] = c
            if c > best or (c == best and (best_key is None or k < best_key)):
                best = c
                best_key = k
        self._gen[j] += 1
        self.mode_count[j] = best
        if best == 0:
            self.mode_value[j] = 0.0
            return
        for i in self.adj[j]:
            if self._key(self.gaps[i]) == best_key:
                self.mode_value[j] = self.gaps[i]
                break
        heapq.heappush(self._heap, (-best, j, self._gen[j]))

    def best_candidate(self) -> tuple[int, float, int] | None:
        """Peek the live node with maximal mode_count (ties: smallest index).

        Returns (node, value, count) or None when no node has a nonzero
        gap mode.
        """
        while self._heap:
            neg, j, gen = self._heap[0]
            if gen != self._gen[j] or -neg != self.mode_count[j]:
                heapq.heappop(self._heap)
                continue
            return j, self.mode_value[j], self.mode_count[j]
        return None

    def apply(self, j: int, value: float) -> None:
        """Apply the fix x_j += value and update gaps/index incrementally.

        The node must currently meet the threshold with exactly this
        mode value; that precondition is asserted, not checked softly.
        """
        assert self.mode_count[j] >= self.threshold, "candidate below threshold"
        assert self.mode_value[j] == value, "value is not node's current mode"
        new_total = self.estimate.get(j, 0.0) + value
        if new_total == 0:
            self.estimate.pop(j, None)
        else:
            self.estimate[j] = new_total
        touched: set[int] = {j}
        for i in self.adj[j]:
            old = self.gaps[i]
            new = old - value
            old_nz = self._key(old) != 0
            new_nz = self._key(new) != 0
            if old_nz and not new_nz:
                self.gap_support_size -= 1
            elif new_nz and not old_nz:
                self.gap_support_size += 1
            self.gaps[i] = new
            touched.update(self.rev[i])
        for node in sorted(touched):
            self._refresh_node(node)

    def rebuilt(self) -> "GapState":
        """Fresh state recomputed from scratch; oracle for incremental updates."""
        return GapState(
            self.adj, self.rev, self.gaps, self.threshold, self.quantum, self.estimate
        )

    def state_view(self):
        """The semantically meaningful content, for equality testing."""
        return (
            self.gaps,
            self.gap_support_size,
            self.mode_value,
            self.mode_count,
            self.estimate,
        )

    def __eq__(self, other):
        if not isinstance(other, GapState):
            return NotImplemented
        return self.state_view() == other.state_view()


def decode_run(
    adj,
    rev,
    y: list[float],
    threshold: int,
    max_iters: int,
    quantum: float,
) -> tuple[dict[int, float], list[tuple[int, int, float, int, int]], int]:
    """Run the identical-gap decoding loop.

    Each iteration picks the node with the most identical nonzero gaps
    (ties to the smallest node index), requires that count to reach
    ``threshold``, and adds the shared gap value to that coordinate.

    Returns (estimate, trace_rows, status); trace rows are
    (iteration, node, value, gap_support_before, gap_support_after).
    """
    state = GapState(adj, rev, y, threshold, quantum)
    trace: list[tuple[int, int, float, int, int]] = []
    iters = 0
    while True:
        if state.gap_support_size == 0:
            return state.estimate, trace, STATUS_RECOVERED
        if iters >= max_iters:
            return state.estimate, trace, STATUS_ITERATION_CAP
        cand = state.best_candidate()
        if cand is None or cand[2] < threshold:
            return state.estimate, trace, STATUS_STUCK
        j, value, _count = cand
        before = state.gap_support_size
        state.apply(j, value)
        iters += 1
        trace.append((iters, j, value, before, state.gap_support_size))
