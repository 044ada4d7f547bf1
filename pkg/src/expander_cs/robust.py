"""Robust recovery of almost-k-sparse signals.

The signal class has k significant entries with magnitude in
[level - spread, level + spread] and all other entries in
[-near_zero, near_zero].  Recovery runs in two phases:

1. A combinatorial phase walks the same identical-gap loop as the exact
   decoder but with iteration-dependent residual windows, emitting only
   the positions and signs of the significant entries.  Estimates are
   quantized to the levels {0, +-(level - spread), +-(level + spread)};
   actual magnitudes never come from this phase.
2. Least squares restricted to the recovered support produces the final
   values, with an l1 error bounded by O(n * near_zero) via the
   restricted isometry of the measurement graph.

The threshold schedule after t fixes is
    rho(t) = 2*t*spread + (D - t - 1)*near_zero
    phi(t) = 2*t*spread + (D - t)*near_zero
with D the right degree; rho bounds the residual contamination a still
unfixed significant entry sees, phi the post-fix residual.  Right
regularity is required because D enters the schedule.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._rand import make_rng, sample_sorted, uniform
from .decode import DecodeTrace, TraceRow, fast_threshold
from .decode import ITERATION_CAP, RECOVERED, STUCK
from .errors import (
    DimensionMismatchError,
    InadmissibleModelError,
    InvalidParametersError,
)
from .graph import BipartiteGraph
from .sketch import Sketch, SparseSignal, encode


@dataclass(eq=True)
class AlmostSparseModel:
    """Two-level signal class parameters.

    k : number of significant entries.
    near_zero : magnitude bound for the insignificant entries (lambda).
    level : center magnitude of significant entries (L).
    spread : half-width of the significant magnitude band (Delta).
    right_degree : right degree D of the graph this model is used with.

    Admissibility requires level > 2*k*spread + right_degree*near_zero,
    i.e. a significant entry always dominates the worst-case clutter on
    a measurement.
    """

    k: int
    near_zero: float
    level: float
    spread: float
    right_degree: int

    def __post_init__(self):
        if self.k < 0:
            raise InvalidParametersError("k must be >= 0")
        if self.near_zero < 0 or self.spread < 0:
            raise InvalidParametersError("near_zero and spread must be >= 0")
        if self.level <= 0:
            raise InvalidParametersError("level must be positive")
        if self.right_degree < 1:
            raise InvalidParametersError("right_degree must be >= 1")
        bound = 2 * self.k * self.spread + self.right_degree * self.near_zero
        if not self.level > bound:
            raise InadmissibleModelError(
                f"need level > 2*k*spread + D*near_zero = {bound}, got {self.level}"
            )

    def significant_band(self) -> tuple[float, float]:
        return self.level - self.spread, self.level + self.spread


@dataclass(eq=True)
class ThresholdSchedule:
    """Iteration-dependent residual thresholds rho(t), phi(t).

    phi(t) - rho(t) == near_zero for every t, and both are nondecreasing
    in t whenever 2*spread >= near_zero.
    """

    spread: float
    near_zero: float
    right_degree: int

    def rho(self, t: int) -> float:
        return 2.0 * t * self.spread + (self.right_degree - t - 1) * self.near_zero

    def phi(self, t: int) -> float:
        return 2.0 * t * self.spread + (self.right_degree - t) * self.near_zero


def gen_almost_sparse(
    model: AlmostSparseModel, n: int, seed: int
) -> SparseSignal:
    """Sample a signal from the model: k significant entries at random
    positions with random sign and magnitude uniform in the band, every
    other entry uniform in [-near_zero, near_zero].  Deterministic per
    seed."""
    if model.k > n:
        raise InvalidParametersError(f"k={model.k} exceeds dimension {n}")
    rng = make_rng(seed)
    positions = set(sample_sorted(rng, n, model.k))
    lo, hi = model.significant_band()
    entries: dict[int, float] = {}
    for idx in range(n):
        if idx in positions:
            magnitude = uniform(rng, lo, hi)
            sign = 1.0 if rng.getrandbits(1) == 0 else -1.0
            value = sign * magnitude
        elif model.near_zero > 0:
            value = uniform(rng, -model.near_zero, model.near_zero)
        else:
            continue
        if value != 0:
            entries[idx] = value
    return SparseSignal(n, entries)


def _find_candidate(g, gaps, x_hat, model, schedule, fixes, threshold):
    """Best (node, level, category, residual) fix at the current state.

    A node qualifies through category (a) when at least ``threshold`` of
    its measurements hold same-sign gaps with magnitude in the
    single-entry window around level, or through category (b) with the
    doubled window around 2*level (a sign error being undone); in both
    cases some quantization level must bring those residuals under the
    next phi.  Preference: category (a) first, then smaller post-fix
    max-residual, then smaller node index.
    """
    rho = schedule.rho(fixes)
    phi_next = schedule.phi(fixes + 1)
    lvl, spr, nz = model.level, model.spread, model.near_zero
    windows = (
        (lvl - spr - nz - rho, lvl + spr + nz + rho),
        (2 * lvl - 2 * spr - rho, 2 * lvl + 2 * spr + rho),
    )
    levels: list[float] = []
    for candidate in (0.0, lvl - spr, lvl + spr, -(lvl - spr), -(lvl + spr)):
        if candidate not in levels:
            levels.append(candidate)
    best = None
    best_key = None
    for j in range(g.n):
        current = x_hat.get(j, 0.0)
        row = g.adjacency[j]
        for cat, (lo, hi) in enumerate(windows):
            qualifying = [
                i for i in row if gaps[i] != 0 and lo <= abs(gaps[i]) <= hi
            ]
            if len(qualifying) < threshold:
                continue
            positive = gaps[qualifying[0]] > 0
            if any((gaps[i] > 0) != positive for i in qualifying):
                continue
            for level in levels:
                if level == current:
                    continue
                delta = level - current
                residual = max(abs(gaps[i] - delta) for i in qualifying)
                if residual > phi_next:
                    continue
                key = (cat, residual, j)
                if best_key is None or key < best_key:
                    best_key = key
                    best = (j, level, cat, residual)
    return best


def decode_robust_support(
    g: BipartiteGraph,
    y: Sketch,
    model: AlmostSparseModel,
    epsilon: float,
    max_iters: int | None = None,
) -> tuple[tuple[tuple[int, int], ...], DecodeTrace]:
    """Identify positions and signs of the significant entries.

    Iterates: exit once every residual is within phi(t), else apply the
    best qualifying quantized fix.  On graphs with the assumed expansion
    and an admissible model this stops within 2k iterations with the
    exact significant support and signs.

    Returns (((index, sign), ...), trace); trace support counts are the
    number of measurements with residual above near_zero * D.
    """
    if y.m != g.m:
        raise DimensionMismatchError(f"sketch dimension {y.m} != graph m {g.m}")
    if g.right_degree is None:
        raise InvalidParametersError("robust decoding requires a right-regular graph")
    if g.right_degree != model.right_degree:
        raise InvalidParametersError(
            f"graph right degree {g.right_degree} != model right degree {model.right_degree}"
        )
    if not 0 < epsilon < 0.25:
        raise InvalidParametersError("robust decoding requires 0 < epsilon < 1/4")
    if max_iters is None:
        max_iters = 2 * model.k
    threshold = fast_threshold(g.d, epsilon)
    schedule = ThresholdSchedule(model.spread, model.near_zero, model.right_degree)
    noise_floor = model.near_zero * model.right_degree
    gaps = list(y.values)
    x_hat: dict[int, float] = {}
    rows: list[TraceRow] = []
    fixes = 0

    def support_size() -> int:
        return sum(1 for gap in gaps if abs(gap) > noise_floor)

    while True:
        if max(abs(gap) for gap in gaps) <= schedule.phi(fixes):
            status = RECOVERED
            break
        if fixes >= max_iters:
            status = ITERATION_CAP
            break
        found = _find_candidate(g, gaps, x_hat, model, schedule, fixes, threshold)
        if found is None:
            status = STUCK
            break
        j, level, _cat, _residual = found
        before = support_size()
        delta = level - x_hat.get(j, 0.0)
        if level == 0.0:
            x_hat.pop(j, None)
        else:
            x_hat[j] = level
        for i in g.adjacency[j]:
            gaps[i] -= delta
        fixes += 1
        rows.append(TraceRow(fixes, j, level, before, support_size()))

    support = tuple(
        sorted((j, 1 if value > 0 else -1) for j, value in x_hat.items())
    )
    return support, DecodeTrace(rows, status)


def least_squares_refine(
    g: BipartiteGraph, y: Sketch, support
) -> SparseSignal:
    """Sparse vector on ``support`` minimizing the l2 sketch residual.

    Solved densely at |support| scale by orthogonal factorization
    (numpy lstsq); rank deficiency falls back to the minimum-norm
    solution.  Empty support yields the zero signal.
    """
    if y.m != g.m:
        raise DimensionMismatchError(f"sketch dimension {y.m} != graph m {g.m}")
    indices = sorted(support)
    if not indices:
        return SparseSignal(g.n, {})
    for j in indices:
        if not 0 <= j < g.n:
            raise InvalidParametersError(f"support index {j} out of range [0, {g.n})")
    columns = np.zeros((g.m, len(indices)))
    for t, j in enumerate(indices):
        for i in g.adjacency[j]:
            columns[i, t] = 1.0
    v, _, _, _ = np.linalg.lstsq(columns, np.array(y.values), rcond=None)
    entries = {j: float(value) for j, value in zip(indices, v) if value != 0}
    return SparseSignal(g.n, entries)


@dataclass
class RiprCertificate:
    """Numeric evaluation of both restricted-isometry inequalities for a
    vector u and support S, with b = |A u|_1:

        |u_S|_1 <= b / (d (1-2e)) + (2e / (1-2e)) |u|_1
        ((1-4e)/(1-2e)) |u_S|_1 <= b / (d (1-2e)) + (2e / (1-2e)) |u_off|_1
    """

    lhs_full: float
    rhs_full: float
    lhs_split: float
    rhs_split: float

    @property
    def holds(self) -> bool:
        slack = 1e-12 * max(1.0, abs(self.rhs_full), abs(self.rhs_split))
        return (
            self.lhs_full <= self.rhs_full + slack
            and self.lhs_split <= self.rhs_split + slack
        )


def ripr_error_bound(
    g: BipartiteGraph, u: SparseSignal, support, epsilon: float
) -> RiprCertificate:
    """Evaluate the restricted-isometry error certificate for u on a
    support set; valid whenever the graph expands at |support| scale
    with slack epsilon, and a numeric failure flags non-expansion."""
    if u.n != g.n:
        raise DimensionMismatchError(f"vector dimension {u.n} != graph n {g.n}")
    if not 0 < epsilon < 0.5:
        raise InvalidParametersError("certificate needs 0 < epsilon < 1/2")
    support = set(support)
    b = encode(g, u).norm1()
    norm_all = u.norm1()
    norm_on = sum(abs(v) for j, v in u.entries.items() if j in support)
    norm_off = norm_all - norm_on
    one_minus = 1.0 - 2.0 * epsilon
    lead = b / (g.d * one_minus)
    tail = 2.0 * epsilon / one_minus
    return RiprCertificate(
        lhs_full=norm_on,
        rhs_full=lead + tail * norm_all,
        lhs_split=(1.0 - 4.0 * epsilon) / one_minus * norm_on,
        rhs_split=lead + tail * norm_off,
    )


def ripr_support_bound(
    g: BipartiteGraph,
    sketch_residual_norm1: float,
    off_support_norm1: float,
    epsilon: float,
) -> float:
    """Observable upper bound on |(x - v)_S|_1 after refinement, from the
    sketch residual |y - A v|_1 and a bound on the off-support mass
    (at most n * near_zero for an admissible model)."""
    if not 0 < epsilon < 0.25:
        raise InvalidParametersError("bound needs 0 < epsilon < 1/4")
    one_minus = 1.0 - 2.0 * epsilon
    lead = sketch_residual_norm1 / (g.d * one_minus)
    tail = 2.0 * epsilon / one_minus * off_support_norm1
    return (lead + tail) * one_minus / (1.0 - 4.0 * epsilon)


@dataclass
class RobustResult:
    support: tuple[tuple[int, int], ...]
    refined: SparseSignal
    trace: DecodeTrace
    residual_norm1: float
    residual_norm2: float
    support_error_bound: float


def robust_pipeline(
    g: BipartiteGraph,
    y: Sketch,
    model: AlmostSparseModel,
    epsilon: float,
    max_iters: int | None = None,
) -> RobustResult:
    """Support identification followed by restricted least squares,
    packaged with residual norms and the observable error bound."""
    support, trace = decode_robust_support(g, y, model, epsilon, max_iters)
    indices = [j for j, _sign in support]
    refined = least_squares_refine(g, y, indices)
    residual = [a - b for a, b in zip(encode(g, refined).values, y.values)]
    norm1 = sum(abs(r) for r in residual)
    norm2 = math.sqrt(sum(r * r for r in residual))
    bound = ripr_support_bound(g, norm1, g.n * model.near_zero, epsilon)
    return RobustResult(support, refined, trace, norm1, norm2, bound)
