"""Exact rational linear algebra on restricted 0/1 column sets.

The sensing matrix is 0/1, so rank and consistency questions over a
small support S reduce to integer arithmetic on the |S|x|S| Gram matrix
G = A_S^T A_S (entries are neighborhood-overlap popcounts).  Working on
the Gram matrix over rationals avoids any floating-point false
negatives: for the positive-semidefinite G, G z = 0 iff A_S z = 0, and
the squared residual of a candidate solution is an exact rational.
"""

from __future__ import annotations

from fractions import Fraction


def gram_matrix(masks: list[int], support: tuple[int, ...]) -> list[list[int]]:
    s = len(support)
    g = [[0] * s for _ in range(s)]
    for a in range(s):
        ma = masks[support[a]]
        g[a][a] = ma.bit_count()
        for b in range(a + 1, s):
            ov = (ma & masks[support[b]]).bit_count()
            g[a][b] = ov
            g[b][a] = ov
    return g


def _eliminate(matrix: list[list[Fraction]]) -> tuple[list[list[Fraction]], list[int]]:
    """Row-reduce in place; returns (matrix, pivot column indices)."""
    rows = len(matrix)
    cols = len(matrix[0]) if rows else 0
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        pivot_row = None
        for rr in range(r, rows):
            if matrix[rr][c] != 0:
                pivot_row = rr
                break
        if pivot_row is None:
            continue
        matrix[r], matrix[pivot_row] = matrix[pivot_row], matrix[r]
        inv = Fraction(1, 1) / matrix[r][c]
        matrix[r] = [x * inv for x in matrix[r]]
        for rr in range(rows):
            if rr != r and matrix[rr][c] != 0:
                factor = matrix[rr][c]
                matrix[rr] = [x - factor * y for x, y in zip(matrix[rr], matrix[r])]
        pivots.append(c)
        r += 1
        if r == rows:
            break
    return matrix, pivots


def gram_rank(g: list[list[int]]) -> int:
    work = [[Fraction(x) for x in row] for row in g]
    _, pivots = _eliminate(work)
    return len(pivots)


def gram_null_vector(g: list[list[int]]) -> list[Fraction] | None:
    """A nonzero rational z with G z = 0, or None when G is nonsingular."""
    s = len(g)
    work = [[Fraction(x) for x in row] for row in g]
    reduced, pivots = _eliminate(work)
    if len(pivots) == s:
        return None
    free = next(c for c in range(s) if c not in pivots)
    z = [Fraction(0)] * s
    z[free] = Fraction(1)
    for r, c in enumerate(pivots):
        z[c] = -reduced[r][free]
    return z


def solve_gram(g: list[list[int]], rhs: list[int]) -> list[Fraction] | None:
    """Solve G z = rhs exactly; None when G is singular."""
    s = len(g)
    work = [[Fraction(x) for x in row] + [Fraction(rhs[r])] for r, row in enumerate(g)]
    reduced, pivots = _eliminate(work)
    if len(pivots) != s or any(c >= s for c in pivots):
        return None
    z = [Fraction(0)] * s
    for r, c in enumerate(pivots):
        z[c] = reduced[r][s]
    return z


def primitive_integer_vector(z: list[Fraction]) -> list[int]:
    """Scale a rational vector to coprime integers with positive leading sign."""
    from math import gcd, lcm

    denominators = [x.denominator for x in z]
    scale = lcm(*denominators) if denominators else 1
    ints = [int(x * scale) for x in z]
    g = 0
    for v in ints:
        g = gcd(g, abs(v))
    if g > 1:
        ints = [v // g for v in ints]
    for v in ints:
        if v != 0:
            if v < 0:
                ints = [-w for w in ints]
            break
    return ints
