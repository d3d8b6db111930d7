"""Exact rational linear solves for the graph Laplacian systems.

Elimination pivots on the magnitude of a canonical integer lift of the
candidate entries (scale each candidate column segment to integers by the
lcm of denominators, compare absolute values, break ties by row index),
which keeps the factorization deterministic across platforms.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd
from typing import List, Sequence

_ZERO = Fraction(0)


def _column_lift(entries: Sequence[Fraction]) -> List[int]:
    den = 1
    for e in entries:
        den = den * e.denominator // gcd(den, e.denominator)
    return [int(e * den) for e in entries]


def solve_exact(matrix, rhs) -> List[Fraction]:
    """Solve A x = b exactly; raises ValueError on a singular matrix."""
    n = len(matrix)
    a = [[Fraction(x) for x in row] + [Fraction(b)] for row, b in zip(matrix, rhs)]
    perm = list(range(n))
    for col in range(n):
        lifted = _column_lift([a[r][col] for r in range(col, n)])
        pivot_rel = max(range(len(lifted)), key=lambda i: (abs(lifted[i]), -i))
        pivot = col + pivot_rel
        if a[pivot][col] == 0:
            raise ValueError("singular matrix")
        if pivot != col:
            a[col], a[pivot] = a[pivot], a[col]
            perm[col], perm[pivot] = perm[pivot], perm[col]
        inv = 1 / a[col][col]
        for r in range(col + 1, n):
            f = a[r][col] * inv
            if f == 0:
                continue
            for c in range(col, n + 1):
                a[r][c] -= f * a[col][c]
    x = [_ZERO] * n
    for r in range(n - 1, -1, -1):
        s = a[r][n] - sum((a[r][c] * x[c] for c in range(r + 1, n)), _ZERO)
        x[r] = s / a[r][r]
    return x


class ExactLinearSolver:
    """Factor once, solve many right-hand sides with integer arithmetic.

    A single Gauss-Jordan pass on [A | I] produces the exact inverse,
    stored as an integer matrix over a common denominator; a solve is
    then one integer mat-vec and n exact divisions.
    """

    def __init__(self, matrix):
        n = len(matrix)
        a = [[Fraction(x) for x in row] + [_ZERO] * n for row in matrix]
        for i in range(n):
            a[i][n + i] = Fraction(1)
        for col in range(n):
            lifted = _column_lift([a[r][col] for r in range(col, n)])
            pivot_rel = max(range(len(lifted)), key=lambda i: (abs(lifted[i]), -i))
            pivot = col + pivot_rel
            if a[pivot][col] == 0:
                raise ValueError("singular matrix")
            if pivot != col:
                a[col], a[pivot] = a[pivot], a[col]
            inv = 1 / a[col][col]
            a[col] = [x * inv for x in a[col]]
            for r in range(n):
                if r == col or a[r][col] == 0:
                    continue
                f = a[r][col]
                arow, prow = a[r], a[col]
                for c in range(col, 2 * n):
                    arow[c] -= f * prow[c]
        inv_rows = [row[n:] for row in a]
        den = 1
        for row in inv_rows:
            for e in row:
                den = den * e.denominator // gcd(den, e.denominator)
        self.n = n
        self.den = den
        self.rows = [[int(e * den) for e in row] for row in inv_rows]

    def solve(self, rhs) -> List[Fraction]:
        rhs = [Fraction(b) for b in rhs]
        bden = 1
        for b in rhs:
            bden = bden * b.denominator // gcd(bden, b.denominator)
        bi = [int(b * bden) for b in rhs]
        scale = self.den * bden
        return [
            Fraction(sum(r * b for r, b in zip(row, bi)), scale)
            for row in self.rows
        ]
