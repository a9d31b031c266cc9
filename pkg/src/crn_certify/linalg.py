"""Exact rational linear algebra on small dense matrices.

Everything here works on lists of :class:`fractions.Fraction`; floats are
converted exactly (``Fraction(0.1)`` is the binary value, not 1/10), so
integer stoichiometry never meets rounding.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

Matrix = list[list[Fraction]]


def to_fractions(M) -> Matrix:
    return [[Fraction(x) for x in row] for row in _rows(M)]


def _rows(M):
    return [list(map(_scalar, row)) for row in M]


def _scalar(x):
    # numpy scalars -> python numbers so Fraction accepts them exactly
    if hasattr(x, "item"):
        return x.item()
    return x


def row_echelon(M: Matrix) -> tuple[Matrix, list[int]]:
    """Reduced row echelon form and pivot columns (copy, input untouched)."""
    R = [row[:] for row in M]
    pivots: list[int] = []
    if not R:
        return R, pivots
    n_rows, n_cols = len(R), len(R[0])
    r = 0
    for c in range(n_cols):
        piv = next((i for i in range(r, n_rows) if R[i][c] != 0), None)
        if piv is None:
            continue
        R[r], R[piv] = R[piv], R[r]
        p = R[r][c]
        R[r] = [x / p for x in R[r]]
        for i in range(n_rows):
            if i != r and R[i][c] != 0:
                f = R[i][c]
                R[i] = [a - f * b for a, b in zip(R[i], R[r])]
        pivots.append(c)
        r += 1
        if r == n_rows:
            break
    return R, pivots


def rank(M) -> int:
    F = to_fractions(M)
    if not F or not F[0]:
        return 0
    return len(row_echelon(F)[1])


def nullspace(M, n_cols: int | None = None) -> Matrix:
    """Basis (as rows) of {x : M x = 0}."""
    F = to_fractions(M)
    if not F:
        return [[Fraction(int(i == j)) for j in range(n_cols)] for i in range(n_cols or 0)]
    n = len(F[0])
    R, pivots = row_echelon(F)
    free = [c for c in range(n) if c not in pivots]
    basis = []
    for f in free:
        x = [Fraction(0)] * n
        x[f] = Fraction(1)
        for i, p in enumerate(pivots):
            x[p] = -R[i][f]
        basis.append(x)
    return basis


def solve(A, b) -> list[Fraction]:
    """Solve a square non-singular system exactly."""
    F = to_fractions(A)
    n = len(F)
    aug = [row + [Fraction(_scalar(bi))] for row, bi in zip(F, b)]
    R, pivots = row_echelon(aug)
    if pivots != list(range(n)):
        raise ZeroDivisionError("singular matrix")
    return [R[i][n] for i in range(n)]


def leading_principal_minors(M) -> list[Fraction]:
    """Leading principal minors via elimination without row exchange.

    The k-th minor is the product of the first k pivots; once a pivot
    vanishes, the remaining minors are computed by explicit determinants.
    """
    F = to_fractions(M)
    n = len(F)
    R = [row[:] for row in F]
    minors = []
    prod = Fraction(1)
    for k in range(n):
        p = R[k][k]
        if p == 0:
            return minors + [_det([row[: j + 1] for row in F[: j + 1]]) for j in range(k, n)]
        prod *= p
        minors.append(prod)
        for i in range(k + 1, n):
            if R[i][k] != 0:
                f = R[i][k] / p
                R[i] = [a - f * c for a, c in zip(R[i], R[k])]
    return minors


def _det(M: Matrix) -> Fraction:
    R = [row[:] for row in M]
    n = len(R)
    det = Fraction(1)
    for c in range(n):
        piv = next((i for i in range(c, n) if R[i][c] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != c:
            R[c], R[piv] = R[piv], R[c]
            det = -det
        det *= R[c][c]
        for i in range(c + 1, n):
            if R[i][c] != 0:
                f = R[i][c] / R[c][c]
                R[i] = [a - f * b for a, b in zip(R[i], R[c])]
    return det


def feasible_point(A_eq, b_eq: Sequence) -> list[Fraction] | None:
    """A point of {x >= 0 : A_eq x = b_eq}, or None when empty.

    Phase-one simplex with Bland's rule, exact arithmetic; Bland's rule
    guarantees termination on degenerate problems.
    """
    A = to_fractions(A_eq)
    b = [Fraction(_scalar(x)) for x in b_eq]
    m = len(A)
    if m == 0:
        return None
    n = len(A[0])
    for i in range(m):
        if b[i] < 0:
            A[i] = [-x for x in A[i]]
            b[i] = -b[i]
    # tableau columns: x (n), artificials (m), rhs
    T = [A[i] + [Fraction(int(i == j)) for j in range(m)] + [b[i]] for i in range(m)]
    basis = [n + i for i in range(m)]
    width = n + m
    cost = [Fraction(0)] * n + [Fraction(1)] * m
    while True:
        # reduced costs for minimizing the artificial sum
        red = cost[:]
        for i, bi in enumerate(basis):
            cb = cost[bi]
            if cb:
                red = [r - cb * t for r, t in zip(red, T[i][:width])]
        entering = next((j for j in range(width) if red[j] < 0), None)
        if entering is None:
            break
        best, leave = None, None
        for i in range(m):
            a = T[i][entering]
            if a > 0:
                ratio = T[i][-1] / a
                if best is None or ratio < best or (ratio == best and basis[i] < basis[leave]):
                    best, leave = ratio, i
        if leave is None:  # unbounded direction cannot occur in phase one
            break
        p = T[leave][entering]
        T[leave] = [x / p for x in T[leave]]
        for i in range(m):
            if i != leave and T[i][entering] != 0:
                f = T[i][entering]
                T[i] = [a - f * c for a, c in zip(T[i], T[leave])]
        basis[leave] = entering
    x = [Fraction(0)] * width
    for i, bi in enumerate(basis):
        x[bi] = T[i][-1]
    if any(x[n + i] != 0 for i in range(m)):
        return None
    return x[:n]


def strictly_positive_kernel_vector(M, n: int) -> list[Fraction] | None:
    """A vector w > 0 with M w = 0, or None if no such vector exists.

    By scale invariance this is feasibility of {w >= 1 : M w = 0}; the
    substitution w = 1 + s turns it into a standard-form problem in s >= 0.
    """
    F = to_fractions(M)
    if not F:
        return [Fraction(1)] * n
    rhs = [-sum(row) for row in F]
    s = feasible_point(F, rhs)
    if s is None:
        return None
    return [1 + si for si in s]


def strict_lyapunov_vector(A) -> list[Fraction] | None:
    """A vector v > 0 with A v < 0 componentwise, or None.

    Solved as {v >= 1, A v <= -1}: with v = 1 + s and slack t >= 0,
    A s + t = -1 - A 1.
    """
    F = to_fractions(A)
    n = len(F)
    if n == 0:
        return None
    eq = [F[i] + [Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    rhs = [-1 - sum(F[i]) for i in range(n)]
    sol = feasible_point(eq, rhs)
    if sol is None:
        return None
    return [1 + si for si in sol[:n]]
