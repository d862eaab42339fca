from __future__ import annotations

from fractions import Fraction

from ..errors import NotSymmetric
from .matrix import _Matrix, as_fraction


def exact_signature(g: _Matrix) -> tuple[int, int, int]:
    """Sylvester inertia (positives, negatives, zeros) by congruence
    diagonalisation over Q."""
    if not g.is_symmetric():
        raise NotSymmetric("signature of a non-symmetric matrix")
    n = g.nrows
    a = [[as_fraction(x) for x in r] for r in g.rows]
    pos = neg = zero = 0
    for i in range(n):
        if a[i][i] == 0:
            j = next((j for j in range(i + 1, n) if a[j][j] != 0), None)
            if j is not None:
                a[i], a[j] = a[j], a[i]
                for r in a:
                    r[i], r[j] = r[j], r[i]
            else:
                j = next((j for j in range(i + 1, n) if a[i][j] != 0), None)
                if j is None:
                    zero += 1
                    continue
                # e_i <- e_i + e_j makes the pivot 2 a_ij != 0
                a[i] = [x + y for x, y in zip(a[i], a[j])]
                for r in a:
                    r[i] += r[j]
        piv = a[i][i]
        if piv > 0:
            pos += 1
        else:
            neg += 1
        for k in range(i + 1, n):
            f = a[k][i] / piv
            if f:
                a[k] = [x - f * y for x, y in zip(a[k], a[i])]
                for r in a:
                    r[k] -= f * r[i]
    return pos, neg, zero


def is_positive_definite(g: _Matrix) -> bool:
    """All leading principal minors positive (computed incrementally by
    symmetric elimination, which yields the same ratios of minors)."""
    if not g.is_symmetric():
        raise NotSymmetric("definiteness of a non-symmetric matrix")
    n = g.nrows
    a = [[as_fraction(x) for x in r] for r in g.rows]
    for i in range(n):
        piv = a[i][i]
        # piv = (i+1)-th leading minor / i-th leading minor
        if piv <= 0:
            return False
        for k in range(i + 1, n):
            f = a[k][i] / piv
            if f:
                a[k] = [x - f * y for x, y in zip(a[k], a[i])]
    return True


def leading_minors(g: _Matrix) -> list[Fraction]:
    return [g.submatrix(range(k), range(k)).det() for k in range(1, g.nrows + 1)]
