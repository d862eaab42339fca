"""Dense exact matrices over Z and Q.

Entries are Python ints (``IntegerMatrix``) or reduced ``Fraction`` values
(``RationalMatrix``).  Both are immutable; arithmetic returns new objects.
Mixing an integer and a rational operand promotes the result to
``RationalMatrix``.
"""

from __future__ import annotations

from fractions import Fraction
from functools import reduce
from math import gcd, lcm
from numbers import Rational
from typing import Iterable, Sequence


def as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not matrix entries")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    if isinstance(x, Rational):
        return Fraction(x.numerator, x.denominator)
    raise TypeError(f"cannot use {x!r} as an exact rational (floats are refused)")


def _as_int(x) -> int:
    if isinstance(x, bool):
        raise TypeError("booleans are not matrix entries")
    if isinstance(x, int):
        return x
    f = as_fraction(x)
    if f.denominator != 1:
        raise ValueError(f"entry {f} is not an integer")
    return f.numerator


class _Matrix:
    __slots__ = ("_rows", "nrows", "ncols", "_hash")

    _coerce = staticmethod(as_fraction)

    def __init__(self, rows: Iterable[Iterable], ncols: int | None = None):
        data = tuple(tuple(self._coerce(x) for x in r) for r in rows)
        if data:
            width = len(data[0])
            if any(len(r) != width for r in data):
                raise ValueError("ragged matrix rows")
            if ncols is not None and ncols != width:
                raise ValueError("column count mismatch")
        else:
            width = 0 if ncols is None else ncols
        object.__setattr__(self, "_rows", data)
        object.__setattr__(self, "nrows", len(data))
        object.__setattr__(self, "ncols", width)
        object.__setattr__(self, "_hash", None)

    def __setattr__(self, name, value):
        raise AttributeError("matrices are immutable")

    # -- constructors -------------------------------------------------
    @classmethod
    def zeros(cls, nrows: int, ncols: int | None = None):
        ncols = nrows if ncols is None else ncols
        return cls([[0] * ncols for _ in range(nrows)], ncols=ncols)

    @classmethod
    def identity(cls, n: int):
        return cls([[1 if i == j else 0 for j in range(n)] for i in range(n)], ncols=n)

    @classmethod
    def diag(cls, entries: Sequence):
        n = len(entries)
        return cls([[entries[i] if i == j else 0 for j in range(n)] for i in range(n)], ncols=n)

    @classmethod
    def block_diag(cls, *blocks: "_Matrix"):
        n = sum(b.nrows for b in blocks)
        m = sum(b.ncols for b in blocks)
        rows = [[0] * m for _ in range(n)]
        r0 = c0 = 0
        for b in blocks:
            for i in range(b.nrows):
                for j in range(b.ncols):
                    rows[r0 + i][c0 + j] = b._rows[i][j]
            r0 += b.nrows
            c0 += b.ncols
        return cls(rows, ncols=m)

    @classmethod
    def from_flat(cls, entries: Sequence, nrows: int, ncols: int):
        if len(entries) != nrows * ncols:
            raise ValueError("wrong number of entries")
        return cls([entries[i * ncols:(i + 1) * ncols] for i in range(nrows)], ncols=ncols)

    # -- access -------------------------------------------------------
    @property
    def shape(self) -> tuple[int, int]:
        return self.nrows, self.ncols

    @property
    def rows(self) -> tuple[tuple, ...]:
        return self._rows

    def row(self, i: int) -> tuple:
        return self._rows[i]

    def col(self, j: int) -> tuple:
        return tuple(r[j] for r in self._rows)

    def __getitem__(self, key):
        i, j = key
        return self._rows[i][j]

    def tolist(self) -> list[list]:
        return [list(r) for r in self._rows]

    def flat(self) -> tuple:
        return tuple(x for r in self._rows for x in r)

    def submatrix(self, rows: Sequence[int], cols: Sequence[int]):
        return type(self)([[self._rows[i][j] for j in cols] for i in rows], ncols=len(cols))

    def stack(self, other: "_Matrix"):
        if self.ncols != other.ncols and self.nrows and other.nrows:
            raise ValueError("column count mismatch")
        cls = _result_type(self, other)
        return cls(self._rows + other._rows, ncols=max(self.ncols, other.ncols))

    # -- structure ----------------------------------------------------
    @property
    def T(self):
        if not self.nrows:
            return type(self)([[] for _ in range(self.ncols)], ncols=0)
        return type(self)([list(c) for c in zip(*self._rows)], ncols=self.nrows)

    def is_square(self) -> bool:
        return self.nrows == self.ncols

    def is_zero(self) -> bool:
        return all(x == 0 for r in self._rows for x in r)

    def is_symmetric(self) -> bool:
        return self.is_square() and all(
            self._rows[i][j] == self._rows[j][i]
            for i in range(self.nrows) for j in range(i + 1, self.ncols))

    def is_alternating(self) -> bool:
        return self.is_square() and all(
            self._rows[i][j] == -self._rows[j][i]
            for i in range(self.nrows) for j in range(i, self.ncols))

    def trace(self):
        return sum((self._rows[i][i] for i in range(self.nrows)), self._coerce(0))

    # -- arithmetic ---------------------------------------------------
    def __eq__(self, other):
        if not isinstance(other, _Matrix):
            return NotImplemented
        return self.shape == other.shape and self._rows == other._rows

    def __hash__(self):
        if self._hash is None:
            object.__setattr__(self, "_hash", hash((self.shape, self._rows)))
        return self._hash

    def __neg__(self):
        return type(self)([[-x for x in r] for r in self._rows], ncols=self.ncols)

    def __add__(self, other):
        if not isinstance(other, _Matrix):
            return NotImplemented
        if self.shape != other.shape:
            raise ValueError(f"shape mismatch {self.shape} + {other.shape}")
        cls = _result_type(self, other)
        return cls([[a + b for a, b in zip(r, s)] for r, s in zip(self._rows, other._rows)],
                   ncols=self.ncols)

    def __sub__(self, other):
        if not isinstance(other, _Matrix):
            return NotImplemented
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, _Matrix):
            return self.__matmul__(other)
        if isinstance(other, int) and not isinstance(other, bool):
            return type(self)([[x * other for x in r] for r in self._rows], ncols=self.ncols)
        c = as_fraction(other)
        return RationalMatrix([[x * c for x in r] for r in self._rows], ncols=self.ncols)

    def __rmul__(self, other):
        if isinstance(other, _Matrix):
            return NotImplemented
        return self.__mul__(other)

    def __matmul__(self, other):
        if not isinstance(other, _Matrix):
            return NotImplemented
        if self.ncols != other.nrows:
            raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
        cls = _result_type(self, other)
        # integer arithmetic throughout: scale each row of self and all of
        # other to integers, and divide once per entry at the end
        d_other = lcm(1, *(x.denominator for r in other._rows for x in r))
        cols = [[x.numerator * (d_other // x.denominator) for x in c] for c in zip(*other._rows)] \
            if other.nrows else [[] for _ in range(other.ncols)]
        out = []
        for r in self._rows:
            d_row = lcm(1, *(a.denominator for a in r))
            nz = [(k, a.numerator * (d_row // a.denominator)) for k, a in enumerate(r) if a]
            den = d_row * d_other
            sums = [sum(a * c[k] for k, a in nz) for c in cols]
            out.append(sums if den == 1 else [Fraction(v, den) for v in sums])
        return cls(out, ncols=other.ncols)

    def __pow__(self, e: int):
        if not self.is_square() or e < 0:
            raise ValueError("only non-negative powers of square matrices")
        result = type(self).identity(self.nrows)
        base = self
        while e:
            if e & 1:
                result = result @ base
            base = base @ base
            e >>= 1
        return result

    def apply(self, vec: Sequence) -> tuple:
        """Matrix times column vector, returned as a tuple."""
        if len(vec) != self.ncols:
            raise ValueError("vector length mismatch")
        return tuple(sum((a * b for a, b in zip(r, vec) if a), 0) for r in self._rows)

    def rapply(self, vec: Sequence) -> tuple:
        """Row vector times matrix."""
        if len(vec) != self.nrows:
            raise ValueError("vector length mismatch")
        out = [0] * self.ncols
        for a, r in zip(vec, self._rows):
            if a:
                for j, b in enumerate(r):
                    if b:
                        out[j] += a * b
        return tuple(out)

    # -- conversions --------------------------------------------------
    def to_rational(self) -> "RationalMatrix":
        if isinstance(self, RationalMatrix):
            return self
        return RationalMatrix(self._rows, ncols=self.ncols)

    def is_integral(self) -> bool:
        return all(as_fraction(x).denominator == 1 for r in self._rows for x in r)

    def to_integer(self) -> "IntegerMatrix":
        if isinstance(self, IntegerMatrix):
            return self
        return IntegerMatrix(self._rows, ncols=self.ncols)

    def denominator(self) -> int:
        return reduce(lcm, (as_fraction(x).denominator for r in self._rows for x in r), 1)

    def content(self) -> Fraction:
        """Positive generator of the Z-module spanned by the entries (0 for the zero matrix)."""
        d = self.denominator()
        g = reduce(gcd, (int(as_fraction(x) * d) for r in self._rows for x in r), 0)
        return Fraction(g, d)

    def __repr__(self):
        body = ", ".join("[" + ", ".join(str(x) for x in r) + "]" for r in self._rows)
        return f"{type(self).__name__}([{body}])"

    def __str__(self):
        return "\n".join(" ".join(str(x) for x in r) for r in self._rows)

    # -- exact Gaussian elimination ----------------------------------
    def det(self):
        if not self.is_square():
            raise ValueError("determinant of a non-square matrix")
        n = self.nrows
        if n == 0:
            return self._coerce(1)
        if isinstance(self, IntegerMatrix):
            return _bareiss_det([list(r) for r in self._rows])
        a = [list(r) for r in self._rows]
        det = Fraction(1)
        for c in range(n):
            p = next((i for i in range(c, n) if a[i][c] != 0), None)
            if p is None:
                return Fraction(0)
            if p != c:
                a[c], a[p] = a[p], a[c]
                det = -det
            piv = a[c][c]
            det *= piv
            for i in range(c + 1, n):
                if a[i][c]:
                    f = a[i][c] / piv
                    a[i] = [x - f * y for x, y in zip(a[i], a[c])]
        return det

    def rank(self) -> int:
        return len(rref(self)[1])

    def inverse(self) -> "RationalMatrix":
        if not self.is_square():
            raise ValueError("inverse of a non-square matrix")
        n = self.nrows
        aug = RationalMatrix([list(r) + [1 if i == j else 0 for j in range(n)]
                              for i, r in enumerate(self._rows)], ncols=2 * n)
        red, pivots = rref(aug)
        if pivots[:n] != list(range(n)) or len(pivots) < n:
            raise ZeroDivisionError("matrix is singular")
        return RationalMatrix([r[n:] for r in red.rows[:n]], ncols=n)


class RationalMatrix(_Matrix):
    __slots__ = ()
    _coerce = staticmethod(as_fraction)


class IntegerMatrix(_Matrix):
    __slots__ = ()
    _coerce = staticmethod(_as_int)


def _result_type(a: _Matrix, b: _Matrix):
    if isinstance(a, IntegerMatrix) and isinstance(b, IntegerMatrix):
        return IntegerMatrix
    return RationalMatrix


def _bareiss_det(a: list[list[int]]) -> int:
    n = len(a)
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            p = next((i for i in range(k + 1, n) if a[i][k] != 0), None)
            if p is None:
                return 0
            a[k], a[p] = a[p], a[k]
            sign = -sign
        akk = a[k][k]
        for i in range(k + 1, n):
            aik = a[i][k]
            row_i, row_k = a[i], a[k]
            for j in range(k + 1, n):
                row_i[j] = (row_i[j] * akk - aik * row_k[j]) // prev
        prev = akk
    return sign * a[n - 1][n - 1]


def rref(m: _Matrix) -> tuple[RationalMatrix, list[int]]:
    """Reduced row echelon form over Q, with the list of pivot columns.

    Zero rows are dropped, so the result has ``len(pivots)`` rows.
    """
    a = [[as_fraction(x) for x in r] for r in m.rows]
    ncols = m.ncols
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        if r == len(a):
            break
        p = next((i for i in range(r, len(a)) if a[i][c] != 0), None)
        if p is None:
            continue
        a[r], a[p] = a[p], a[r]
        piv = a[r][c]
        if piv != 1:
            a[r] = [x / piv for x in a[r]]
        row_r = a[r]
        nz = [j for j in range(c, ncols) if row_r[j]]
        for i in range(len(a)):
            if i != r:
                f = a[i][c]
                if f:
                    row_i = a[i]
                    for j in nz:
                        row_i[j] -= f * row_r[j]
        pivots.append(c)
        r += 1
    return RationalMatrix(a[:r], ncols=ncols), pivots


def nullspace(m: _Matrix) -> RationalMatrix:
    """Rows form a Q-basis of {x : m x = 0}."""
    red, pivots = rref(m)
    n = m.ncols
    free = [j for j in range(n) if j not in set(pivots)]
    basis = []
    for f in free:
        v = [Fraction(0)] * n
        v[f] = Fraction(1)
        for i, p in enumerate(pivots):
            v[p] = -red[i, f]
        basis.append(v)
    return RationalMatrix(basis, ncols=n)


def row_space(m: _Matrix) -> RationalMatrix:
    """A Q-basis (echelon) of the row space of ``m``."""
    return rref(m)[0]
