"""Hermite and Smith normal forms with unimodular transforms.

Pivots are chosen of minimal absolute value, which keeps intermediate
entries small on the matrix sizes used here; correctness does not depend
on that choice.
"""

from __future__ import annotations

from .matrix import IntegerMatrix, _Matrix


def _identity(n: int) -> list[list[int]]:
    return [[1 if i == j else 0 for j in range(n)] for i in range(n)]


def _axpy_row(a: list[list[int]], dst: int, src: int, q: int) -> None:
    # a[dst] -= q * a[src]
    rs = a[src]
    rd = a[dst]
    for j, x in enumerate(rs):
        if x:
            rd[j] -= q * x


def _hnf_inplace(a: list[list[int]], u: list[list[int]] | None, ncols: int) -> int:
    """Row-reduce ``a`` to Hermite normal form, mirroring every row
    operation on ``u``.  Returns the rank."""
    nrows = len(a)
    r = 0
    for c in range(ncols):
        if r == nrows:
            break
        while True:
            nz = [i for i in range(r, nrows) if a[i][c] != 0]
            if not nz:
                break
            p = min(nz, key=lambda i: abs(a[i][c]))
            if p != r:
                a[r], a[p] = a[p], a[r]
                if u is not None:
                    u[r], u[p] = u[p], u[r]
            done = True
            piv = a[r][c]
            for i in range(r + 1, nrows):
                if a[i][c]:
                    q = a[i][c] // piv
                    _axpy_row(a, i, r, q)
                    if u is not None:
                        _axpy_row(u, i, r, q)
                    if a[i][c]:
                        done = False
            if done:
                break
        if all(a[i][c] == 0 for i in range(r, nrows)):
            continue
        if a[r][c] < 0:
            a[r] = [-x for x in a[r]]
            if u is not None:
                u[r] = [-x for x in u[r]]
        piv = a[r][c]
        for i in range(r):
            q = a[i][c] // piv
            if q:
                _axpy_row(a, i, r, q)
                if u is not None:
                    _axpy_row(u, i, r, q)
        r += 1
    return r


def hnf(m: _Matrix) -> tuple[IntegerMatrix, IntegerMatrix]:
    """Row Hermite normal form.

    Returns ``(h, u)`` with ``u`` unimodular and ``u @ m == h``; ``h`` is in
    row echelon form with positive pivots, entries above each pivot reduced
    into ``[0, pivot)``, and zero rows last.
    """
    m = m.to_integer()
    a = [list(r) for r in m.rows]
    u = _identity(m.nrows)
    _hnf_inplace(a, u, m.ncols)
    return IntegerMatrix(a, ncols=m.ncols), IntegerMatrix(u, ncols=m.nrows)


def hnf_basis(m: _Matrix) -> IntegerMatrix:
    """Nonzero rows of the HNF (a canonical basis of the row lattice)."""
    m = m.to_integer()
    a = [list(r) for r in m.rows]
    rank = _hnf_inplace(a, None, m.ncols)
    return IntegerMatrix(a[:rank], ncols=m.ncols)


def snf(m: _Matrix) -> tuple[IntegerMatrix, IntegerMatrix, IntegerMatrix]:
    """Smith normal form ``(u, d, v)`` with ``u @ m @ v == d``.

    ``u`` and ``v`` are unimodular; ``d`` is diagonal with non-negative
    entries forming a divisibility chain (zeros last).
    """
    m = m.to_integer()
    nr, nc = m.shape
    a = [list(r) for r in m.rows]
    u = _identity(nr)
    v = _identity(nc)

    def swap_rows(i, j):
        a[i], a[j] = a[j], a[i]
        u[i], u[j] = u[j], u[i]

    def swap_cols(i, j):
        for row in a:
            row[i], row[j] = row[j], row[i]
        for row in v:
            row[i], row[j] = row[j], row[i]

    def col_axpy(dst, src, q):
        # column dst -= q * column src
        for row in a:
            if row[src]:
                row[dst] -= q * row[src]
        for row in v:
            if row[src]:
                row[dst] -= q * row[src]

    t = 0
    while t < min(nr, nc):
        entries = [(abs(a[i][j]), i, j) for i in range(t, nr) for j in range(t, nc) if a[i][j]]
        if not entries:
            break
        _, pi, pj = min(entries)
        swap_rows(t, pi)
        swap_cols(t, pj)
        while True:
            piv = a[t][t]
            clean = True
            for i in range(t + 1, nr):
                if a[i][t]:
                    q = a[i][t] // piv
                    _axpy_row(a, i, t, q)
                    _axpy_row(u, i, t, q)
                    if a[i][t]:
                        clean = False
            for j in range(t + 1, nc):
                if a[t][j]:
                    q = a[t][j] // piv
                    col_axpy(j, t, q)
                    if a[t][j]:
                        clean = False
            if clean:
                # the pivot must divide the remaining block
                bad = next(((i, j) for i in range(t + 1, nr) for j in range(t + 1, nc)
                            if a[i][j] % piv), None)
                if bad is None:
                    break
                _axpy_row(a, t, bad[0], -1)
                _axpy_row(u, t, bad[0], -1)
                continue
            # move the new smallest entry of row/column t into the pivot slot
            cand = [(abs(a[i][t]), i, t) for i in range(t, nr) if a[i][t]]
            cand += [(abs(a[t][j]), t, j) for j in range(t, nc) if a[t][j]]
            _, pi, pj = min(cand)
            swap_rows(t, pi)
            swap_cols(t, pj)
        if a[t][t] < 0:
            a[t] = [-x for x in a[t]]
            u[t] = [-x for x in u[t]]
        t += 1
    return (IntegerMatrix(u, ncols=nr), IntegerMatrix(a, ncols=nc), IntegerMatrix(v, ncols=nc))


def invariant_factors(m: _Matrix) -> list[int]:
    """Nonzero diagonal of the Smith form (including 1s)."""
    _, d, _ = snf(m)
    return [d[i, i] for i in range(min(d.shape)) if d[i, i] != 0]
