"""Explicit lattice data for tori with End = Z or End ⊗ Q = Q(i), and a
floating point search for complex structures compatible with it.

The exact side (S, J0, E and their identities) feeds the Brauer group
computations.  The numeric side only produces evidence: a J found to within
round-off is not a certificate, and a J whose commutant looks small on a
bounded box of integer matrices is not proven generic.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm, qr

from .errors import PreconditionViolation, SearchFailed
from .exactlin import (
    IntegerMatrix,
    RationalMatrix,
    ZLattice,
    exact_signature,
    integer_points,
)
from .exactlin.matrix import _Matrix
from .torus import FormLattice, invariant_brauer

J2 = IntegerMatrix([[0, -1], [1, 0]])
M2 = IntegerMatrix([[2, 1], [1, 2]])
H2 = IntegerMatrix([[0, 1], [1, 0]])


@dataclass(frozen=True, eq=False)
class ConstructionData:
    S: IntegerMatrix
    J0: IntegerMatrix | None = None
    E: IntegerMatrix | None = None
    # J0 = J1 + J2 on Λ1 + Λ2 with rank Λ1 = split; used for the warm start
    split: int | None = None

    def __post_init__(self):
        if not self.S.is_symmetric():
            raise PreconditionViolation("S must be symmetric")
        n = self.S.nrows
        if self.J0 is not None:
            j = self.J0
            if j @ j != -IntegerMatrix.identity(n):
                raise PreconditionViolation("J0^2 != -1")
            if j.T @ self.S @ j != self.S:
                raise PreconditionViolation("J0 does not preserve S")
        if self.E is not None:
            if not self.E.is_alternating():
                raise PreconditionViolation("E is not alternating")
            if self.J0 is not None and self.E != self.S @ self.J0:
                raise PreconditionViolation("E != S J0")

    @property
    def n(self) -> int:
        return self.S.nrows

    @property
    def g(self) -> int:
        return self.S.nrows // 2

    def form_lattice(self) -> FormLattice:
        forms = [self.S] + ([self.E] if self.E is not None else [])
        return FormLattice(self.n, forms)

    def to_json(self) -> dict:
        out = {"g": self.g, "S": self.S.tolist()}
        if self.J0 is not None:
            out["J0"] = self.J0.tolist()
        if self.E is not None:
            out["E"] = self.E.tolist()
        return out


def _blocks(*ms) -> IntegerMatrix:
    return IntegerMatrix.block_diag(*ms)


def _two_by_two(a, b, c, d) -> IntegerMatrix:
    """[[a, b], [c, d]] for square blocks of one size."""
    top = [list(a.row(i)) + list(b.row(i)) for i in range(a.nrows)]
    bot = [list(c.row(i)) + list(d.row(i)) for i in range(c.nrows)]
    return IntegerMatrix(top + bot)


def build_even_form(g: int) -> ConstructionData:
    """Single even form for End = Z: S = 2 I_{2g-4} + H + H (H the hyperbolic
    plane), signature (2g-2, 2)."""
    if g < 3:
        raise PreconditionViolation("g must be at least 3")
    s = _blocks(IntegerMatrix.identity(2 * g - 4) * 2, H2, H2)
    return ConstructionData(s)


def even_form_checks(data: ConstructionData) -> dict:
    s = data.S
    pos, neg, zero = exact_signature(s)
    return {
        "even": all(s[i, i] % 2 == 0 for i in range(data.n)),
        "primitive": s.content() == 1,
        "nondegenerate": s.det() != 0,
        "signature": [pos, neg, zero],
        "signature_mod4_ok": (pos - neg - 2 * data.g) % 4 == 0,
    }


def build_gaussian_pair(g: int) -> ConstructionData:
    """Symmetric/alternating pair for End = Z[i]:
    S = (-2 I_2) + M + M + 2 I_{2g-6}, J0 = J + [[0,-I2],[I2,0]] + J^{g-3}, E = S J0."""
    if g < 3:
        raise PreconditionViolation("g must be at least 3")
    i2 = IntegerMatrix.identity(2)
    z2 = IntegerMatrix.zeros(2)
    rot = _two_by_two(z2, -i2, i2, z2)
    tail = [IntegerMatrix.identity(2 * g - 6) * 2] if g > 3 else []
    s = _blocks(i2 * -2, M2, M2, *tail)
    j0 = _blocks(J2, rot, *([J2] * (g - 3)))
    e = s @ j0
    return ConstructionData(s, j0, e, split=2)


def gaussian_pair_expected_E(g: int) -> IntegerMatrix:
    """(-2J) + [[0,-M],[M,0]] + (2J)^{g-3}, assembled independently of S J0."""
    z = IntegerMatrix.zeros(2)
    mid = _two_by_two(z, -M2, M2, z)
    return _blocks(J2 * -2, mid, *([J2 * 2] * (g - 3)))


def gaussian_pair_checks(data: ConstructionData) -> dict:
    s, j0, e = data.S, data.J0, data.E
    n = data.n
    ident = IntegerMatrix.identity(n)
    span = RationalMatrix([s.flat(), e.flat()])
    sat = integer_points(span, n * n)
    return {
        "J0_squared_is_minus_one": j0 @ j0 == -ident,
        "J0_preserves_S": j0.T @ s @ j0 == s,
        "E_alternating": e.is_alternating(),
        "E_equals_S_J0": e == s @ j0,
        "E_matches_block_formula": e == gaussian_pair_expected_E(data.g),
        "S_even": all(s[i, i] % 2 == 0 for i in range(n)),
        "S_primitive": s.content() == 1,
        "integer_points_of_QS_QE_is_ZS_ZE": sat == ZLattice(span, n * n),
    }


def construction_brauer(data: ConstructionData):
    return invariant_brauer(data.form_lattice())


# -- numeric search -------------------------------------------------------------

@dataclass
class JSearchResult:
    J: np.ndarray
    residuals: dict
    positivity_margin: float | None
    iterations: int
    seed: int
    start: str
    notes: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "J": self.J.tolist(),
            "residuals": self.residuals,
            "positivity_margin": self.positivity_margin,
            "iterations": self.iterations,
            "seed": self.seed,
            "start": self.start,
            "certified": False,
            "notes": self.notes,
        }


def _as_float(m: _Matrix) -> np.ndarray:
    return np.array([[float(x) for x in r] for r in m.rows], dtype=float)


def _warm_start(data: ConstructionData) -> tuple[np.ndarray, str]:
    n = data.n
    if n % 2:
        raise SearchFailed("odd rank: no complex structure exists")
    if data.J0 is not None and data.split is not None:
        # (-J1) + J2: preserves S, commutes with J0, and S(J x, J0 y) = S1 + S2
        k = data.split
        j = _as_float(data.J0).copy()
        j[:k, :k] *= -1
        return j, "J0_sharp"
    s = _as_float(data.S)
    pos, neg, zero = exact_signature(data.S)
    if zero:
        raise SearchFailed("S is degenerate")
    if pos % 2 or neg % 2:
        raise SearchFailed(f"signature ({pos}, {neg}) has odd parts: no S-orthogonal J with J^2 = -1")
    w, v = np.linalg.eigh(s)
    order = np.argsort(-w)  # positive eigenvalues first
    w, v = w[order], v[:, order]
    # P^T S P = diag(1_pos, -1_neg)
    p = v / np.sqrt(np.abs(w))
    k = np.kron(np.eye(n // 2), np.array([[0.0, -1.0], [1.0, 0.0]]))
    return p @ k @ np.linalg.inv(p), "signature_basis"


def _residuals(j: np.ndarray, data: ConstructionData) -> tuple[dict, float | None]:
    n = data.n
    s = _as_float(data.S)
    res = {
        "J_squared_plus_one": float(np.linalg.norm(j @ j + np.eye(n))),
        "J_preserves_S": float(np.linalg.norm(j.T @ s @ j - s)),
    }
    margin = None
    if data.J0 is not None:
        j0 = _as_float(data.J0)
        res["J_commutes_with_J0"] = float(np.linalg.norm(j @ j0 - j0 @ j))
        h = j.T @ s @ j0  # Gram of S(Jx, J0 y)
        res["positivity_form_symmetric"] = float(np.linalg.norm(h - h.T))
        margin = float(np.linalg.eigvalsh((h + h.T) / 2).min())
    return res, margin


def _random_direction(rng: np.random.Generator, data: ConstructionData) -> np.ndarray:
    n = data.n
    a = rng.standard_normal((n, n))
    a = a - a.T
    x = np.linalg.solve(_as_float(data.S), a)  # S X antisymmetric: X in o(S)
    if data.J0 is not None:
        j0 = _as_float(data.J0)
        x = (x - j0 @ x @ j0) / 2  # commute with J0
    return x / max(np.linalg.norm(x), 1e-300)


def numeric_j_search(data: ConstructionData, seed: int, tolerance: float = 1e-8,
                     max_iters: int = 1000, positivity_tolerance: float = 1e-6,
                     generic: bool = True, step: float = 0.5) -> JSearchResult:
    """Look for J with J^2 = -1 and J^T S J = S (and, with J0, J J0 = J0 J and
    S(Jx, J0 y) positive definite).

    The exact warm start is returned as-is when ``generic`` is False.
    Otherwise it is conjugated by exp(X) for seeded random X in the Lie
    algebra of the symmetry group, halving the step whenever a candidate
    misses the tolerances.  Raises SearchFailed if nothing within tolerance
    turns up in ``max_iters`` attempts.
    """
    j_start, label = _warm_start(data)
    rng = np.random.default_rng(seed)

    def accept(res, margin):
        ok = all(v <= tolerance for v in res.values())
        return ok and (margin is None or margin > positivity_tolerance)

    if not generic:
        res, margin = _residuals(j_start, data)
        if not accept(res, margin):
            raise SearchFailed(f"warm start misses tolerance: {res}")
        return JSearchResult(j_start, res, margin, 0, seed, label)
    best = None
    t = step
    for it in range(1, max_iters + 1):
        x = _random_direction(rng, data) * t
        g = expm(x)
        cand = g @ j_start @ np.linalg.inv(g)
        res, margin = _residuals(cand, data)
        if accept(res, margin):
            return JSearchResult(cand, res, margin, it, seed, label,
                                 ["conjugate of the warm start by a random symmetry"])
        score = max(res.values())
        if best is None or score < best[0]:
            best = (score, res, margin)
        t /= 2
    raise SearchFailed(f"no candidate within tolerance after {max_iters} attempts; best {best}")


# -- endomorphism screen ------------------------------------------------------------

@dataclass
class ScreenReport:
    commutant_dim: int
    scalars_commute: bool
    hits: list
    hit_count: int
    exhaustive: bool
    searched: int

    def to_json(self) -> dict:
        return {"real_commutant_dim": self.commutant_dim, "scalars_commute": self.scalars_commute,
                "non_scalar_hits": [h.tolist() for h in self.hits], "hit_count": self.hit_count,
                "exhaustive": self.exhaustive, "searched": self.searched,
                "certified": False}


def screen_small_endomorphisms(j_approx, coeff_bound: int = 1, tolerance: float = 1e-8,
                               enumeration_limit: int = 200_000, samples: int = 5_000,
                               seed: int = 0, max_hits: int = 50) -> ScreenReport:
    """Non-scalar integer matrices u with entries in [-b, b] and ‖uJ - Ju‖ small.

    Such u lie (numerically) in the real null space of u -> uJ - Ju, which
    has dimension k = n^2/2 for any complex structure.  A point of that
    space is fixed by k pivot coordinates, so enumerating the pivots over
    [-b, b]^k covers the whole box.  When that is too large the pivots are
    sampled instead (``exhaustive`` is False), after first probing the
    rounded J itself.  An empty report is evidence, never proof.
    """
    j = _as_float(j_approx) if isinstance(j_approx, _Matrix) else np.array(j_approx, dtype=float)
    n = j.shape[0]
    ident = np.eye(n)
    b = coeff_bound
    # vec(uJ - Ju) = (I kron J^T - J kron I) vec(u) with row-major vec
    op = np.kron(ident, j.T) - np.kron(j, ident)
    _, sv, vt = np.linalg.svd(op)
    scale = max(1.0, float(np.abs(j).max()))
    null = vt[sv <= tolerance * scale * n].T
    k = null.shape[1]
    scalars = bool(np.linalg.norm(op @ ident.ravel()) < tolerance)
    hits, seen = [], set()
    count = 0

    def consider(u: np.ndarray) -> None:
        nonlocal count
        ur = np.rint(u)
        if np.abs(u - ur).max() > 1e-6 or np.abs(ur).max() > b or not ur.any():
            return
        if np.linalg.norm(op @ ur) >= tolerance * max(1.0, np.abs(ur).max()) * n:
            return
        um = ur.reshape(n, n)
        if np.array_equal(um, um[0, 0] * ident):
            return
        key = tuple(int(x) for x in ur)
        if key in seen:
            return
        seen.add(key)
        count += 1
        if len(hits) < max_hits:
            hits.append(IntegerMatrix.from_flat(list(key), n, n))

    if k == 0:
        return ScreenReport(0, scalars, hits, 0, True, 0)
    _, _, piv = qr(null.T, pivoting=True)
    piv = np.sort(piv[:k])
    sub = null[piv, :]
    exhaustive = (2 * b + 1) ** k <= enumeration_limit
    if exhaustive:
        points = itertools.product(range(-b, b + 1), repeat=k)
    else:
        consider(j.ravel())
        rng = np.random.default_rng(seed)
        points = (rng.integers(-b, b + 1, size=k) for _ in range(samples))
    searched = 0
    for p in points:
        searched += 1
        consider(null @ np.linalg.solve(sub, np.asarray(p, dtype=float)))
    return ScreenReport(k, scalars, hits, count, exhaustive, searched)
