"""Simplex points, bounded convex functions, and Savage-form scoring.

Every scoring rule here is represented by its convex function H on the
probability simplex, scaled so that 0 <= H <= 1.  The score paid when
state ``omega`` occurs against a report ``x`` is

    H(x) + g(x) . (e_omega - x)

with ``g(x)`` a subgradient of H at x.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

SUM_TOL = 1e-12
LOG_BOUNDARY_GUARD = 1e-12


class DimensionMismatchError(ValueError):
    """Point and rule dimensions disagree."""


class SingularityError(ValueError):
    """Subgradient requested where the rule is not differentiable enough."""


def _to_fraction(v) -> Fraction:
    if isinstance(v, Fraction):
        return v
    if isinstance(v, int):
        return Fraction(v)
    raise TypeError(f"exact coordinates must be Fraction or int, got {type(v)!r}")


class SimplexPoint:
    """A probability vector in the d-simplex, optionally with exact rational coords.

    Immutable.  The exact coordinates, when present, are the dedup key used by
    collection constructors and the LP builder.
    """

    __slots__ = ("coords", "exact")

    def __init__(self, coords, exact: Sequence[Fraction] | None = None):
        arr = np.asarray(coords, dtype=float)
        if arr.ndim != 1 or arr.size < 2:
            raise ValueError("a simplex point needs at least 2 coordinates")
        if np.any(arr < -SUM_TOL):
            raise ValueError(f"negative coordinate in simplex point: {arr}")
        if abs(float(arr.sum()) - 1.0) > SUM_TOL:
            raise ValueError(f"coordinates must sum to 1, got {arr.sum()!r}")
        arr = np.where(arr < 0.0, 0.0, arr)
        arr.setflags(write=False)
        object.__setattr__(self, "coords", arr)
        if exact is not None:
            exact = tuple(_to_fraction(v) for v in exact)
            if len(exact) != arr.size:
                raise DimensionMismatchError("exact coords length mismatch")
            if sum(exact) != 1:
                raise ValueError("exact coordinates must sum to exactly 1")
            if any(v < 0 for v in exact):
                raise ValueError("exact coordinates must be nonnegative")
        object.__setattr__(self, "exact", exact)

    def __setattr__(self, name, value):
        raise AttributeError("SimplexPoint is immutable")

    @property
    def d(self) -> int:
        return self.coords.size

    @classmethod
    def from_exact(cls, fracs: Sequence) -> "SimplexPoint":
        fracs = tuple(_to_fraction(v) for v in fracs)
        return cls([float(v) for v in fracs], exact=fracs)

    @classmethod
    def from_scalar(cls, x) -> "SimplexPoint":
        """Binary convention: scalar x in [0,1] means the point (x, 1-x)."""
        if isinstance(x, (Fraction, int)):
            f = _to_fraction(x)
            return cls.from_exact((f, 1 - f))
        return cls([float(x), 1.0 - float(x)])

    def scalar(self) -> float:
        """First coordinate, the binary parametrization (d=2 only)."""
        if self.d != 2:
            raise DimensionMismatchError("scalar form is only defined for d=2")
        return float(self.coords[0])

    def key(self):
        """Exact dedup key: rational coords when available, else raw floats."""
        if self.exact is not None:
            return self.exact
        return tuple(float(v) for v in self.coords)

    def interior(self, guard: float = 0.0) -> bool:
        return bool(np.all(self.coords > guard))

    def __eq__(self, other):
        return isinstance(other, SimplexPoint) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        if self.exact is not None:
            return f"SimplexPoint({'/'.join(str(v) for v in self.exact)!s})"
        return f"SimplexPoint({np.array2string(self.coords, precision=6)})"


def as_point(x, d: int) -> SimplexPoint:
    """Coerce a SimplexPoint, a coordinate sequence, or (d=2) a scalar."""
    if isinstance(x, SimplexPoint):
        if x.d != d:
            raise DimensionMismatchError(f"point has d={x.d}, rule has d={d}")
        return x
    if isinstance(x, (int, float, Fraction)) and d == 2:
        return SimplexPoint.from_scalar(x)
    return SimplexPoint(x)


def as_coords(x, d: int) -> np.ndarray:
    return as_point(x, d).coords


def simplex_vertices(d: int) -> list[SimplexPoint]:
    out = []
    for k in range(d):
        fr = tuple(Fraction(1 if j == k else 0) for j in range(d))
        out.append(SimplexPoint.from_exact(fr))
    return out


def simplex_center(d: int) -> SimplexPoint:
    return SimplexPoint.from_exact(tuple(Fraction(1, d) for _ in range(d)))


def simplex_grid(d: int, resolution: int, interior_only: bool = False) -> np.ndarray:
    """Barycentric lattice k/resolution on the simplex, as an (M, d) array."""
    if resolution < 1:
        raise ValueError("resolution must be >= 1")
    lo = 1 if interior_only else 0
    combos = _compositions(resolution, d, lo)
    return combos.astype(float) / float(resolution)


def _compositions(total: int, parts: int, lo: int) -> np.ndarray:
    """All integer vectors of length `parts` summing to `total`, entries >= lo."""
    if parts == 1:
        if total < lo:
            return np.empty((0, 1), dtype=np.int64)
        return np.array([[total]], dtype=np.int64)
    rows = []
    for first in range(lo, total - lo * (parts - 1) + 1):
        rest = _compositions(total - first, parts - 1, lo)
        if rest.size == 0:
            continue
        col = np.full((rest.shape[0], 1), first, dtype=np.int64)
        rows.append(np.hstack([col, rest]))
    if not rows:
        return np.empty((0, parts), dtype=np.int64)
    return np.vstack(rows)


def random_simplex_points(d: int, n: int, rng: np.random.Generator) -> np.ndarray:
    """n points ~ uniform on the simplex (exponential-spacing construction)."""
    g = rng.exponential(1.0, size=(n, d))
    return g / g.sum(axis=1, keepdims=True)


class ConvexRule:
    """Base for bounded convex functions on the simplex."""

    kind = "abstract"

    def __init__(self, d: int):
        if d < 2:
            raise ValueError("dimension d must be >= 2")
        self.d = int(d)

    def value(self, x) -> float:
        return float(self.values(as_coords(x, self.d)[None, :])[0])

    def values(self, pts: np.ndarray) -> np.ndarray:
        """Vectorized evaluation on an (M, d) array; preserves the input dtype."""
        raise NotImplementedError

    def subgradient(self, x) -> np.ndarray:
        raise NotImplementedError

    def hessian(self, x) -> np.ndarray:
        raise NotImplementedError(f"{self.kind} rule has no analytic Hessian")

    # Second derivative of the binary section t -> H((t, 1-t)); used by the
    # one-dimensional curvature operator.
    def section_second_derivative(self, x: float) -> float:
        if self.d != 2:
            raise DimensionMismatchError("binary section needs d=2")
        h = self.hessian((x, 1.0 - x))
        v = np.array([1.0, -1.0])
        return float(v @ h @ v)

    def __repr__(self):
        return f"{type(self).__name__}(d={self.d})"


def _xlogx(a: np.ndarray) -> np.ndarray:
    safe = np.where(a > 0, a, 1.0)
    return a * np.log(safe)


class QuadraticRule(ConvexRule):
    """H(x) = d/(d-1) * sum_k (x_k - 1/d)^2; zero at the center, one at vertices."""

    kind = "quadratic"

    def __init__(self, d: int):
        super().__init__(d)
        self._scale = d / (d - 1.0)

    def values(self, pts):
        pts = np.asarray(pts)
        dev = pts - 1.0 / self.d
        return self._scale * (dev * dev).sum(axis=-1)

    def subgradient(self, x):
        c = as_coords(x, self.d)
        return 2.0 * self._scale * (c - 1.0 / self.d)

    def hessian(self, x):
        return 2.0 * self._scale * np.eye(self.d)


class SphericalRule(ConvexRule):
    """H(x) = (sqrt(d) ||x|| - 1) / (sqrt(d) - 1)."""

    kind = "spherical"

    def __init__(self, d: int):
        super().__init__(d)
        rd = math.sqrt(d)
        self._a = rd / (rd - 1.0)
        self._b = 1.0 / (rd - 1.0)

    def values(self, pts):
        pts = np.asarray(pts)
        return self._a * np.sqrt((pts * pts).sum(axis=-1)) - self._b

    def subgradient(self, x):
        c = as_coords(x, self.d)
        return self._a * c / np.linalg.norm(c)

    def hessian(self, x):
        c = as_coords(x, self.d)
        n = np.linalg.norm(c)
        u = c / n
        return self._a * (np.eye(self.d) - np.outer(u, u)) / n


class LogRule(ConvexRule):
    """H(x) = (1/ln d) sum_k x_k ln x_k + 1, with the 0*ln(0)=0 convention.

    Evaluation is defined on the whole simplex; the subgradient exists only
    where every coordinate exceeds the boundary guard.
    """

    kind = "log"

    def __init__(self, d: int, boundary_guard: float = LOG_BOUNDARY_GUARD):
        super().__init__(d)
        self._inv_logd = 1.0 / math.log(d)
        self.boundary_guard = boundary_guard

    def values(self, pts):
        pts = np.asarray(pts)
        return self._inv_logd * _xlogx(pts).sum(axis=-1) + 1.0

    def subgradient(self, x):
        c = as_coords(x, self.d)
        if np.any(c < self.boundary_guard):
            raise SingularityError(
                f"log rule subgradient needs all coordinates >= {self.boundary_guard}"
            )
        return self._inv_logd * (np.log(c) + 1.0)

    def hessian(self, x):
        c = as_coords(x, self.d)
        if np.any(c < self.boundary_guard):
            raise SingularityError("log rule Hessian undefined at the boundary")
        return self._inv_logd * np.diag(1.0 / c)


class PiecewiseLinearConvex(ConvexRule):
    """Max-of-affine representation H(x) = max(max_i b_i + g_i . x, floor).

    At evaluation ties the subgradient comes from the lowest-index active
    piece; the floor plays the role of a final zero-gradient piece.
    """

    kind = "piecewise_linear"

    def __init__(self, d: int, pieces: Iterable[tuple], floor: float = 0.0,
                 bounded: bool = True):
        super().__init__(d)
        gs, bs = [], []
        for g, b in pieces:
            g = np.asarray(g, dtype=float)
            if g.shape != (d,):
                raise DimensionMismatchError("piece gradient has wrong length")
            gs.append(g)
            bs.append(float(b))
        if not gs:
            raise ValueError("need at least one affine piece")
        self.gradients = np.vstack(gs)
        self.gradients.setflags(write=False)
        self.intercepts = np.asarray(bs, dtype=float)
        self.intercepts.setflags(write=False)
        self.floor = float(floor)
        self.bounded = bool(bounded)

    @property
    def pieces(self) -> list[tuple[np.ndarray, float]]:
        return [(self.gradients[i], float(self.intercepts[i]))
                for i in range(len(self.intercepts))]

    def values(self, pts):
        pts = np.asarray(pts)
        vals = pts @ self.gradients.T + self.intercepts
        return np.maximum(vals.max(axis=-1), self.floor)

    def active_piece(self, x) -> int:
        """Index of the selected piece; len(pieces) denotes the floor."""
        c = as_coords(x, self.d)
        vals = self.gradients @ c + self.intercepts
        i = int(np.argmax(vals))
        if vals[i] < self.floor:
            return len(self.intercepts)
        return i

    def subgradient(self, x):
        i = self.active_piece(x)
        if i == len(self.intercepts):
            return np.zeros(self.d)
        return self.gradients[i].copy()

    def hessian(self, x):
        # Affine pieces: curvature vanishes wherever H is twice differentiable.
        return np.zeros((self.d, self.d))

    def __repr__(self):
        return (f"PiecewiseLinearConvex(d={self.d}, pieces={len(self.intercepts)}, "
                f"floor={self.floor})")


class PyramidRule(PiecewiseLinearConvex):
    """Upside-down pyramid: zero at a designated interior mean, one at vertices.

    Affine on each region conv(mean, vertices except e_k); the k-th piece is
    1 - x_k / mean_k.  For d=2 this is the v-shape.
    """

    kind = "pyramid"

    def __init__(self, mean: SimplexPoint):
        if not mean.interior():
            raise ValueError("pyramid mean must be strictly interior")
        d = mean.d
        pieces = []
        for k in range(d):
            g = np.zeros(d)
            g[k] = -1.0 / float(mean.coords[k])
            pieces.append((g, 1.0))
        super().__init__(d, pieces, floor=0.0, bounded=True)
        self.mean = mean

    def __repr__(self):
        return f"PyramidRule(mean={self.mean!r})"


def pyramid(mean) -> PyramidRule:
    """Pyramid rule anchored at `mean`; accepts a scalar for d=2."""
    if isinstance(mean, (int, float, Fraction)):
        mean = SimplexPoint.from_scalar(mean)
    return PyramidRule(mean)


def v_shape(mean) -> PyramidRule:
    """Binary pyramid, the v-shape with minimum at scalar `mean`."""
    p = pyramid(mean)
    if p.d != 2:
        raise DimensionMismatchError("v-shape is the d=2 pyramid")
    return p


class SymmetrizedBinaryRule(ConvexRule):
    """Average of a binary rule and its coordinate flip, 0.5 (H(x) + H(1-x)).

    When the underlying collection is symmetric the average of an optimal
    rule with its mirror is optimal again, which makes the output canonical.
    """

    kind = "symmetrized"

    def __init__(self, base: ConvexRule):
        if base.d != 2:
            raise DimensionMismatchError("symmetrization is a binary combinator")
        super().__init__(2)
        self.base = base

    def values(self, pts):
        pts = np.asarray(pts)
        return 0.5 * (self.base.values(pts) + self.base.values(pts[..., ::-1]))

    def subgradient(self, x):
        c = as_coords(x, 2)
        g = self.base.subgradient(c)
        gm = self.base.subgradient(c[::-1])
        return 0.5 * (g + gm[::-1])


BUILTIN_KINDS = {"quadratic": QuadraticRule, "spherical": SphericalRule,
                 "log": LogRule}


def builtin_rule(kind: str, d: int) -> ConvexRule:
    try:
        return BUILTIN_KINDS[kind](d)
    except KeyError:
        raise ValueError(f"unknown rule kind {kind!r}; "
                         f"expected one of {sorted(BUILTIN_KINDS)}") from None


def savage_score(rule: ConvexRule, outcome: int, x) -> float:
    """Score H(x) + g(x).(e_outcome - x) for a 1-based state index."""
    if not 1 <= outcome <= rule.d:
        raise ValueError(f"outcome must be in 1..{rule.d}")
    c = as_coords(x, rule.d)
    direction = -c.copy()
    direction[outcome - 1] += 1.0
    if not direction.any():
        # report sits exactly on the realized vertex: the gradient term is 0
        # regardless of the subgradient choice
        return rule.value(c)
    g = rule.subgradient(c)
    return rule.value(c) + float(g @ direction)


def expected_score(rule: ConvexRule, belief, report) -> float:
    """Expected score of `report` when states are drawn from `belief`."""
    b = as_coords(belief, rule.d)
    return math.fsum(
        float(b[w]) * savage_score(rule, w + 1, report) for w in range(rule.d)
    )


class ScoringRule:
    """Savage-form payout wrapper around a convex rule.

    The subgradient selection (and therefore the score at kinks) is the
    rule's deterministic lowest-index tie-break.
    """

    def __init__(self, rule: ConvexRule):
        self.rule = rule
        self.tie_break = "lowest-index-piece"

    @property
    def d(self) -> int:
        return self.rule.d

    def score(self, outcome: int, x) -> float:
        return savage_score(self.rule, outcome, x)

    def expected_score(self, belief, report) -> float:
        return expected_score(self.rule, belief, report)


def validate_bounded(rule: ConvexRule, n_points: int = 1000, seed: int = 0,
                     tol: float = 1e-9) -> bool:
    """Check 0 <= H <= 1 on a random simplex grid plus vertices and center."""
    rng = np.random.default_rng(seed)
    pts = random_simplex_points(rule.d, n_points, rng)
    pts = np.vstack([pts, np.eye(rule.d), np.full((1, rule.d), 1.0 / rule.d)])
    vals = rule.values(pts)
    return bool(vals.min() >= -tol and vals.max() <= 1.0 + tol)
