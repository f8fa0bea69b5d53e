"""Finite-support information structures over the probability simplex.

An information structure is a finitely-supported random posterior X on the
simplex; its mean is the prior.  Support points of the conjugate families
(Beta-Bernoulli, Dirichlet-categorical) are exact rationals so that
coincident points merge exactly before any LP is built.
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

from .geometry import DimensionMismatchError, SimplexPoint

PROB_TOL = 1e-12


class InfoStructure:
    """Finite-support distribution over simplex points, with cached mean."""

    __slots__ = ("atoms", "label", "mean")

    def __init__(self, atoms, label: str = ""):
        atoms = _merge_atoms(atoms)
        if not atoms:
            raise ValueError("information structure needs at least one atom")
        d = atoms[0][0].d
        for pt, _ in atoms:
            if pt.d != d:
                raise DimensionMismatchError("atoms have mixed dimensions")
        total = math.fsum(float(p) for _, p in atoms)
        if abs(total - 1.0) > PROB_TOL:
            raise ValueError(f"atom probabilities sum to {total!r}, expected 1")
        object.__setattr__(self, "atoms", tuple(atoms))
        object.__setattr__(self, "label", label)
        object.__setattr__(self, "mean", _exact_mean(self.atoms))

    def __setattr__(self, name, value):
        raise AttributeError("InfoStructure is immutable")

    @property
    def d(self) -> int:
        return self.atoms[0][0].d

    @property
    def points(self) -> list[SimplexPoint]:
        return [pt for pt, _ in self.atoms]

    @property
    def probs(self) -> np.ndarray:
        return np.array([float(p) for _, p in self.atoms])

    def support_array(self) -> np.ndarray:
        return np.vstack([pt.coords for pt, _ in self.atoms])

    def is_constant(self) -> bool:
        """True when X equals its mean with probability one."""
        return len(self.atoms) == 1

    def covariance(self) -> np.ndarray:
        mu = self.mean.coords
        dev = self.support_array() - mu
        return (dev * self.probs[:, None]).T @ dev

    def cov_norm(self) -> float:
        """Spectral norm of the covariance (largest eigenvalue; PSD matrix)."""
        ev = np.linalg.eigvalsh(self.covariance())
        return float(max(ev[-1], 0.0))

    def key(self):
        return tuple(sorted((pt.key(), _prob_key(p)) for pt, p in self.atoms))

    def __eq__(self, other):
        return isinstance(other, InfoStructure) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        name = self.label or f"{len(self.atoms)}-atom"
        return f"InfoStructure({name}, d={self.d})"


def _prob_key(p):
    return p if isinstance(p, Fraction) else float(p)


def _merge_atoms(atoms):
    """Merge coincident points (exact key), drop zero-probability atoms."""
    merged: dict = {}
    order: list = []
    for pt, p in atoms:
        if isinstance(p, float) and p < 0 and p > -PROB_TOL:
            p = 0.0
        if (isinstance(p, Fraction) and p < 0) or (not isinstance(p, Fraction) and p < 0):
            raise ValueError(f"negative atom probability {p!r}")
        k = pt.key()
        if k in merged:
            old_pt, old_p = merged[k]
            if isinstance(old_p, Fraction) and isinstance(p, Fraction):
                merged[k] = (old_pt, old_p + p)
            else:
                merged[k] = (old_pt, float(old_p) + float(p))
        else:
            merged[k] = (pt, p)
            order.append(k)
    out = []
    for k in order:
        pt, p = merged[k]
        if (isinstance(p, Fraction) and p == 0) or (not isinstance(p, Fraction) and float(p) <= 0.0):
            continue
        out.append((pt, p))
    return out


def _exact_mean(atoms) -> SimplexPoint:
    exact_ok = all(pt.exact is not None and isinstance(p, Fraction)
                   for pt, p in atoms)
    if exact_ok:
        d = atoms[0][0].d
        acc = [Fraction(0)] * d
        for pt, p in atoms:
            for j in range(d):
                acc[j] += p * pt.exact[j]
        return SimplexPoint.from_exact(acc)
    d = atoms[0][0].d
    acc = np.zeros(d)
    for pt, p in atoms:
        acc += float(p) * pt.coords
    acc = np.maximum(acc, 0.0)
    return SimplexPoint(acc / acc.sum())


def mean(struct: InfoStructure) -> SimplexPoint:
    return struct.mean


class Collection:
    """Nonempty list of information structures with a common dimension."""

    __slots__ = ("structures", "label")

    def __init__(self, structures, label: str = ""):
        structures = tuple(structures)
        if not structures:
            raise ValueError("collection must be nonempty")
        d = structures[0].d
        for s in structures:
            if s.d != d:
                raise DimensionMismatchError("collection has mixed dimensions")
        object.__setattr__(self, "structures", structures)
        object.__setattr__(self, "label", label)

    def __setattr__(self, name, value):
        raise AttributeError("Collection is immutable")

    @property
    def d(self) -> int:
        return self.structures[0].d

    def __len__(self):
        return len(self.structures)

    def __iter__(self):
        return iter(self.structures)

    def support_points(self) -> list[SimplexPoint]:
        """Distinct support points (means first, then atoms), first-seen order."""
        seen: dict = {}
        for s in self.structures:
            for pt in [s.mean] + s.points:
                k = pt.key()
                if k not in seen:
                    seen[k] = pt
        return list(seen.values())

    def has_constant_structure(self) -> bool:
        return any(s.is_constant() for s in self.structures)

    def __repr__(self):
        return f"Collection({self.label or len(self.structures)}, d={self.d})"


def beta_bernoulli(theta, n: int) -> InfoStructure:
    """Posterior-predictive movement of a binary belief after one more sample.

    Two atoms ((n+2)theta+1)/(n+3) w.p. theta and (n+2)theta/(n+3) w.p.
    1-theta, in the binary scalar convention; mean is exactly theta.
    """
    if n < 0:
        raise ValueError("effective extra sample count n must be >= 0")
    exact = isinstance(theta, (Fraction, int))
    th = Fraction(theta) if exact else float(theta)
    if not 0 <= th <= 1:
        raise ValueError(f"theta must lie in [0,1], got {theta!r}")
    up = ((n + 2) * th + 1) / (n + 3)
    down = ((n + 2) * th) / (n + 3)
    if exact:
        pts = [SimplexPoint.from_scalar(up), SimplexPoint.from_scalar(down)]
        probs = [th, 1 - th]
    else:
        pts = [SimplexPoint.from_scalar(float(up)), SimplexPoint.from_scalar(float(down))]
        probs = [float(th), 1.0 - float(th)]
    return InfoStructure(list(zip(pts, probs)), label=f"beta(theta={th},n={n})")


def dirichlet_categorical(theta: SimplexPoint, n: int) -> InfoStructure:
    """d-outcome analogue: atom ((n+d)theta + e_k)/(n+d+1) w.p. theta_k."""
    if n < 0:
        raise ValueError("n must be >= 0")
    d = theta.d
    m = n + d
    atoms = []
    if theta.exact is not None:
        for k in range(d):
            coords = [ (m * theta.exact[j] + (1 if j == k else 0)) / (m + 1)
                       for j in range(d) ]
            atoms.append((SimplexPoint.from_exact(coords), theta.exact[k]))
    else:
        for k in range(d):
            coords = (m * theta.coords + np.eye(d)[k]) / (m + 1)
            atoms.append((SimplexPoint(coords), float(theta.coords[k])))
    label = f"dir(theta={theta!r},n={n})"
    return InfoStructure(atoms, label=label)


def beta_collection_static(N: int) -> Collection:
    """All movements of the (N+1)-th sample: theta = k/(N+2), k = 1..N+1."""
    if N < 0:
        raise ValueError("N must be >= 0")
    structs = [beta_bernoulli(Fraction(k, N + 2), N) for k in range(1, N + 2)]
    return Collection(structs, label=f"beta_static_N{N}")


def beta_collection_adaptive(N: int) -> Collection:
    """Union over n <= N of the static families, deduplicated exactly."""
    if N < 0:
        raise ValueError("N must be >= 0")
    seen = set()
    structs = []
    for n in range(N + 1):
        for k in range(1, n + 2):
            s = beta_bernoulli(Fraction(k, n + 2), n)
            key = s.key()
            if key not in seen:
                seen.add(key)
                structs.append(s)
    return Collection(structs, label=f"beta_adaptive_N{N}")


def dirichlet_collection(N: int, d: int, delta, lattice_step: int | None = None) -> Collection:
    """Dirichlet-categorical structures on interior lattices, n <= N.

    For each n the mean lattice is k/(n+d) (the natural posterior means under
    a uniform prior) restricted to all coordinates strictly above delta.
    `lattice_step` overrides the denominator when given.
    """
    if not 0 < delta < Fraction(1, d):
        raise ValueError(f"delta must satisfy 0 < delta < 1/{d}")
    structs = []
    seen = set()
    for n in range(N + 1):
        denom = lattice_step if lattice_step is not None else n + d
        lo = int(math.floor(float(delta) * denom)) + 1
        for combo in _int_compositions(denom, d, lo):
            theta = SimplexPoint.from_exact([Fraction(c, denom) for c in combo])
            s = dirichlet_categorical(theta, n)
            key = s.key()
            if key not in seen:
                seen.add(key)
                structs.append(s)
    if not structs:
        raise ValueError("delta leaves no interior lattice points")
    return Collection(structs, label=f"dirichlet_N{N}_d{d}")


def _int_compositions(total: int, parts: int, lo: int):
    if parts == 1:
        if total >= lo:
            yield (total,)
        return
    for first in range(lo, total - lo * (parts - 1) + 1):
        for rest in _int_compositions(total - first, parts - 1, lo):
            yield (first,) + rest


def two_point(x_star: SimplexPoint, v, n: int) -> InfoStructure:
    """Equal-probability pair x* +- v/n; v a unit tangent, so cov norm is 1/n^2."""
    v = np.asarray(v, dtype=float)
    if v.shape != (x_star.d,):
        raise DimensionMismatchError("direction has wrong length")
    if abs(v.sum()) > 1e-9:
        raise ValueError("direction must sum to zero (tangent to the simplex)")
    if abs(np.linalg.norm(v) - 1.0) > 1e-9:
        raise ValueError("direction must have unit norm")
    hi = x_star.coords + v / n
    lo = x_star.coords - v / n
    if hi.min() < 0 or lo.min() < 0:
        raise ValueError("two-point atom leaves the simplex")
    atoms = [(SimplexPoint(hi), 0.5), (SimplexPoint(lo), 0.5)]
    return InfoStructure(atoms, label=f"two_point(n={n})")


def scale(struct: InfoStructure, t) -> InfoStructure:
    """Shrink X toward its mean: atoms mean + t (x - mean), probabilities kept."""
    t_frac = Fraction(t) if isinstance(t, (Fraction, int)) else None
    tf = float(t)
    if not 0.0 < tf <= 1.0:
        raise ValueError("scale factor must lie in (0, 1]")
    mu = struct.mean
    atoms = []
    for pt, p in struct.atoms:
        if t_frac is not None and pt.exact is not None and mu.exact is not None:
            coords = [mu.exact[j] + t_frac * (pt.exact[j] - mu.exact[j])
                      for j in range(struct.d)]
            atoms.append((SimplexPoint.from_exact(coords), p))
        else:
            coords = mu.coords + tf * (pt.coords - mu.coords)
            atoms.append((SimplexPoint(np.maximum(coords, 0.0)), p))
    return InfoStructure(atoms, label=f"scaled({struct.label},t={t})")


def covariance(struct: InfoStructure) -> np.ndarray:
    return struct.covariance()


def cov_norm(struct: InfoStructure) -> float:
    return struct.cov_norm()
