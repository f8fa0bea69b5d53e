"""Information gain of structures on convex rules, and curvature diagnostics.

The information gain of a structure X on a rule H is the Jensen gap
E[H(X)] - H(E X); the worst-case objective over a collection is its minimum.
Gains are accumulated with compensated summation because downstream sweeps
multiply them by squared sample sizes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import ConvexRule, as_coords
from .structures import Collection, InfoStructure

JENSEN_TOL = 1e-10


def info_gain(rule: ConvexRule, struct: InfoStructure) -> float:
    """E[H(X)] - H(E X), compensated summation over atoms."""
    terms = [float(p) * rule.value(pt.coords) for pt, p in struct.atoms]
    terms.append(-rule.value(struct.mean.coords))
    return math.fsum(terms)


def info_gain_extended(rule: ConvexRule, struct: InfoStructure) -> float:
    """Same gain evaluated in extended precision (80-bit where available)."""
    pts = struct.support_array().astype(np.longdouble)
    probs = struct.probs.astype(np.longdouble)
    mu = struct.mean.coords.astype(np.longdouble)
    vals = rule.values(pts)
    gain = (probs * (vals - rule.values(mu[None, :])[0])).sum()
    return float(gain)


@dataclass(frozen=True)
class GainReport:
    """Per-structure gains with the worst case singled out."""

    gains: tuple  # of (label, float)
    objective: float
    argmin_label: str

    def rows(self) -> list[tuple[str, float]]:
        return list(self.gains)


def objective(rule: ConvexRule, collection: Collection) -> GainReport:
    """Worst-case (minimum) gain over a finite collection, with argmin."""
    if len(collection) == 0:
        raise ValueError("objective of an empty collection is undefined")
    gains = []
    best = None
    best_label = ""
    for i, s in enumerate(collection):
        g = info_gain(rule, s)
        label = s.label or f"structure_{i}"
        gains.append((label, g))
        if best is None or g < best:
            best = g
            best_label = label
    return GainReport(tuple(gains), float(best), best_label)


def min_gain(rule: ConvexRule, collection) -> float:
    """Objective value only; accepts a Collection or any lazy family
    exposing ``min_gain(rule)``."""
    if isinstance(collection, Collection):
        return objective(rule, collection).objective
    return float(collection.min_gain(rule))


def relative_gain(rule: ConvexRule, ref_rule: ConvexRule, collections) -> list[float]:
    """Obj(rule)/Obj(ref_rule) per collection; the reference must have
    strictly positive objective everywhere."""
    out = []
    for c in collections:
        denom = min_gain(ref_rule, c)
        if denom <= 0.0:
            raise ZeroDivisionError(
                "reference rule has nonpositive objective on a collection")
        out.append(min_gain(rule, c) / denom)
    return out


def d_beta(rule: ConvexRule, x: float) -> float:
    """One-dimensional curvature operator x(1-x) h''(x) for binary rules."""
    x = float(x)
    if not 0.0 < x < 1.0:
        raise ValueError("d_beta needs an interior scalar point")
    return x * (1.0 - x) * rule.section_second_derivative(x)


def d_dir(rule: ConvexRule, x) -> float:
    """Simplex curvature operator sum_k x_k (e_k-x)' H''(x) (e_k-x)."""
    c = as_coords(x, rule.d)
    hess = rule.hessian(c)
    total = 0.0
    for k in range(rule.d):
        v = -c.copy()
        v[k] += 1.0
        total += float(c[k]) * float(v @ hess @ v)
    return total


def d_dir_trace(rule: ConvexRule, x) -> float:
    """Equivalent trace form Tr(A(x) H''(x)) with A(x) = diag(x) - x x'."""
    c = as_coords(x, rule.d)
    a = np.diag(c) - np.outer(c, c)
    return float(np.trace(a @ rule.hessian(c)))


def hessian(rule: ConvexRule, x) -> np.ndarray:
    return rule.hessian(x)


def tangent_directions(d: int, n_random: int = 100, seed: int = 0) -> np.ndarray:
    """Coordinate-pair differences plus seeded random unit tangents."""
    dirs = []
    for i in range(d):
        for j in range(i + 1, d):
            v = np.zeros(d)
            v[i], v[j] = 1.0, -1.0
            dirs.append(v / np.sqrt(2.0))
    rng = np.random.default_rng(seed)
    for _ in range(n_random):
        v = rng.standard_normal(d)
        v -= v.mean()
        nrm = np.linalg.norm(v)
        if nrm < 1e-12:
            continue
        dirs.append(v / nrm)
    return np.vstack(dirs)


def strong_convexity_modulus(rule: ConvexRule, grid, n_random: int = 100,
                             seed: int = 0) -> float:
    """min over grid points x and unit tangents v of v' H''(x) v."""
    pts = np.atleast_2d(np.asarray(grid, dtype=float))
    dirs = tangent_directions(rule.d, n_random, seed)
    best = math.inf
    for row in pts:
        h = rule.hessian(row)
        quad = np.einsum("ij,jk,ik->i", dirs, h, dirs)
        best = min(best, float(quad.min()))
    return best


def finite_difference_hessian(f, x: np.ndarray, step: float = 1e-5) -> np.ndarray:
    """Central-difference Hessian of a scalar function on R^d."""
    x = np.asarray(x, dtype=float)
    d = x.size
    h = np.zeros((d, d))
    f0 = f(x)
    for i in range(d):
        ei = np.zeros(d)
        ei[i] = step
        h[i, i] = (f(x + ei) - 2.0 * f0 + f(x - ei)) / step**2
        for j in range(i + 1, d):
            ej = np.zeros(d)
            ej[j] = step
            val = (f(x + ei + ej) - f(x + ei - ej)
                   - f(x - ei + ej) + f(x - ei - ej)) / (4.0 * step**2)
            h[i, j] = h[j, i] = val
    return h
