"""Collections of information structures that pin down a target convex rule.

Three building blocks, each a small finite-support structure with a
prescribed mean and an exactly computable gain:

- anchor: mass 1-eps at the rule's minimum point, eps spread over the
  simplex vertices by barycentric weight; forces any optimum to hit 0 at
  the minimum and 1 at every vertex.
- upper bound at theta: mass at theta plus vertex mass; any rule that is
  optimal against it must lie at or below the target at theta.
- lower bound at theta: writes the minimum point as a combination of theta
  and all-but-one vertex; any optimal rule must lie at or above the target
  at theta.

A plan bundles the anchor with upper/lower pairs at the face vertices and
one interior point per face of a piecewise-linear target; re-solving the LP
on the bundled collection reproduces the target at those points.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .geometry import (
    ConvexRule,
    PiecewiseLinearConvex,
    SimplexPoint,
    simplex_grid,
    simplex_vertices,
)
from .structures import Collection, InfoStructure

VALUE_TOL = 1e-9
DEFAULT_GRID = {2: 200, 3: 40}


def _default_grid(d: int) -> np.ndarray:
    res = DEFAULT_GRID.get(d, 12)
    return simplex_grid(d, res)


def necessary_check(rule: ConvexRule, grid: np.ndarray | None = None,
                    tol: float = VALUE_TOL, extra_points=None):
    """A rule can only be pinned by some collection if its minimum is 0 and
    every simplex vertex evaluates to 1.  Returns (ok, report)."""
    if grid is None:
        grid = _default_grid(rule.d)
        center = np.full((1, rule.d), 1.0 / rule.d)
        grid = np.vstack([grid, center])
    if extra_points is not None and len(extra_points):
        grid = np.vstack([grid, np.atleast_2d(np.asarray(extra_points, dtype=float))])
    vals = rule.values(np.asarray(grid, dtype=float))
    vertex_vals = [rule.value(v.coords) for v in simplex_vertices(rule.d)]
    min_val = float(vals.min())
    ok = min_val <= tol and all(abs(v - 1.0) <= tol for v in vertex_vals)
    report = {"min_on_grid": min_val, "vertex_values": vertex_vals, "ok": ok}
    return ok, report


def anchor_structure(theta_star: SimplexPoint, eps: float) -> InfoStructure:
    """Mass 1-eps at the minimum point, eps theta*_j at each vertex e_j."""
    if not 0.0 < eps < 1.0:
        raise ValueError("eps must lie strictly between 0 and 1")
    if not theta_star.interior():
        raise ValueError("anchor needs a strictly interior minimum point")
    atoms = [(theta_star, 1.0 - eps)]
    for j, v in enumerate(simplex_vertices(theta_star.d)):
        atoms.append((v, eps * float(theta_star.coords[j])))
    return InfoStructure(atoms, label=f"anchor(eps={eps:g})")


def upper_bound_structure(rule: ConvexRule, theta: SimplexPoint,
                          gain: float) -> InfoStructure | None:
    """Structure with mean theta whose gain on the target equals `gain`.

    Returns None (a passthrough) when the target is already 1 at theta, in
    which case no structure is needed for the upper bound.
    """
    h = rule.value(theta.coords)
    cap = 1.0 - h
    if cap <= VALUE_TOL:
        return None
    if gain > cap + VALUE_TOL:
        raise ValueError(f"gain {gain} exceeds the bound {cap} at this point")
    w = gain / cap
    atoms = [(theta, 1.0 - w)]
    for j, v in enumerate(simplex_vertices(theta.d)):
        atoms.append((v, w * float(theta.coords[j])))
    return InfoStructure(atoms, label=f"upper@{_pt_label(theta)}")


def decompose_through(theta_star: SimplexPoint, theta: SimplexPoint):
    """Write theta* = beta_j* theta + sum_{j != j*} beta_j e_j with beta >= 0.

    j* minimizes theta*_j / theta_j, which guarantees nonnegative weights;
    weights are validated at runtime anyway.
    """
    ts = theta_star.coords
    th = theta.coords
    d = theta.d
    ratios = [ts[j] / th[j] if th[j] > 0 else math.inf for j in range(d)]
    j_star = int(np.argmin(ratios))
    if not math.isfinite(ratios[j_star]):
        raise ValueError("no coordinate of theta is positive")
    beta = np.empty(d)
    beta[j_star] = ratios[j_star]
    for j in range(d):
        if j != j_star:
            beta[j] = ts[j] - beta[j_star] * th[j]
    if beta.min() < -1e-12:
        raise ValueError("decomposition produced a negative weight")
    beta = np.maximum(beta, 0.0)
    return j_star, beta


def lower_bound_structure(rule: ConvexRule, theta: SimplexPoint,
                          theta_star: SimplexPoint,
                          gain: float) -> InfoStructure | None:
    """Structure with mean theta* forcing optima up to the target at theta.

    Returns None when the target is already 0 at theta (nothing to force).
    """
    h = rule.value(theta.coords)
    if h <= VALUE_TOL:
        return None
    if theta.key() == theta_star.key() or np.allclose(
            theta.coords, theta_star.coords, atol=1e-12):
        raise ValueError("no valid decomposition: theta equals the minimum point")
    j_star, beta = decompose_through(theta_star, theta)
    cap = 1.0 - beta[j_star] * (1.0 - h)
    if gain > cap + VALUE_TOL:
        raise ValueError(f"gain {gain} exceeds the bound {cap} at this point")
    w = gain / cap
    atoms = [(theta_star, 1.0 - w), (theta, w * float(beta[j_star]))]
    verts = simplex_vertices(theta.d)
    for j in range(theta.d):
        if j != j_star:
            atoms.append((verts[j], w * float(beta[j])))
    return InfoStructure(atoms, label=f"lower@{_pt_label(theta)}")


def _pt_label(pt: SimplexPoint) -> str:
    if pt.d == 2:
        return f"{float(pt.coords[0]):g}"
    return "(" + ",".join(f"{float(v):g}" for v in pt.coords) + ")"


@dataclass(frozen=True)
class Face:
    piece: int
    vertices: tuple          # of SimplexPoint
    interior: SimplexPoint


def enumerate_faces(rule: PiecewiseLinearConvex, tol: float = 1e-9) -> list[Face]:
    """Full-dimensional regions where one affine piece attains the maximum.

    Vertices of each region are intersections of d-1 active boundaries
    (coordinate hyperplanes or ties with other pieces) with the simplex
    plane; lower-dimensional regions are dropped.
    """
    d = rule.d
    G = np.vstack([rule.gradients, np.zeros((1, d))])
    B = np.concatenate([rule.intercepts, [rule.floor]])
    P = len(B)
    faces = []
    for p in range(P):
        # boundary rows: x_k = 0 and value ties (G[p]-G[q]).x = B[q]-B[p]
        rows = []
        rhs = []
        for k in range(d):
            e = np.zeros(d)
            e[k] = 1.0
            rows.append(e)
            rhs.append(0.0)
        for q in range(P):
            if q == p:
                continue
            rows.append(G[p] - G[q])
            rhs.append(B[q] - B[p])
        verts = []
        for combo in itertools.combinations(range(len(rows)), d - 1):
            mat = np.vstack([np.ones(d)] + [rows[i] for i in combo])
            vec = np.array([1.0] + [rhs[i] for i in combo])
            try:
                x = np.linalg.solve(mat, vec)
            except np.linalg.LinAlgError:
                continue
            if x.min() < -tol:
                continue
            vals = G @ x + B
            if vals[p] < vals.max() - tol:
                continue
            verts.append(np.clip(x, 0.0, None))
        if not verts:
            continue
        uniq = []
        for v in verts:
            if not any(np.allclose(v, u, atol=1e-8) for u in uniq):
                uniq.append(v)
        if len(uniq) < d:
            continue
        mat = np.vstack(uniq) - uniq[0]
        if np.linalg.matrix_rank(mat, tol=1e-8) < d - 1:
            continue
        centroid = np.mean(np.vstack(uniq), axis=0)
        centroid = centroid / centroid.sum()
        faces.append(Face(
            piece=p,
            vertices=tuple(SimplexPoint(v / v.sum()) for v in uniq),
            interior=SimplexPoint(centroid),
        ))
    return faces


@dataclass(frozen=True)
class SettlementPlan:
    target: PiecewiseLinearConvex
    theta_star: SimplexPoint
    designated: tuple              # of (SimplexPoint, role)
    eps: float
    collection: Collection


def settle_plan(rule, theta_star: SimplexPoint | None = None) -> SettlementPlan:
    """Finite collection pinning a piecewise-linear target at its face points.

    The shared gain is half the smallest of the per-point bounds, so every
    emitted structure carries the identical gain eps.
    """
    if not isinstance(rule, PiecewiseLinearConvex):
        raise TypeError(
            "settle_plan needs a piecewise-linear target; for smooth rules "
            "use settle_on_region")
    faces = enumerate_faces(rule)
    if not faces:
        raise ValueError("no full-dimensional faces found")
    face_pts = np.vstack([pt.coords for f in faces
                          for pt in list(f.vertices) + [f.interior]])
    ok, report = necessary_check(rule, extra_points=face_pts)
    if not ok:
        raise ValueError(f"target fails the settlement precondition: {report}")

    if theta_star is None:
        candidates = [pt for f in faces for pt in f.vertices] + \
                     [f.interior for f in faces]
        theta_star = min(candidates, key=lambda pt: rule.value(pt.coords))
    if rule.value(theta_star.coords) > VALUE_TOL:
        raise ValueError("no minimum point with value 0 found on face points")
    if not theta_star.interior():
        raise ValueError("no interior minimum point found")

    vertex_keys = {v.key() for v in simplex_vertices(rule.d)}
    designated = []
    seen = {theta_star.key()}
    for f in faces:
        for pt, role in [(v, "face-vertex") for v in f.vertices] + \
                        [(f.interior, "face-interior")]:
            k = pt.key()
            if k in seen or k in vertex_keys:
                continue
            seen.add(k)
            designated.append((pt, role))

    bounds = []
    for pt, _ in designated:
        h = rule.value(pt.coords)
        if h < 1.0 - VALUE_TOL:
            bounds.append(1.0 - h)
        if h > VALUE_TOL:
            j_star, beta = decompose_through(theta_star, pt)
            bounds.append(1.0 - float(beta[j_star]) * (1.0 - h))
    eps = 0.5 * min(bounds) if bounds else 0.25

    structures = [anchor_structure(theta_star, eps)]
    for pt, _ in designated:
        up = upper_bound_structure(rule, pt, eps)
        if up is not None:
            structures.append(up)
        lo = lower_bound_structure(rule, pt, theta_star, eps)
        if lo is not None:
            structures.append(lo)

    plan = SettlementPlan(
        target=rule, theta_star=theta_star, designated=tuple(designated),
        eps=eps, collection=Collection(structures, label="settlement_plan"),
    )
    return plan


def region_points(rule: ConvexRule, delta: float,
                  grid_step: float = 0.05, lattice_resolution: int = 10
                  ) -> list[SimplexPoint]:
    """Grid points theta with delta < H(theta) < 1 - delta."""
    if not 0.0 < delta < 0.5:
        raise ValueError("delta must lie in (0, 1/2)")
    if rule.d == 2:
        n = int(round(1.0 / grid_step))
        xs = np.arange(1, n) / n
        pts = np.column_stack([xs, 1.0 - xs])
    else:
        pts = simplex_grid(rule.d, lattice_resolution)
    vals = rule.values(pts)
    keep = (vals > delta) & (vals < 1.0 - delta)
    if not keep.any():
        raise ValueError("region is empty at this delta")
    return [SimplexPoint(row) for row in pts[keep]]


def settle_on_region(rule: ConvexRule, delta: float,
                     theta_star: SimplexPoint | None = None,
                     grid_step: float = 0.05,
                     lattice_resolution: int = 10) -> Collection:
    """Collection pinning the target wherever delta < H < 1 - delta.

    Every emitted structure has gain exactly delta on the target: the upper
    structure at theta uses weight delta/(1-H(theta)), the lower structure
    delta over its own bound, plus one anchor at the minimum.
    """
    ok, report = necessary_check(rule)
    if not ok:
        raise ValueError(f"target fails the settlement precondition: {report}")
    if theta_star is None:
        theta_star = _minimum_point(rule)
    structures = [anchor_structure(theta_star, delta)]
    for pt in region_points(rule, delta, grid_step, lattice_resolution):
        up = upper_bound_structure(rule, pt, delta)
        if up is not None:
            structures.append(up)
        lo = lower_bound_structure(rule, pt, theta_star, delta)
        if lo is not None:
            structures.append(lo)
    return Collection(structures, label=f"region_settlement(delta={delta:g})")


def _minimum_point(rule: ConvexRule) -> SimplexPoint:
    # The built-in normalized rules all bottom out at the barycenter.
    if rule.kind in ("quadratic", "spherical", "log"):
        from .geometry import simplex_center
        return simplex_center(rule.d)
    grid = _default_grid(rule.d)
    vals = rule.values(grid)
    best = int(np.argmin(vals))
    pt = SimplexPoint(grid[best])
    if not pt.interior():
        raise ValueError("no interior minimum point found")
    return pt


class QuadraticWitnessRule(ConvexRule):
    """Binary rule equal to the quadratic rule right of a cut, affine left of it.

    Shares every gain the quadratic rule achieves on collections whose
    worst-case gain is at least delta, while differing as a function; it
    witnesses that no collection pins the quadratic rule everywhere.
    """

    kind = "quadratic_witness"

    def __init__(self, delta: float):
        super().__init__(2)
        if not 0.0 < delta < 1.0:
            raise ValueError("delta must lie in (0, 1)")
        self.delta = delta
        self.cut = (1.0 - math.sqrt(1.0 - delta)) / 2.0
        self.slope = 2.0 * delta / (1.0 - math.sqrt(1.0 - delta))

    def values(self, pts):
        pts = np.asarray(pts)
        x = pts[..., 0]
        quad = 4.0 * (x - 0.5) ** 2
        left = 1.0 - self.slope * x
        return np.where(x >= self.cut, quad, left)

    def subgradient(self, x):
        from .geometry import as_coords
        c = as_coords(x, 2)
        xv = float(c[0])
        slope = 8.0 * (xv - 0.5) if xv >= self.cut else -self.slope
        # gradient in ambient coordinates with d/dx = g[0] - g[1]
        return np.array([slope, 0.0])


def quadratic_unsettled_witness(delta: float) -> QuadraticWitnessRule:
    return QuadraticWitnessRule(delta)
