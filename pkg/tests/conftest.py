"""Shared helpers: random collection generator and the brute-force LP oracle."""

import numpy as np
from hypothesis import settings

from scoreforge import Collection, InfoStructure, SimplexPoint

settings.register_profile("det", derandomize=True, deadline=None)
settings.load_profile("det")


def random_collection(rng: np.random.Generator, d: int,
                      max_structures: int = 5, max_atoms: int = 4) -> Collection:
    """Random finite collection with interior atoms (no vertex coincidences)."""
    n_structs = int(rng.integers(1, max_structures + 1))
    structs = []
    for i in range(n_structs):
        n_atoms = int(rng.integers(2, max_atoms + 1))
        pts = 0.9 * rng.dirichlet(np.ones(d), size=n_atoms) + 0.1 / d
        probs = rng.dirichlet(np.ones(n_atoms))
        atoms = [(SimplexPoint(p), float(w)) for p, w in zip(pts, probs)]
        structs.append(InfoStructure(atoms, label=f"rand_{i}"))
    return Collection(structs, label="random")


def brute_force_binary_opt(collection: Collection, step: float = 0.01):
    """Grid search over convex piecewise-linear rules with kinks at the
    support points, vertex values pinned at 1 (an optimum of that form
    always exists).  Independent of the LP solver.

    Only for d=2 with at most 3 distinct support points.
    """
    assert collection.d == 2
    support = sorted({float(p.coords[0]) for s in collection
                      for p in [s.mean] + s.points})
    assert len(support) <= 3
    k = len(support)
    xs = np.array([0.0] + support + [1.0])

    grid = np.round(np.arange(0.0, 1.0 + 1e-12, step), 10)
    mesh = np.meshgrid(*([grid] * k), indexing="ij")
    H = np.column_stack([m.ravel() for m in mesh])      # (G^k, k)
    ones = np.ones((H.shape[0], 1))
    vals = np.hstack([ones, H, ones])                   # values at xs

    slopes = np.diff(vals, axis=1) / np.diff(xs)
    convex = (np.diff(slopes, axis=1) >= -1e-12).all(axis=1)
    vals = vals[convex]

    idx = {x: i for i, x in enumerate(xs)}
    objs = np.full(vals.shape[0], np.inf)
    for s in collection:
        j = np.zeros(vals.shape[0])
        for pt, p in s.atoms:
            j += float(p) * vals[:, idx[float(pt.coords[0])]]
        j -= vals[:, idx[float(s.mean.coords[0])]]
        objs = np.minimum(objs, j)
    return float(objs.max())
