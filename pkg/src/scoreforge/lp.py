"""Optimal bounded scoring rules for finite collections, by linear programming.

Variables are an epigraph scalar t, one value h_a and one supporting gradient
g_a per distinct support point (simplex vertices included).  Rows are

    t <= sum_j p_ij h_(i,j) - h_(i,mean)        one per structure,
    0 <= h_a <= 1                               two bound rows per point,
    h_a2 >= h_a + g_a . (x_a2 - x_a)            all ordered point pairs,

and the optimum extends to the bounded convex function
H(x) = max(max_a h_a + g_a.(x - x_a), min_a h_a).

Coincident support points are merged exactly (rational keys) into a single
variable before rows are laid out; the merge provenance is kept on the
instance.  The solve activates supporting-hyperplane rows on demand in
deterministic batches, so certificates are still checked against the full
row set; inactive rows carry zero dual weight.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import simplex
from .gain import objective
from .geometry import PiecewiseLinearConvex, SimplexPoint, simplex_vertices
from .structures import Collection

FEAS_TOL = 1e-8
GAP_TOL = 1e-8
ACTIVATION_TOL = 1e-9
MAX_ROUNDS = 200


@dataclass
class LPInstance:
    """Dense LP rows plus the index maps back to support points."""

    d: int
    points: list                      # distinct support points, first-seen order
    collection: Collection
    structure_terms: list             # per structure: (atom idx array, prob array, mean idx)
    vertex_indices: list[int]
    merge_groups: dict                # point idx -> raw labels merged into it
    A: np.ndarray                     # (m, n_vars) dense rows, A x <= b
    b: np.ndarray
    c: np.ndarray                     # min sense (c = -e_t)
    row_kind: list[str]
    n_epigraph: int
    n_bound: int
    n_hyperplane: int
    has_constant: bool

    @property
    def n_points(self) -> int:
        return len(self.points)

    @property
    def n_variables(self) -> int:
        return 1 + (1 + self.d) * self.n_points

    def h_index(self, a: int) -> int:
        return 1 + a

    def g_slice(self, a: int) -> slice:
        base = 1 + self.n_points + self.d * a
        return slice(base, base + self.d)

    def hyperplane_row(self, a: int, a2: int) -> int:
        return self.n_epigraph + self.n_bound + a * self.n_points + a2

    def point_array(self) -> np.ndarray:
        return np.vstack([p.coords for p in self.points])


@dataclass
class Certificate:
    primal_residual: float
    dual_residual: float
    duality_gap: float

    def ok(self, opt: float) -> bool:
        return (self.primal_residual <= FEAS_TOL
                and self.dual_residual <= FEAS_TOL
                and self.duality_gap <= GAP_TOL * (1.0 + abs(opt)))


@dataclass
class LPSolution:
    status: str
    opt: float
    h: np.ndarray
    g: np.ndarray                    # (n_points, d)
    duals: np.ndarray                # over the full row set
    certificate: Certificate
    iterations: int
    activation_rounds: int
    degenerate: bool                 # a constant structure forces opt = 0
    instance: LPInstance = field(repr=False, default=None)


def build_lp(collection: Collection) -> LPInstance:
    """Lay out the dense LP for a finite collection (exact point dedup)."""
    d = collection.d
    index_of: dict = {}
    points: list[SimplexPoint] = []
    merge_groups: dict = {}

    def intern(pt: SimplexPoint, raw_label):
        k = pt.key()
        if k in index_of:
            a = index_of[k]
            merge_groups[a].append(raw_label)
            return a
        a = len(points)
        index_of[k] = a
        points.append(pt)
        merge_groups[a] = [raw_label]
        return a

    structure_terms = []
    for i, s in enumerate(collection):
        mean_idx = intern(s.mean, (i, "mean"))
        atom_idx = []
        probs = []
        for j, (pt, p) in enumerate(s.atoms):
            atom_idx.append(intern(pt, (i, j)))
            probs.append(float(p))
        structure_terms.append((np.array(atom_idx), np.array(probs), mean_idx))

    vertex_indices = [intern(v, ("vertex", k))
                      for k, v in enumerate(simplex_vertices(d))]

    K = len(points)
    n_structs = len(collection)
    n_vars = 1 + (1 + d) * K
    n_epi, n_bound, n_hyp = n_structs, 2 * K, K * K
    m = n_epi + n_bound + n_hyp
    A = np.zeros((m, n_vars))
    b = np.zeros(m)
    row_kind = []

    X = np.vstack([p.coords for p in points])

    for i, (atom_idx, probs, mean_idx) in enumerate(structure_terms):
        A[i, 0] = 1.0
        for a, p in zip(atom_idx, probs):
            A[i, 1 + a] -= p
        A[i, 1 + mean_idx] += 1.0
        row_kind.append("epigraph")

    for a in range(K):
        A[n_epi + a, 1 + a] = 1.0
        b[n_epi + a] = 1.0
        row_kind.append("h_upper")
    for a in range(K):
        A[n_epi + K + a, 1 + a] = -1.0
        row_kind.append("h_lower")

    base = n_epi + n_bound
    for a in range(K):
        gs = slice(1 + K + d * a, 1 + K + d * (a + 1))
        for a2 in range(K):
            r = base + a * K + a2
            A[r, 1 + a] += 1.0
            A[r, 1 + a2] -= 1.0
            A[r, gs] = X[a2] - X[a]
            row_kind.append("hyperplane")

    c = np.zeros(n_vars)
    c[0] = -1.0  # maximize t

    return LPInstance(
        d=d, points=points, collection=collection,
        structure_terms=structure_terms, vertex_indices=vertex_indices,
        merge_groups=merge_groups, A=A, b=b, c=c, row_kind=row_kind,
        n_epigraph=n_epi, n_bound=n_bound, n_hyperplane=n_hyp,
        has_constant=collection.has_constant_structure(),
    )


def _initial_rows(inst: LPInstance) -> list[int]:
    """Always-on rows plus hyperplane rows toward each point's nearest neighbors."""
    rows = list(range(inst.n_epigraph + inst.n_bound))
    K = inst.n_points
    X = inst.point_array()
    want = min(K - 1, 2 * inst.d + 2)
    if want <= 0:
        return rows
    d2 = ((X[:, None, :] - X[None, :, :]) ** 2).sum(axis=2)
    np.fill_diagonal(d2, np.inf)
    for a in range(K):
        order = np.argsort(d2[a], kind="stable")[:want]
        for a2 in order:
            rows.append(inst.hyperplane_row(a, int(a2)))
            rows.append(inst.hyperplane_row(int(a2), a))
    return sorted(set(rows))


def _hyperplane_violations(inst: LPInstance, h: np.ndarray, g: np.ndarray) -> np.ndarray:
    """Matrix of h_a - h_a2 + g_a.(x_a2 - x_a) over all ordered pairs."""
    X = inst.point_array()
    gxt = g @ X.T                       # (a, a2) -> g_a . x_a2
    own = np.einsum("ad,ad->a", g, X)   # g_a . x_a
    return h[:, None] - h[None, :] + gxt - own[:, None]


def solve_lp(inst: LPInstance, row_activation: bool = True,
             max_rounds: int = MAX_ROUNDS) -> LPSolution:
    """Solve to an optimal basic solution; certificates refer to the full rows."""
    n_vars = inst.n_variables
    lower = np.full(n_vars, -np.inf)
    upper = np.full(n_vars, np.inf)

    if row_activation:
        active = _initial_rows(inst)
    else:
        active = list(range(inst.A.shape[0]))

    active_set = set(active)
    rounds = 0
    total_iters = 0
    result = None
    while True:
        rounds += 1
        if rounds > max_rounds:
            raise RuntimeError("row activation failed to converge")
        try:
            result = simplex.solve_min(inst.c, inst.A[active], inst.b[active],
                                       lower, upper)
        except simplex.BasisSingularError:
            result = simplex.solve_min(inst.c, inst.A[active], inst.b[active],
                                       lower, upper, bland_start=True)
        total_iters += result.iterations
        if result.status != "optimal":
            break
        x = result.x
        K = inst.n_points
        h = x[1:1 + K]
        g = x[1 + K:].reshape(K, inst.d)
        viol = _hyperplane_violations(inst, h, g)
        flat = np.flatnonzero(viol.ravel() > ACTIVATION_TOL)
        base = inst.n_epigraph + inst.n_bound
        new_rows = [base + int(r) for r in flat
                    if base + int(r) not in active_set]
        if not new_rows:
            break
        order = np.argsort(-viol.ravel()[[r - base for r in new_rows]],
                           kind="stable")
        cap = max(200, 4 * K)
        for idx in order[:cap]:
            r = new_rows[int(idx)]
            active_set.add(r)
        active = sorted(active_set)

    if result.status == "unbounded":
        raise AssertionError("LP cannot be unbounded: h box rows bound t")
    if result.status != "optimal":
        return LPSolution(result.status, float("nan"), np.array([]),
                          np.array([[]]), np.array([]),
                          Certificate(np.inf, np.inf, np.inf),
                          total_iters, rounds, inst.has_constant, inst)

    x = result.x
    K = inst.n_points
    h = x[1:1 + K].copy()
    g = x[1 + K:].reshape(K, inst.d).copy()
    opt = float(x[0])

    duals = np.zeros(inst.A.shape[0])
    duals[active] = result.duals

    primal_res = float(max(0.0, (inst.A @ x - inst.b).max()))
    stationarity = inst.c - inst.A.T @ duals
    dual_res = float(max(np.abs(stationarity).max(), max(0.0, duals.max())))
    gap = float(abs(inst.c @ x - inst.b @ duals))
    cert = Certificate(primal_res, dual_res, gap)
    if not cert.ok(opt):
        raise RuntimeError(f"optimal basis fails its certificate: {cert}")

    return LPSolution("optimal", opt, h, g, duals, cert,
                      total_iters, rounds, inst.has_constant, inst)


def extract_H(sol: LPSolution) -> PiecewiseLinearConvex:
    """Max-of-affine rule through the solved values: pieces (g_a, h_a - g_a.x_a)."""
    if sol.status != "optimal":
        raise ValueError(f"cannot extract a rule from status {sol.status!r}")
    inst = sol.instance
    X = inst.point_array()
    pieces = []
    for a in range(inst.n_points):
        pieces.append((sol.g[a], float(sol.h[a] - sol.g[a] @ X[a])))
    floor = float(sol.h.min())
    return PiecewiseLinearConvex(inst.d, pieces, floor=floor, bounded=True)


def optimal_rule(collection: Collection, row_activation: bool = True):
    """Build, solve, extract, and re-verify the worst-case gain of the output.

    Returns (rule, opt, solution).
    """
    inst = build_lp(collection)
    sol = solve_lp(inst, row_activation=row_activation)
    rule = extract_H(sol)
    report = objective(rule, collection)
    if abs(report.objective - sol.opt) > 1e-6 * (1.0 + abs(sol.opt)):
        raise RuntimeError(
            f"extracted rule gain {report.objective} disagrees with LP optimum "
            f"{sol.opt}")
    return rule, sol.opt, sol
