"""Dense revised primal simplex for small/medium LPs.

Solves   min c.x   s.t.  A x + s = b,  s >= 0,  l <= x <= u
with an explicit basis inverse, refreshed every ``REFRESH_EVERY`` pivots.
Pricing is most-negative-reduced-cost; after a run of degenerate pivots the
solver switches to Bland's rule (lowest eligible index for both the entering
and the leaving choice), which guarantees termination, and switches back once
a strict improvement occurs.  All tie-breaks are by variable index, so a given
input always produces the same basis.

The call sites here only generate b >= 0 (the origin is feasible), so no
phase-1 is implemented; the solver rejects negative right-hand sides.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

REFRESH_EVERY = 50
COST_TOL = 1e-9
RATIO_TOL = 1e-9
DEGENERATE_STEP = 1e-11
STALL_LIMIT = 100
TIE_TOL = 1e-12
FEAS_EXPAND = 1e-9  # Harris ratio test: allowed transient bound violation


class BasisSingularError(RuntimeError):
    """The working basis lost invertibility; callers may retry with Bland."""


@dataclass
class SimplexResult:
    status: str                  # optimal | unbounded | iteration_limit
    x: np.ndarray                # structural variable values
    objective: float             # c . x in the min sense
    duals: np.ndarray            # row multipliers from the final basis
    iterations: int
    degenerate_pivots: int


BASIC, AT_LOWER, AT_UPPER, NB_FREE = 0, 1, 2, 3


class _Workspace:
    def __init__(self, c, A, b, lower, upper):
        self.A = np.ascontiguousarray(A, dtype=float)
        self.b = np.asarray(b, dtype=float)
        self.m, self.n = self.A.shape
        if self.b.min() < -1e-12:
            raise ValueError("this simplex requires b >= 0 (origin-feasible form)")
        nm = self.n + self.m
        self.c = np.zeros(nm)
        self.c[: self.n] = np.asarray(c, dtype=float)
        self.lower = np.full(nm, 0.0)
        self.upper = np.full(nm, np.inf)
        self.lower[: self.n] = np.asarray(lower, dtype=float)
        self.upper[: self.n] = np.asarray(upper, dtype=float)

        self.basis = np.arange(self.n, nm)
        self.status = np.empty(nm, dtype=np.int8)
        for j in range(self.n):
            lo, up = self.lower[j], self.upper[j]
            if np.isneginf(lo) and np.isposinf(up):
                self.status[j] = NB_FREE
            elif np.isneginf(lo):
                self.status[j] = AT_UPPER
            else:
                self.status[j] = AT_LOWER
        self.status[self.n:] = AT_LOWER
        self.status[self.basis] = BASIC
        self.binv = np.eye(self.m)
        self.xb = self._recompute_basics()

    def column(self, j: int) -> np.ndarray:
        if j < self.n:
            return self.A[:, j]
        col = np.zeros(self.m)
        col[j - self.n] = 1.0
        return col

    def nonbasic_value(self, j: int) -> float:
        s = self.status[j]
        if s == AT_LOWER:
            return self.lower[j]
        if s == AT_UPPER:
            return self.upper[j]
        return 0.0

    def _rhs(self) -> np.ndarray:
        rhs = self.b.copy()
        for j in range(self.n):
            if self.status[j] != BASIC:
                v = self.nonbasic_value(j)
                if v != 0.0:
                    rhs -= self.A[:, j] * v
        # nonbasic slacks sit at zero and contribute nothing
        return rhs

    def _recompute_basics(self) -> np.ndarray:
        return self.binv @ self._rhs()

    def refresh(self):
        bmat = np.empty((self.m, self.m))
        for i, j in enumerate(self.basis):
            bmat[:, i] = self.column(j)
        try:
            self.binv = np.linalg.inv(bmat)
        except np.linalg.LinAlgError as exc:
            raise BasisSingularError("basis matrix became singular") from exc
        self.xb = self._recompute_basics()

    def solution(self) -> np.ndarray:
        x = np.empty(self.n + self.m)
        for j in range(self.n + self.m):
            if self.status[j] != BASIC:
                x[j] = self.nonbasic_value(j)
        x[self.basis] = self.xb
        return x


def solve_min(c, A, b, lower, upper, max_iter: int | None = None,
              bland_start: bool = False) -> SimplexResult:
    """Minimize c.x subject to A x <= b (slacked internally) and l <= x <= u."""
    ws = _Workspace(c, A, b, lower, upper)
    m, n = ws.m, ws.n
    if max_iter is None:
        max_iter = 20000 + 40 * (m + n)

    bland = bland_start
    stall = 0
    degenerate = 0
    it = 0
    optimal = False
    while it < max_iter:
        it += 1
        if it % REFRESH_EVERY == 0:
            ws.refresh()

        y = ws.c[ws.basis] @ ws.binv
        red = np.empty(n + m)
        red[:n] = ws.c[:n] - y @ ws.A
        red[n:] = -y

        stat = ws.status
        enter_dir = np.zeros(n + m)
        up_ok = ((stat == AT_LOWER) | (stat == NB_FREE)) & (red < -COST_TOL)
        dn_ok = ((stat == AT_UPPER) | (stat == NB_FREE)) & (red > COST_TOL)
        enter_dir[up_ok] = 1.0
        enter_dir[dn_ok] = -1.0
        eligible = np.flatnonzero(enter_dir != 0.0)
        if eligible.size == 0:
            optimal = True
            break

        if bland:
            j = int(eligible[0])
        else:
            j = int(eligible[np.argmax(np.abs(red[eligible]))])
        sigma = enter_dir[j]

        w = ws.binv @ ws.column(j)
        step = sigma * w  # xb decreases by step * t as the entering var moves t

        lb = ws.lower[ws.basis]
        ub = ws.upper[ws.basis]
        ratios = np.full(m, np.inf)
        relaxed = np.full(m, np.inf)
        pos = step > RATIO_TOL
        neg = step < -RATIO_TOL
        with np.errstate(invalid="ignore"):
            ratios[pos] = (ws.xb[pos] - lb[pos]) / step[pos]
            ratios[neg] = (ub[neg] - ws.xb[neg]) / (-step[neg])
            relaxed[pos] = (ws.xb[pos] - lb[pos] + FEAS_EXPAND) / step[pos]
            relaxed[neg] = (ub[neg] - ws.xb[neg] + FEAS_EXPAND) / (-step[neg])
        ratios = np.maximum(ratios, 0.0)
        relaxed = np.maximum(relaxed, 0.0)
        tmax = float(relaxed.min()) if m else np.inf

        limit = ws.upper[j] - ws.lower[j]  # entering variable's own travel
        if not np.isfinite(limit):
            limit = np.inf

        if np.isinf(tmax) and np.isinf(limit):
            return SimplexResult("unbounded", ws.solution()[:n], -np.inf,
                                 y, it, degenerate)

        if limit < tmax - TIE_TOL:
            # bound flip: the entering variable crosses to its other bound
            t = limit
            ws.xb -= step * t
            ws.status[j] = AT_UPPER if sigma > 0 else AT_LOWER
        else:
            # two-pass (Harris) ratio test: among rows whose strict ratio fits
            # under the relaxed minimum, prefer sturdy pivots
            group = np.flatnonzero(ratios <= tmax + TIE_TOL)
            key = np.abs(step[group])
            if bland:
                solid = group[key >= 1e-2 * key.max()]
                leave_row = int(solid[np.argmin(ws.basis[solid])])
            else:
                best = np.flatnonzero(key >= key.max() - TIE_TOL)
                cand = group[best]
                leave_row = int(cand[np.argmin(ws.basis[cand])])
            t = float(ratios[leave_row])
            entering_start = ws.nonbasic_value(j)
            out_var = int(ws.basis[leave_row])
            ws.xb -= step * t
            ws.status[out_var] = AT_LOWER if step[leave_row] > 0 else AT_UPPER
            ws.basis[leave_row] = j
            ws.status[j] = BASIC
            ws.xb[leave_row] = entering_start + sigma * t
            pivot = w[leave_row]
            row = ws.binv[leave_row] / pivot
            ws.binv -= np.outer(w, row)
            ws.binv[leave_row] = row

        if t <= DEGENERATE_STEP:
            degenerate += 1
            stall += 1
            if stall >= STALL_LIMIT:
                bland = True
        else:
            stall = 0
            bland = False

    if not optimal:
        return SimplexResult("iteration_limit", ws.solution()[:n], np.nan,
                             np.zeros(m), it, degenerate)

    ws.refresh()
    x = ws.solution()
    y = ws.c[ws.basis] @ ws.binv
    obj = float(ws.c @ x)
    return SimplexResult("optimal", x[:n], obj, y, it, degenerate)
