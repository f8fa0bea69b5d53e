"""Acceptance criteria, one test per criterion, at the stated tolerances.

Each test prints one `[criterion k] PASS ...` line (visible with -s / -rA);
a failed assertion marks the criterion red.
"""

import math
import time
from fractions import Fraction

import numpy as np
import pytest

from conftest import brute_force_binary_opt, random_collection

from scoreforge import (
    BETA_LIMIT,
    Collection,
    InfoStructure,
    LogRule,
    QuadraticRule,
    SimplexPoint,
    SphericalRule,
    beta_bernoulli,
    beta_limit_sweep,
    build_lp,
    dirichlet_limit,
    dirichlet_limit_sweep,
    expected_score,
    extract_H,
    finite_difference_hessian,
    info_gain,
    lp_log_convergence,
    objective,
    optimal_rule,
    pyramid,
    quadratic_limit,
    quadratic_limit_sweep,
    quadratic_unsettled_witness,
    scale,
    settle_on_region,
    settle_plan,
    solve_lp,
    v_shape,
)
from scoreforge.gain import info_gain as J
from scoreforge.geometry import builtin_rule, random_simplex_points
from scoreforge.settlement import region_points


def report(k: int, detail: str, elapsed: float, budget: float):
    print(f"[criterion {k}] PASS {detail} ({elapsed:.1f}s, budget {budget:.0f}s)")
    assert elapsed < budget, f"criterion {k} exceeded its runtime budget"


def test_criterion_1_singleton_optimum():
    t0 = time.time()
    coll = Collection([beta_bernoulli(Fraction(1, 2), 0)])
    sol = solve_lp(build_lp(coll))
    assert sol.opt == pytest.approx(1 / 3, abs=1e-6)
    rule = extract_H(sol)
    target = pyramid(0.5)
    worst = max(abs(rule.value(x) - target.value(x))
                for x in (0.0, 1 / 3, 0.5, 2 / 3, 1.0))
    assert worst <= 1e-4
    report(1, f"opt={sol.opt:.9f}, max dev at check points {worst:.2e}",
           time.time() - t0, 1.0)


def test_criterion_2_lp_self_consistency():
    t0 = time.time()
    rng = np.random.default_rng(2024)
    oracle_checked = 0
    for i in range(20):
        d = 2 if i % 2 == 0 else 3
        if i < 6 and d == 2:
            # singleton two-atom collections have exactly 3 support points,
            # which keeps the h-grid oracle tractable
            x = sorted(rng.uniform(0.05, 0.95, size=2))
            p = float(rng.uniform(0.2, 0.8))
            coll = Collection([InfoStructure(
                [(SimplexPoint.from_scalar(x[0]), p),
                 (SimplexPoint.from_scalar(x[1]), 1 - p)])])
        else:
            coll = random_collection(rng, d)
        rule, opt, sol = optimal_rule(coll)
        rep = objective(rule, coll)
        assert abs(rep.objective - opt) <= 1e-8
        assert sol.certificate.primal_residual <= 1e-8
        assert sol.certificate.dual_residual <= 1e-8
        support = {pt.key() for s in coll for pt in [s.mean] + s.points}
        if coll.d == 2 and len(support) <= 3:
            oracle = brute_force_binary_opt(coll, step=0.01)
            assert oracle <= opt + 1e-8
            assert oracle >= opt - 0.02
            oracle_checked += 1
    assert oracle_checked >= 3
    report(2, f"20 collections consistent; {oracle_checked} oracle-checked",
           time.time() - t0, 120.0)


def test_criterion_3_quadratic_limit():
    t0 = time.time()
    ns = (10, 100, 1000)
    for d in (2, 3, 5):
        sw = quadratic_limit_sweep(QuadraticRule(d), d, ns)
        worst = max(abs(s - quadratic_limit(d)) for s in sw.scaled_objective)
        assert worst <= 1e-10, (d, sw.scaled_objective)
    sph = quadratic_limit_sweep(SphericalRule(2), 2, (10,))
    gap2 = quadratic_limit(2) - sph.scaled_objective[0]
    sph3 = quadratic_limit_sweep(SphericalRule(3), 3, (10,))
    gap3 = quadratic_limit(3) - sph3.scaled_objective[0]
    assert gap2 >= 0.01 and gap3 >= 0.01
    report(3, f"n^2 Obj exact for quadratic (d=2,3,5); spherical gaps "
              f"{gap2:.3f}/{gap3:.3f}", time.time() - t0, 60.0)


def test_criterion_4_beta_log_limit():
    t0 = time.time()
    sw = beta_limit_sweep(LogRule(2), (10 ** 3, 10 ** 4))
    err3, err4 = sw.abs_err
    assert err3 <= 0.05
    assert err4 <= 0.02
    ln = LogRule(2)
    N = 10 ** 4
    pointwise = []
    for theta in (0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8):
        val = 2 * (N + 3) ** 2 * math.log(2) * J(ln, beta_bernoulli(theta, N))
        pointwise.append(val)
        assert 0.98 <= val <= 1.02
    report(4, f"scaled obj {sw.scaled_objective[0]:.4f}/{sw.scaled_objective[1]:.4f} "
              f"vs {BETA_LIMIT:.4f}; pointwise in "
              f"[{min(pointwise):.4f},{max(pointwise):.4f}]",
           time.time() - t0, 300.0)


def test_criterion_5_dirichlet_log_limit():
    t0 = time.time()
    sw = dirichlet_limit_sweep(LogRule(3), 3, (2000,))
    err = abs(sw.scaled_objective[0] - dirichlet_limit(3))
    assert err <= 0.05
    report(5, f"scaled obj {sw.scaled_objective[0]:.5f} vs "
              f"{dirichlet_limit(3):.5f} (err {err:.4f})",
           time.time() - t0, 600.0)


def test_criterion_6_figure3_deviation_decreasing():
    t0 = time.time()
    rows = lp_log_convergence((5, 10, 20))
    sup = [r.sup_dev for r in rows]
    assert sup[0] > sup[1] > sup[2], sup
    report(6, "sup deviations " + " > ".join(f"{s:.4f}" for s in sup),
           time.time() - t0, 300.0)


def test_criterion_7_settlement_roundtrip():
    t0 = time.time()
    v = v_shape(0.5)
    plan = settle_plan(v)
    rule2, opt2, _ = optimal_rule(plan.collection)
    assert opt2 == pytest.approx(plan.eps, abs=1e-6)
    pts = [0.0, 0.5, 1.0] + [float(p.coords[0]) for p, _ in plan.designated]
    dev_plan = max(abs(rule2.value(x) - v.value(x)) for x in pts)
    assert dev_plan <= 1e-4

    q = QuadraticRule(2)
    coll = settle_on_region(q, 0.1)
    rule3, opt3, _ = optimal_rule(coll)
    dev_region = max(abs(rule3.value(pt.coords) - q.value(pt.coords))
                     for pt in region_points(q, 0.1))
    assert dev_region <= 1e-3

    w = quadratic_unsettled_witness(0.5)
    rng = np.random.default_rng(77)
    checked = 0
    while checked < 100:
        k = int(rng.integers(2, 5))
        xs = rng.uniform(0, 1, k)
        pr = rng.dirichlet(np.ones(k))
        s = InfoStructure([(SimplexPoint.from_scalar(float(x)), float(p))
                           for x, p in zip(xs, pr)])
        jq = J(q, s)
        if float(s.mean.coords[0]) >= w.cut or jq >= 0.5:
            assert J(w, s) >= jq - 1e-10
            checked += 1
    report(7, f"plan dev {dev_plan:.2e}, region dev {dev_region:.2e}, "
              f"witness dominance on {checked} structures",
           time.time() - t0, 120.0)


def test_criterion_8_property_suites(tmp_path):
    t0 = time.time()
    rng = np.random.default_rng(808)

    # Jensen nonnegativity across rules and random structures
    rules2 = [QuadraticRule(2), SphericalRule(2), LogRule(2), v_shape(0.4)]
    for _ in range(50):
        k = int(rng.integers(2, 5))
        xs = rng.uniform(0.01, 0.99, k)
        pr = rng.dirichlet(np.ones(k))
        s = InfoStructure([(SimplexPoint.from_scalar(float(x)), float(p))
                           for x, p in zip(xs, pr)])
        for rule in rules2:
            assert J(rule, s) >= -1e-10

    # properness and the expected-score identity on an interior grid
    for kind in ("quadratic", "spherical", "log"):
        rule = builtin_rule(kind, 3)
        pts = 0.9 * random_simplex_points(3, 8, rng) + 0.1 / 3
        for x in pts:
            truthful = expected_score(rule, x, x)
            assert truthful == pytest.approx(rule.value(x), abs=1e-12)
            for xh in pts:
                assert truthful >= expected_score(rule, x, xh) - 1e-10

    # analytic Hessians against central differences
    for kind in ("quadratic", "spherical", "log"):
        for d in (2, 3):
            rule = builtin_rule(kind, d)
            for x in 0.7 * random_simplex_points(d, 3, rng) + 0.3 / d:
                f = lambda z: float(rule.values(z[None, :])[0])
                analytic = rule.hessian(x)
                numeric = finite_difference_hessian(f, x, step=1e-5)
                scale_h = max(1.0, np.abs(analytic).max())
                assert np.abs(analytic - numeric).max() / scale_h <= 1e-5

    # scaling inequalities and affine invariance of gains
    q = QuadraticRule(2)
    s = beta_bernoulli(Fraction(2, 5), 3)
    for t in (0.3, 0.6, 0.9):
        assert J(q, s) >= J(q, scale(s, t)) / t - 1e-10

    from test_gain import ShiftedRule
    shifted = ShiftedRule(q, rng.normal(size=2), rng.normal())
    assert J(shifted, s) == pytest.approx(J(q, s), abs=1e-10)

    # deterministic byte-identical CSV output under a fixed seed
    from scoreforge.cli import main
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for path in (a, b):
        assert main(["asymptotic", "quadratic", "--rule", "quadratic",
                     "--d", "2", "--n", "10,100", "--csv", str(path)]) == 0
    assert a.read_bytes() == b.read_bytes()

    report(8, "Jensen, properness, Savage identity, Hessians, scaling, "
              "affine invariance, deterministic CSV", time.time() - t0, 300.0)
