import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from scoreforge import (
    Collection,
    GainReport,
    InfoStructure,
    LogRule,
    QuadraticRule,
    SimplexPoint,
    SphericalRule,
    beta_bernoulli,
    beta_collection_static,
    d_beta,
    d_dir,
    d_dir_trace,
    finite_difference_hessian,
    info_gain,
    objective,
    relative_gain,
    simplex_center,
    strong_convexity_modulus,
    two_point,
    v_shape,
)
from scoreforge.gain import info_gain_extended
from scoreforge.geometry import ConvexRule, PiecewiseLinearConvex, as_coords
from scoreforge.geometry import random_simplex_points


class ShiftedRule(ConvexRule):
    """H plus an affine function; gains must be unchanged."""

    kind = "shifted"

    def __init__(self, base, slope, offset):
        super().__init__(base.d)
        self.base = base
        self.slope = np.asarray(slope, dtype=float)
        self.offset = float(offset)

    def values(self, pts):
        pts = np.asarray(pts)
        return self.base.values(pts) + pts @ self.slope + self.offset


def bin_struct(pairs):
    return InfoStructure([(SimplexPoint.from_scalar(x), p) for x, p in pairs])


def test_info_gain_examples():
    q = QuadraticRule(2)
    coin = bin_struct([(0.0, 0.5), (1.0, 0.5)])
    assert info_gain(q, coin) == pytest.approx(1.0, abs=1e-14)
    single = bin_struct([(0.37, 1.0)])
    assert info_gain(q, single) == pytest.approx(0.0, abs=1e-15)
    v = v_shape(0.5)
    assert info_gain(v, beta_bernoulli(Fraction(1, 2), 0)) == pytest.approx(
        1 / 3, abs=1e-14)


def test_info_gain_monte_carlo_oracle():
    # independent check of E[H(X)] - H(E X) by sampling
    q = QuadraticRule(2)
    s = bin_struct([(0.1, 0.3), (0.6, 0.5), (0.9, 0.2)])
    rng = np.random.default_rng(99)
    draws = rng.choice([0.1, 0.6, 0.9], p=[0.3, 0.5, 0.2], size=400_000)
    est = q.values(np.column_stack([draws, 1 - draws])).mean() \
        - q.value(float(s.mean.coords[0]))
    assert info_gain(q, s) == pytest.approx(est, abs=2e-3)


def test_info_gain_extended_matches():
    s = beta_bernoulli(Fraction(3, 10), 50)
    ln = LogRule(2)
    assert info_gain_extended(ln, s) == pytest.approx(info_gain(ln, s),
                                                      rel=1e-10)


def test_objective_and_argmin():
    coll = beta_collection_static(5)
    rep = objective(LogRule(2), coll)
    assert isinstance(rep, GainReport)
    assert rep.objective == min(g for _, g in rep.gains)
    assert rep.argmin_label in ("beta(theta=1/7,n=5)", "beta(theta=6/7,n=5)")

    rep_q = objective(QuadraticRule(2), coll)
    # gain of the quadratic rule is 4 theta(1-theta)/(N+3)^2, smallest at the
    # extreme lattice points
    assert rep_q.argmin_label in ("beta(theta=1/7,n=5)", "beta(theta=6/7,n=5)")
    want = 4 * (1 / 7) * (6 / 7) / 64
    assert rep_q.objective == pytest.approx(want, rel=1e-12)

    single = Collection([beta_bernoulli(Fraction(1, 2), 0)])
    assert objective(QuadraticRule(2), single).objective == pytest.approx(
        info_gain(QuadraticRule(2), single.structures[0]))


def test_relative_gain():
    q = QuadraticRule(2)
    colls = [beta_collection_static(n) for n in (2, 4)]
    assert relative_gain(q, q, colls) == pytest.approx([1.0, 1.0])
    with pytest.raises(ZeroDivisionError):
        degenerate = Collection([bin_struct([(0.5, 1.0)])])
        relative_gain(q, q, [degenerate])


def test_d_beta_values():
    ln = LogRule(2)
    for x in (0.1, 0.37, 0.5, 0.9):
        assert d_beta(ln, x) == pytest.approx(1 / math.log(2), rel=1e-12)
    q = QuadraticRule(2)
    assert d_beta(q, 0.5) == pytest.approx(2.0, rel=1e-12)
    assert d_beta(q, 1e-9) == pytest.approx(0.0, abs=1e-7)
    with pytest.raises(ValueError):
        d_beta(q, 0.0)


def test_d_dir_values():
    ln3 = LogRule(3)
    rng = np.random.default_rng(2)
    for x in 0.8 * random_simplex_points(3, 6, rng) + 0.2 / 3:
        assert d_dir(ln3, x) == pytest.approx(2 / math.log(3), rel=1e-10)
    # binary consistency with the one-dimensional operator
    q2 = QuadraticRule(2)
    for x in (0.2, 0.5, 0.7):
        assert d_dir(q2, x) == pytest.approx(d_beta(q2, x), rel=1e-12)
    q3 = QuadraticRule(3)
    assert d_dir(q3, simplex_center(3)) == pytest.approx(2.0, rel=1e-12)


def test_d_dir_trace_cross_check():
    rng = np.random.default_rng(8)
    pts = 0.8 * random_simplex_points(3, 10, rng) + 0.2 / 3
    for rule in (QuadraticRule(3), SphericalRule(3), LogRule(3)):
        for x in pts:
            assert d_dir(rule, x) == pytest.approx(d_dir_trace(rule, x),
                                                   abs=1e-10)


@pytest.mark.parametrize("d", [2, 3])
@pytest.mark.parametrize("kind", ["quadratic", "spherical", "log"])
def test_hessians_match_finite_differences(d, kind):
    from scoreforge import builtin_rule
    rule = builtin_rule(kind, d)
    rng = np.random.default_rng(4)
    pts = 0.7 * random_simplex_points(d, 5, rng) + 0.3 / d

    def f(z):
        return float(rule.values(z[None, :])[0])

    for x in pts:
        analytic = rule.hessian(x)
        numeric = finite_difference_hessian(f, x, step=1e-5)
        scale = max(1.0, np.abs(analytic).max())
        assert np.abs(analytic - numeric).max() / scale <= 1e-5


def test_strong_convexity_modulus():
    for d in (2, 3, 5):
        q = QuadraticRule(d)
        grid = random_simplex_points(d, 20, np.random.default_rng(0))
        mod = strong_convexity_modulus(q, grid, seed=1)
        assert mod == pytest.approx(2 * d / (d - 1), abs=1e-12)
    flat = PiecewiseLinearConvex(2, [((0.3, -0.3), 0.5)])
    grid = np.column_stack([np.linspace(0.1, 0.9, 9),
                            1 - np.linspace(0.1, 0.9, 9)])
    assert strong_convexity_modulus(flat, grid) == pytest.approx(0.0, abs=1e-15)
    # spherical is less uniformly curved than quadratic over an interior grid
    mod_s = strong_convexity_modulus(SphericalRule(2), grid, seed=1)
    mod_q = strong_convexity_modulus(QuadraticRule(2), grid, seed=1)
    assert mod_s < mod_q


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(st.floats(0.001, 0.999), st.floats(0.05, 1.0)),
                min_size=1, max_size=5))
def test_jensen_nonnegative_hypothesis(pairs):
    total = sum(w for _, w in pairs)
    s = bin_struct([(x, w / total) for x, w in pairs])
    for rule in (QuadraticRule(2), SphericalRule(2), LogRule(2), v_shape(0.4)):
        assert info_gain(rule, s) >= -1e-10


def test_affine_invariance():
    rng = np.random.default_rng(12)
    s = bin_struct([(0.2, 0.25), (0.5, 0.5), (0.9, 0.25)])
    for rule in (QuadraticRule(2), LogRule(2)):
        shifted = ShiftedRule(rule, rng.normal(size=2), rng.normal())
        assert info_gain(shifted, s) == pytest.approx(info_gain(rule, s),
                                                      abs=1e-10)


def test_quadratic_gain_equals_trace_of_covariance():
    rng = np.random.default_rng(3)
    for d in (2, 3):
        q = QuadraticRule(d)
        pts = random_simplex_points(d, 4, rng)
        probs = rng.dirichlet(np.ones(4))
        s = InfoStructure([(SimplexPoint(p), float(w))
                           for p, w in zip(pts, probs)])
        want = d / (d - 1) * np.trace(s.covariance())
        assert info_gain(q, s) == pytest.approx(want, abs=1e-12)


def test_gain_report_csv(tmp_path):
    from scoreforge.serialize import write_csv
    rep = objective(QuadraticRule(2), beta_collection_static(2))
    path = tmp_path / "gains.csv"
    write_csv(path, ["label", "J"], rep.rows())
    raw = path.read_bytes()
    assert raw.startswith(b"label,J\n")
    assert b"\r" not in raw
    assert len(raw.decode().strip().split("\n")) == 1 + len(rep.gains)
