import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad

from fuzzyerm.fuzzy_sets import CrispLabel, FuzzyLabel, Interval, Precise, Trapezoid, alpha_cut
from fuzzyerm.losses import (
    LossSpec,
    base_loss,
    closed_form_fuzzy_l1,
    closed_form_fuzzy_l2,
    fuzzy_datum_margin_loss,
    fuzzy_label_loss,
    fuzzy_loss,
    fuzzy_margin_kernel,
    fuzzy_margin_loss,
    fuzzy_real_kernel,
    level_grid,
    margin_df,
    margin_f,
    margin_loss,
    quadrature_error_bound,
    quadrature_levels,
    ramp_integral,
    set_loss,
    set_loss_xy,
    shifted_margin_loss,
)
from fuzzyerm.models import LinearModel

from helpers import finite, trapezoids

MARGINS = ("hinge", "exponential", "logistic")


def level_integral(kind, Y, yhat):
    """Adaptive quadrature of the per-cut set loss; independent of the closed forms."""
    def integrand(alpha):
        return set_loss(kind, alpha_cut(Y, max(alpha, 1e-300)), yhat)[0]
    value, _ = quad(integrand, 0.0, 1.0, limit=200, epsabs=1e-12, epsrel=1e-12,
                    points=[0.5])
    return value


def huber(y, delta, yhat):
    r = abs(y - yhat)
    return r * r / (2 * delta) if r <= delta else r - delta / 2


# -- base and margin losses ---------------------------------------------------

def test_base_loss_examples():
    assert base_loss("l1", 5.5, 5.5) == 0.0
    assert base_loss("l1", 5.5, 3) == 2.5
    assert base_loss("l2", 1.0, 3.0) == 4.0
    assert base_loss("zero-one", "+1", -1) == 1.0
    assert base_loss("0/1", 1, "+1") == 0.0
    with pytest.raises(ValueError):
        base_loss("hinge", 1, 1)


def test_margin_loss_examples():
    assert margin_loss("hinge", 1, 1.0) == 0.0
    assert margin_loss("logistic", "+1", 0.0) == pytest.approx(math.log(2), abs=1e-15)
    assert margin_loss("exponential", -1, 1.0) == pytest.approx(math.e, rel=1e-15)
    with pytest.raises(ValueError):
        margin_loss("hinge", 0, 1.0)


def test_logistic_is_stable_in_the_tails():
    t = np.array([-800.0, -40.0, 0.0, 40.0, 800.0])
    f = margin_f("logistic", t)
    assert np.all(np.isfinite(f))
    assert f[0] == 800.0 and f[-1] == 0.0
    assert f[3] == pytest.approx(math.exp(-40), rel=1e-12)
    g = margin_df("logistic", t)
    assert g[0] == -1.0 and g[2] == -0.5 and g[-1] == 0.0


@pytest.mark.parametrize("kind", MARGINS)
def test_margin_losses_nonincreasing_and_nonnegative(kind):
    t = np.linspace(-5, 5, 1001)
    f = margin_f(kind, t)
    assert np.all(f >= 0)
    assert np.all(np.diff(f) <= 1e-15)


@pytest.mark.parametrize("kind", ("exponential", "logistic"))
def test_margin_derivative_matches_finite_differences(kind):
    t = np.linspace(-4, 4, 81)
    h = 1e-6
    fd = (margin_f(kind, t + h) - margin_f(kind, t - h)) / (2 * h)
    np.testing.assert_allclose(margin_df(kind, t), fd, rtol=1e-6, atol=1e-9)


# -- set losses ---------------------------------------------------------------

def test_set_loss_examples():
    assert set_loss("l1", Interval(3, 7), 5) == (0.0, 5)
    assert set_loss("l1", Interval(3, 7), 8) == (1.0, 7)
    assert set_loss("l2", Interval(3, 7), 1) == (4.0, 3)
    assert set_loss("zero-one", {1, -1}, 1)[0] == 0.0
    assert set_loss("zero-one", {-1}, "+1")[0] == 1.0
    assert set_loss("logistic", {1, -1}, -2.0) == (pytest.approx(math.log1p(math.exp(-2))), -1)


def test_set_loss_rejects_empty_or_mismatched():
    with pytest.raises(ValueError):
        set_loss("zero-one", set(), 1)
    with pytest.raises(TypeError):
        set_loss("l1", {1, -1}, 0.5)


@given(st.floats(-20, 20), st.floats(0, 10), st.floats(-30, 30), st.sampled_from(["l1", "l2"]))
def test_set_loss_minimizer_is_the_clamp(lo, width, yhat, kind):
    Y = Interval(lo, lo + width)
    loss, y_star = set_loss(kind, Y, yhat)
    assert y_star in Y
    assert y_star == Y.clamp(yhat)
    grid = np.linspace(Y.lo, Y.hi, 201)
    assert loss <= min(base_loss(kind, g, yhat) for g in grid) + 1e-12


def _box_brute_force(kind, model, box, Y, m=201):
    axes = [np.linspace(iv.lo, iv.hi, m) for iv in box]
    best = math.inf
    for x in itertools.product(*axes):
        s = model(np.array(x))
        if isinstance(Y, Interval):
            best = min(best, min(base_loss(kind, y, s) for y in np.linspace(Y.lo, Y.hi, m)))
        else:
            best = min(best, min(margin_loss(kind, y, s) for y in Y))
    return best


def test_set_loss_xy_box_example():
    model = LinearModel((1.0,), 0.0)
    assert set_loss_xy("l1", model, [Interval(0, 1)], Interval(3, 7)) == 2.0
    assert _box_brute_force("l1", model, [Interval(0, 1)], Interval(3, 7)) == pytest.approx(2.0)


def test_set_loss_xy_reduces_to_set_loss_on_points():
    model = LinearModel((2.0, -1.0), 0.5)
    x = (1.0, 0.25)
    Y = Interval(3, 7)
    assert set_loss_xy("l2", model, [Interval(v, v) for v in x], Y) == set_loss("l2", Y, model(x))[0]


def test_shifted_margin_examples():
    assert shifted_margin_loss("logistic", 1, 0.0, 0.0) == margin_loss("logistic", 1, 0.0)
    assert shifted_margin_loss("logistic", 1, 0.0, 1.0) == pytest.approx(0.31326168751822283, abs=1e-15)
    assert shifted_margin_loss("hinge", -1, 0.5, 1.0) == pytest.approx(0.5)
    with pytest.raises(ValueError):
        shifted_margin_loss("hinge", 1, 0.0, -1.0)


def test_shifted_margin_matches_box_brute_force():
    # s = 0.5 with radius 1 over the box [0, 1] x [-0.5, 0.5] for w = (1, 1), b = 0
    model = LinearModel((1.0, 1.0), 0.0)
    box = [Interval(0, 1), Interval(-0.5, 0.5)]
    rng = model.score_interval(box)
    assert (rng.mid, rng.rad) == (0.5, 1.0)
    via_xy = set_loss_xy("hinge", model, box, {-1})
    assert via_xy == pytest.approx(shifted_margin_loss("hinge", -1, 0.5, 1.0))
    assert via_xy == pytest.approx(_box_brute_force("hinge", model, box, {-1}, m=41))


@given(st.sampled_from(MARGINS), st.sampled_from([1, -1]), st.floats(-5, 5), st.floats(0, 3))
def test_margin_set_loss_xy_is_shifted_margin(kind, y, s, d):
    model = LinearModel((1.0,), 0.0)
    loss = set_loss_xy(kind, model, [Interval(s - d, s + d)], {y})
    assert loss == pytest.approx(shifted_margin_loss(kind, y, s, d), rel=1e-12, abs=1e-12)


# -- fuzzy real losses ------------------------------------------------------------

def test_fuzzy_loss_examples():
    Y = Trapezoid(2, 4, 6, 8)
    assert fuzzy_loss("l1", Y, 5) == 0.0
    assert fuzzy_loss("l1", Y, 7) == pytest.approx(0.25, abs=1e-15)
    assert level_integral("l1", Y, 7) == pytest.approx(0.25, abs=1e-10)
    tri = Trapezoid.triangular(3, 5, 7)
    assert fuzzy_loss("l1", tri, 9) == pytest.approx(3.0, abs=1e-15)
    assert level_integral("l1", tri, 9) == pytest.approx(3.0, abs=1e-10)


def test_closed_form_examples():
    assert closed_form_fuzzy_l1(Trapezoid(3, 5, 5, 7), 6) == pytest.approx(0.25, abs=1e-15)
    assert closed_form_fuzzy_l1(Interval(3, 7), 8) == 1.0
    assert closed_form_fuzzy_l1(Trapezoid(1, 3, 7, 9), 8) == pytest.approx(0.25, abs=1e-15)
    assert closed_form_fuzzy_l1(Precise(2.0), 5.0) == 3.0
    assert closed_form_fuzzy_l2(Precise(2.0), 5.0) == 9.0


def test_fuzzy_loss_rejects_labels():
    with pytest.raises(TypeError):
        fuzzy_loss("l1", CrispLabel(1), 0.5)
    with pytest.raises(ValueError):
        fuzzy_loss("hinge", Interval(0, 1), 0.5)


@given(st.floats(-20, 20), st.floats(1e-3, 10), st.floats(-40, 40))
def test_triangular_l1_is_huber(y, delta, yhat):
    tri = Trapezoid.triangular(y - delta, y, y + delta)
    assert fuzzy_loss("l1", tri, yhat) == pytest.approx(huber(y, delta, yhat), rel=1e-9, abs=1e-9)


@given(st.floats(-20, 20), st.floats(0, 10), st.floats(-40, 40))
def test_interval_l1_is_epsilon_insensitive(y, eps, yhat):
    Y = Interval(y - eps, y + eps)
    loss = fuzzy_loss("l1", Y, yhat)
    assert loss == max(Y.lo - yhat, yhat - Y.hi, 0.0)
    assert loss == pytest.approx(max(abs(y - yhat) - eps, 0.0), abs=1e-12)


@given(trapezoids(), st.floats(-30, 30), st.sampled_from(["l1", "l2"]))
def test_closed_form_matches_adaptive_quadrature(Y, yhat, kind):
    exact = fuzzy_loss(kind, Y, yhat)
    oracle = level_integral(kind, Y, yhat)
    assert exact == pytest.approx(oracle, rel=1e-8, abs=1e-8)


@given(trapezoids(), st.floats(-30, 30), st.sampled_from(["l1", "l2"]))
def test_midpoint_rule_respects_its_error_bound(Y, yhat, kind):
    exact = fuzzy_loss(kind, Y, yhat)
    for K in (11, 101):
        approx = fuzzy_loss(kind, Y, yhat, levels=K, method="quadrature")
        assert abs(approx - exact) <= quadrature_error_bound(kind, Y, K) * (1 + 1e-9) + 1e-12


@given(trapezoids(), st.floats(-30, 30))
def test_bound_driven_level_count_meets_tolerance(Y, yhat):
    K = quadrature_levels("l1", Y, 1e-6)
    approx = fuzzy_loss("l1", Y, yhat, levels=K, method="quadrature")
    assert abs(approx - closed_form_fuzzy_l1(Y, yhat)) <= 1e-6


def test_default_grid_is_not_enough_for_wide_l1_flanks():
    # the kink of the integrand sits on the midpoint alpha = 0.5 of a grid
    # cell, the worst case for the midpoint rule
    Y = Trapezoid(-20, 20, 20, 20)
    err = abs(fuzzy_loss("l1", Y, 0.0, levels=101, method="quadrature") - closed_form_fuzzy_l1(Y, 0.0))
    assert err == pytest.approx(quadrature_error_bound("l1", Y, 101), rel=1e-9)
    assert err > 1e-6


@given(trapezoids(), st.floats(-30, 30), st.sampled_from(["l1", "l2"]))
def test_zero_exactly_on_the_core(Y, yhat, kind):
    loss = fuzzy_loss(kind, Y, yhat)
    assert loss >= 0.0
    off = max(Y.b - yhat, yhat - Y.c)
    if off <= 0:
        assert loss == 0.0
    else:
        # both level integrals are quadratic in the offset near the core,
        # so offsets below ~1e-154 give a true loss under the smallest double
        assert loss > 0.0 or off < 1e-154


def test_degenerate_trapezoid_behaves_like_precise():
    for yhat in (-1.0, 2.0, 7.5):
        assert fuzzy_loss("l2", Trapezoid(2, 2, 2, 2), yhat) == fuzzy_loss("l2", Precise(2.0), yhat)
        assert fuzzy_loss("l1", Trapezoid(2, 2, 2, 2), yhat) == base_loss("l1", 2.0, yhat)


@pytest.mark.parametrize("kind", ["l1", "l2"])
def test_real_kernel_derivatives(kind, rng):
    for _ in range(200):
        a, b, c, d = np.sort(rng.uniform(-5, 5, 4))
        u = rng.uniform(-8, 8)
        v = u + rng.uniform(0, 2)
        _, gu, gv = fuzzy_real_kernel(kind, a, b, c, d, u, v)
        h = 1e-6
        fu = (fuzzy_real_kernel(kind, a, b, c, d, u + h, v)[0]
              - fuzzy_real_kernel(kind, a, b, c, d, u - h, v)[0]) / (2 * h)
        fv = (fuzzy_real_kernel(kind, a, b, c, d, u, v + h)[0]
              - fuzzy_real_kernel(kind, a, b, c, d, u, v - h)[0]) / (2 * h)
        assert gu == pytest.approx(fu, abs=1e-5)
        assert gv == pytest.approx(fv, abs=1e-5)


def test_ramp_integral_cases():
    # flank 0 -> 2 with prediction at -1: mean of the distances 1 and 3
    assert ramp_integral("l1", 0.0, 2.0, -1.0)[0] == pytest.approx(2.0)
    assert ramp_integral("l1", 0.0, 2.0, 3.0)[0] == 0.0
    assert ramp_integral("l1", 0.0, 2.0, 1.0)[0] == pytest.approx(0.25)
    assert ramp_integral("l2", 0.0, 2.0, -1.0)[0] == pytest.approx((1 + 3 + 9) / 3)


# -- label losses -----------------------------------------------------------------

def test_fuzzy_label_loss_examples():
    Y = FuzzyLabel.discounted(1, 0.4)
    assert fuzzy_label_loss(Y, 1) == 0.0
    assert fuzzy_label_loss(Y, -1) == pytest.approx(0.4)
    assert fuzzy_label_loss(FuzzyLabel.unknown(), -1) == 0.0
    assert fuzzy_label_loss(CrispLabel(-1), 1) == 1.0


def test_fuzzy_margin_examples():
    assert fuzzy_margin_loss("hinge", 0.5, 1, -1.0) == pytest.approx(1.0)
    assert fuzzy_margin_loss("logistic", 0.0, 1, 2.0) == fuzzy_margin_loss("logistic", 0.0, 1, -2.0)
    with pytest.raises(ValueError):
        fuzzy_margin_loss("hinge", 1.5, 1, 0.0)


@given(st.sampled_from(MARGINS), st.sampled_from([1, -1]), st.floats(-10, 10))
def test_full_confidence_is_the_base_loss(kind, y, s):
    assert fuzzy_margin_loss(kind, 1.0, y, s) == margin_loss(kind, y, s)


@given(st.sampled_from(MARGINS), st.floats(0, 1), st.sampled_from([1, -1]), st.floats(0, 10))
def test_discounting_only_touches_the_negative_part(kind, w, y, t):
    s = y * t
    assert fuzzy_margin_loss(kind, w, y, s) == pytest.approx(margin_loss(kind, y, s), rel=1e-14)


@given(st.sampled_from(MARGINS), st.floats(0, 1), st.floats(0, 1), st.sampled_from([1, -1]),
       st.floats(-10, 10))
def test_monotone_in_confidence(kind, w1, w2, y, s):
    lo, hi = sorted((w1, w2))
    assert fuzzy_margin_loss(kind, lo, y, s) <= fuzzy_margin_loss(kind, hi, y, s) + 1e-12


@pytest.mark.parametrize("kind", ("exponential", "logistic"))
def test_no_information_loss_peaks_on_the_boundary(kind):
    s = np.linspace(-4, 4, 801)
    f0 = np.array([fuzzy_margin_loss(kind, 0.0, 1, v) for v in s])
    top = int(np.argmax(f0))
    assert s[top] == pytest.approx(0.0, abs=1e-12)
    assert np.all(f0[:top] < f0[top]) and np.all(f0[top + 1:] < f0[top])
    # non-convex: the midpoint of two points lies above their chord
    a, b = fuzzy_margin_loss(kind, 0.0, 1, -1.0), fuzzy_margin_loss(kind, 0.0, 1, 1.0)
    assert fuzzy_margin_loss(kind, 0.0, 1, 0.0) > 0.5 * (a + b)


def test_datum_margin_loss_reads_confidence_from_the_label():
    Y = FuzzyLabel({-1: 1.0, 1: 0.3})
    assert fuzzy_datum_margin_loss("logistic", Y, 0.8) == pytest.approx(
        fuzzy_margin_loss("logistic", 0.7, -1, 0.8), rel=1e-15)
    assert fuzzy_datum_margin_loss("hinge", CrispLabel(1), 0.2, 0.3) == pytest.approx(
        shifted_margin_loss("hinge", 1, 0.2, 0.3))


@pytest.mark.parametrize("kind", MARGINS)
def test_margin_kernel_equals_per_level_integral(kind, rng):
    # level integral of the per-cut set loss against the closed kernel
    alphas = level_grid(20000)
    for _ in range(20):
        y = rng.choice([-1.0, 1.0])
        w, s, d = rng.random(), rng.normal(), rng.random()
        both = alphas <= 1 - w
        per_level = np.where(both, margin_f(kind, abs(s) + d), margin_f(kind, y * s + d))
        loss, _, _ = fuzzy_margin_kernel(kind, y, w, s, d)
        assert loss == pytest.approx(per_level.mean(), abs=1e-4)


def test_loss_spec_parsing():
    assert LossSpec.parse("L1") == LossSpec("l1")
    assert LossSpec.parse("gmli-interval") == LossSpec("l2", "gmli")
    assert LossSpec.parse("gmli-logistic") == LossSpec("logistic", "gmli")
    assert str(LossSpec.parse("gmli")) == "gmli-interval"
    assert not LossSpec.parse("0/1").differentiable
    with pytest.raises(ValueError):
        LossSpec("hinge", "gmli")
    with pytest.raises(ValueError):
        LossSpec.parse("cubic")
    with pytest.raises(ValueError):
        LossSpec("l1").check_kind("label")


@given(trapezoids(), finite, st.sampled_from(["l1", "l2"]))
def test_scalar_path_matches_the_vectorized_kernel(T, yhat, kind):
    vec, _, _ = fuzzy_real_kernel(kind, T.a, T.b, T.c, T.d, yhat, yhat)
    assert fuzzy_loss(kind, T, yhat) == pytest.approx(float(vec), rel=1e-12, abs=1e-12)
