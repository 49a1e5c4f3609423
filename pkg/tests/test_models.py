import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fraclap.errors import DomainError
from fraclap.fitting import fit_power_law
from fraclap.errors import FitError
from fraclap.gamma import admissible, lambda_factor
from fraclap.grid import FracParams
from fraclap.models import (
    BubbleParams,
    GridSpec,
    SingularModel,
    bubble_residual,
    completeness_probe,
    eval_bubble,
    eval_singular_model,
    growth_diagnostic,
    mollified_profile,
    output_exponent_exceeds_codimension,
    verify_homogeneous_action,
)


# -- singular model --------------------------------------------------------------

def test_singular_model_examples():
    m = SingularModel(3, 1, 0.5)
    assert eval_singular_model([7.0, 1.0, 0.0], m) == 1.0
    assert eval_singular_model([0.0, 4.0], SingularModel(2, 0, 0.5)) == pytest.approx(0.5)
    assert eval_singular_model([0.0, 0.0, 4.0], SingularModel(3, 1, 0.5)) == pytest.approx(4 ** -1.0)
    with pytest.raises(DomainError):
        eval_singular_model([1.0, 0.0, 0.0], m)


def test_homogeneity_is_exact():
    m = SingularModel(4, 1, 0.75, amplitude=2.0)
    y = np.array([0.3, 1.25, -0.5, 2.0])
    eps = np.finfo(float).eps
    for s in (2.0, 4.0, 0.5, 3.0):
        # identical up to the rounding of one pow call
        lhs, rhs = eval_singular_model(s * y, m), eval_singular_model(y, m) * s**m.exponent
        assert abs(lhs - rhs) <= 2 * eps * abs(rhs)


def test_mollified_profile_is_model_outside_radius():
    m = SingularModel(2, 0, 0.5)
    r = np.linspace(0.01, 1, 200)
    prof = mollified_profile(r, m, 0.1)
    outside = r >= 0.1
    assert np.allclose(prof[outside], r[outside] ** m.exponent, rtol=1e-12)
    assert np.all(np.isfinite(prof))


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 12), st.data())
def test_extension_threshold_predicate(n, data):
    k = data.draw(st.integers(0, n - 1))
    g = data.draw(st.floats(0.01, n / 2 - 0.01))
    assert output_exponent_exceeds_codimension(n, k, g) == (k < n / 2 - g)


@pytest.mark.parametrize("n,k,g", [(1, 0, 0.25), (2, 0, 0.5), (2, 1, 0.5), (3, 1, 0.4)])
def test_homogeneous_action(n, k, g):
    fit = verify_homogeneous_action(SingularModel(n, k, g))
    assert fit.exponent_rel_error <= 0.02
    assert fit.prefactor_rel_error <= 0.05
    assert fit.lambda_predicted == pytest.approx(lambda_factor(n, k, g).value)
    assert np.sign(fit.fitted_prefactor) == admissible(n, k, g).ratio_sign
    assert abs(fit.half_window_exponent / fit.fitted_exponent - 1) < 5e-3


def test_negative_case():
    fit = verify_homogeneous_action(SingularModel(2, 1, 0.5))
    assert fit.lambda_predicted < 0 and fit.fitted_prefactor < 0


# -- bubbles -------------------------------------------------------------------------

def test_bubble_pointwise():
    p = BubbleParams(3, 0.5, mu=1.0)
    assert eval_bubble(np.zeros(3), p) == pytest.approx(1.0)
    z = np.array([1.0, 0.0, 0.0])
    assert eval_bubble(z, p) == pytest.approx((1 / 2) ** ((3 - 1) / 2))
    p2 = BubbleParams(2, 0.25, mu=1.5, amplitude=2.0)
    assert eval_bubble(np.array([0.0, 1.5]), p2) == pytest.approx(2.0 * (1 / 3.0) ** ((2 - 0.5) / 2))


def test_bubble_far_field_slope():
    p = BubbleParams(2, 0.5, mu=1.0)
    r = np.geomspace(1e3, 1e5, 20)
    v = np.array([eval_bubble(np.array([x, 0.0]), p) for x in r])
    fit = fit_power_law(r, v)
    assert fit.exponent == pytest.approx(-(2 - 1.0), rel=1e-2)


@pytest.mark.parametrize("n,g", [(2, 0.5), (2, 0.75), (3, 0.5)])
def test_bubble_residual(n, g):
    res = bubble_residual(BubbleParams(n, g))
    assert res.residual_norm <= 0.02
    # classical closed form used only as a cross-check of the measured constant
    classical = 2 ** (2 * g) * math.gamma((n + 2 * g) / 2) / math.gamma((n - 2 * g) / 2)
    assert res.lambda_estimate == pytest.approx(classical, rel=1e-2)


def test_bubble_invariances():
    grid = GridSpec(1024, 128.0)
    base = bubble_residual(BubbleParams(2, 0.5), grid)
    moved = bubble_residual(BubbleParams(2, 0.5, center=(64.0, 64.0)), grid, origin=(-64.0, -64.0))
    assert moved.lambda_estimate == pytest.approx(base.lambda_estimate, rel=1e-6)
    scaled = bubble_residual(BubbleParams(2, 0.5, mu=0.5), GridSpec(1024, 64.0))
    assert scaled.lambda_estimate == pytest.approx(base.lambda_estimate, rel=1e-3)


def test_bubble_degenerate_and_guards():
    with pytest.raises(DomainError, match="n = 2 gamma"):
        bubble_residual(BubbleParams(1, 0.5))
    with pytest.raises(DomainError):
        bubble_residual(BubbleParams(2, 0.5), GridSpec(64, 4.0))
    with pytest.raises(DomainError):
        bubble_residual(BubbleParams(2, 0.5), GridSpec(64, 64.0))


# -- growth and completeness -----------------------------------------------------------

def test_growth_exact_model():
    params = FracParams(3, 0.5)
    rng = np.random.default_rng(0)
    pts = rng.uniform(-3, 3, size=(300, 3))
    samples = [(p, np.linalg.norm(p) ** -1.0) for p in pts]
    rep = growth_diagnostic(samples, [(0.0, 0.0, 0.0)], params)
    assert rep.sup_constant == pytest.approx(1.0, abs=1e-12)


def test_growth_constant_function():
    params = FracParams(3, 0.5)
    samples = [((0.2, 0.0, 0.0), 1.0), ((0.0, 1.0, 0.0), 1.0), ((0.5, 0.5, 0.0), 1.0)]
    rep = growth_diagnostic(samples, [(0.0, 0.0, 0.0)], params)
    assert rep.sup_constant == pytest.approx(1.0)
    assert rep.witness == (0.0, 1.0, 0.0)


def test_growth_singular_model_plane():
    n, k, g = 3, 1, 0.5
    params = FracParams(n, g)
    m = SingularModel(n, k, g)
    rng = np.random.default_rng(1)
    line_t = np.linspace(-3, 3, 601)
    pts = rng.uniform(-2, 2, size=(200, 3))
    pts[:, 0] = rng.choice(line_t[50:-50], size=200)  # feet of the perpendiculars lie on the sampled line
    samples = [(p, eval_singular_model(p, m)) for p in pts]
    rep = growth_diagnostic(samples, [(t, 0.0, 0.0) for t in line_t], params)
    assert rep.sup_constant == pytest.approx(1.0, abs=1e-12)


def test_growth_monotone():
    params = FracParams(2, 0.5)
    rng = np.random.default_rng(2)
    pts = rng.uniform(-1, 1, size=(100, 2))
    vals = rng.uniform(0, 2, size=100)
    samples = list(zip(pts, vals))
    prev = -math.inf
    for m in range(10, 101, 10):
        cur = growth_diagnostic(samples[:m], [(0.0, 0.0)], params).sup_constant
        assert cur >= prev
        prev = cur


def test_completeness_examples():
    params = FracParams(3, 0.5)
    e = (3 - 1.0) / 2
    s = np.geomspace(1.0, 1e-6, 40)
    assert completeness_probe([(x, x**-e) for x in s], params).divergent
    assert not completeness_probe([(x, 1.0) for x in s], params).divergent
    assert completeness_probe([(x, x ** (-2 * e)) for x in s], params).tail_exponent == pytest.approx(-2.0)


def test_completeness_guards():
    params = FracParams(3, 0.5)
    with pytest.raises(DomainError):
        completeness_probe([(1.0, 1.0)] * 3, params)
    with pytest.raises(DomainError):
        completeness_probe([(float(x), 1.0) for x in range(1, 11)], params)


def test_fit_power_law_errors():
    with pytest.raises(FitError):
        fit_power_law([1, 2, 3], [1, -1, 1])
    with pytest.raises(FitError):
        fit_power_law([1, 2], [1, 2])
    fit = fit_power_law([1, 2, 4], [-3, -12, -48])
    assert fit.exponent == pytest.approx(2) and fit.prefactor == pytest.approx(-3)
