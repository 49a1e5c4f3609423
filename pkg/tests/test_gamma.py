import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fraclap.errors import DomainError, PoleError
from fraclap.gamma import (
    SignedLog,
    admissible,
    dimrest_ratio,
    extension_constant,
    ft_homogeneous_constant,
    gamma_value,
    lambda_factor,
    lambda_factor_printed,
    pv_normalization,
    scattering_prefactor,
    sign_walk,
    sign_walk_poles,
    signed_log_gamma,
)

# keep 1e-6 away from the poles 0, -1, -2, ... (approached from either side)
off_pole = st.floats(-10, 10, allow_nan=False).filter(lambda x: round(x) > 0 or abs(x - round(x)) > 1e-6)


# -- signed log-Gamma ---------------------------------------------------------

def test_examples():
    g = signed_log_gamma(1.0)
    assert (g.log_abs, g.sign) == (pytest.approx(0, abs=1e-15), 1)
    g = signed_log_gamma(0.5)
    assert g.sign == 1 and g.log_abs == pytest.approx(math.log(math.sqrt(math.pi)), abs=1e-14)
    g = signed_log_gamma(-0.5)
    assert g.sign == -1 and g.log_abs == pytest.approx(math.log(2 * math.sqrt(math.pi)), abs=1e-14)


@pytest.mark.parametrize("x", [0.0, -1.0, -2.0, -7.0])
def test_poles_are_flagged(x):
    g = signed_log_gamma(x)
    assert g.is_pole
    assert math.isnan(g.value) or math.isinf(g.value)


@settings(max_examples=200, deadline=None)
@given(off_pole)
def test_against_mpmath(x):
    ref = mpmath.gamma(mpmath.mpf(x))
    g = signed_log_gamma(x)
    assert g.sign == (1 if ref > 0 else -1)
    assert g.log_abs == pytest.approx(float(mpmath.log(abs(ref))), abs=5e-14 * max(1.0, abs(float(mpmath.log(abs(ref))))))


@settings(max_examples=200, deadline=None)
@given(off_pole)
def test_recursion(x):
    lhs = signed_log_gamma(x + 1)
    rhs = SignedLog.of(x) * signed_log_gamma(x)
    assert lhs.sign == rhs.sign
    assert lhs.log_abs == pytest.approx(rhs.log_abs, abs=1e-12)


def test_large_argument_does_not_overflow():
    g = signed_log_gamma(400.5)
    assert g.sign == 1 and g.log_abs == pytest.approx(float(mpmath.loggamma(400.5)), rel=1e-14)
    assert gamma_value(5.0) == pytest.approx(24.0, rel=1e-14)


# -- Fourier constant ------------------------------------------------------------

@pytest.mark.parametrize("N", range(1, 7))
def test_self_dual_point_is_one(N):
    for v in ("printed", "cycles"):
        assert ft_homogeneous_constant(N, N / 2, v) == pytest.approx(1.0, rel=1e-14)


def test_discriminating_point():
    expected = math.pi ** -0.5 * math.gamma(0.25) / math.gamma(0.75)
    assert ft_homogeneous_constant(2, 0.5, "printed") == pytest.approx(expected, rel=1e-14)
    assert ft_homogeneous_constant(2, 0.5, "cycles") == pytest.approx(expected * math.pi, rel=1e-14)


def test_duality_grid():
    for N in range(1, 7):
        for a in np.linspace(0.01, N - 0.01, 37):
            for v in ("printed", "cycles"):
                assert ft_homogeneous_constant(N, a, v) * ft_homogeneous_constant(N, N - a, v) == pytest.approx(1, abs=1e-12)


def test_angular_variant_duality():
    # with exp(-i z.zeta) the dual product is (2 pi)^N
    for N in (1, 2, 3):
        a = 0.37 * N
        prod = ft_homogeneous_constant(N, a, "angular") * ft_homogeneous_constant(N, N - a, "angular")
        assert prod == pytest.approx((2 * math.pi) ** N, rel=1e-13)


def test_ft_constant_domain():
    with pytest.raises(DomainError):
        ft_homogeneous_constant(2, 2.0)
    with pytest.raises(DomainError):
        ft_homogeneous_constant(2, 1.0, "other")


# -- lambda and admissibility ----------------------------------------------------

def test_lambda_examples():
    assert lambda_factor_printed(4, 0, 1.0).value == pytest.approx(1 / (64 * math.pi**2), rel=1e-13)
    assert lambda_factor_printed(4, 0, 1.0).value == pytest.approx(
        2**-4 * math.pi**-2 * (math.gamma(1.5) / math.gamma(0.5)) ** 2, rel=1e-13)
    # -Lap |y|^(-1) = |y|^(-3) in R^4
    assert lambda_factor(4, 0, 1.0).value == pytest.approx(1.0, rel=1e-13)
    assert lambda_factor(3, 1, 1.0).sign == -1
    assert lambda_factor(2, 1, 0.5).value == pytest.approx(-0.5, rel=1e-13)


@pytest.mark.parametrize("n", [3, 4, 7, 10])
def test_lambda_small_gamma_limit(n):
    lam = lambda_factor(n, 0, 1e-9)
    assert lam.sign == 1 and lam.value == pytest.approx(1.0, abs=1e-7)


def test_lambda_against_mpmath():
    for n, k, g in [(5, 2, 0.7), (6, 4, 1.3), (9, 3, 4.1), (3, 2, 0.2)]:
        G = mpmath.gamma
        ref = 2 ** (2 * g) * G((n / 2 - k + g) / 2) * G((n / 2 + g) / 2) / (G((n / 2 - g) / 2) * G((n / 2 - k - g) / 2))
        assert lambda_factor(n, k, g).value == pytest.approx(float(ref), rel=1e-12)


def test_admissible_examples():
    r = admissible(4, 0, 1.0)
    assert r.dimrest_holds and r.simple_bound_holds and r.ratio_sign == 1
    r = admissible(3, 1, 1.0)
    assert not r.dimrest_holds and not r.simple_bound_holds and r.ratio_sign == -1


def test_gamma_one_equivalence():
    for n in range(3, 13):
        for k in range(n):
            r = admissible(n, k, 1.0)
            assert r.dimrest_holds == r.simple_bound_holds == (k < (n - 2) / 2)


def test_full_scan_sign_coherence_and_implication():
    for n in range(3, 11):
        for k in range(n):
            for g in np.linspace(0, n / 2, 41)[1:-1] + 1e-3:
                if g >= n / 2:
                    continue
                r = admissible(n, k, g)
                lam = lambda_factor(n, k, g)
                if r.ratio_sign is not None and not lam.is_pole:
                    assert lam.sign == r.ratio_sign
                if r.simple_bound_holds:
                    assert r.dimrest_holds


def test_pole_reported_in_band():
    # A - gamma/2 = 0 at (n=6, k=2, gamma=1)
    r = admissible(6, 2, 1.0)
    assert r.ratio_sign is None and not r.dimrest_holds
    assert dimrest_ratio(6, 2, 1.0).is_pole
    assert r.as_dict()["lambda"] is None or math.isfinite(r.as_dict()["lambda"])


def test_admissible_domain():
    with pytest.raises(DomainError):
        admissible(3, 3, 0.5)
    with pytest.raises(DomainError):
        admissible(3, 0, 1.5)


# -- sign walk -------------------------------------------------------------------

def test_sign_walk_single_flip():
    grid = np.linspace(0.05, 2.95, 59)
    walk = sign_walk(6, 2, grid)
    signs = [s for _, s in walk]
    assert signs[0] == 1
    assert all(s == 1 for g, s in walk if g < 1 - 1e-9)
    assert [s for g, s in walk if abs(g - 1) < 1e-9] == [None]  # the grid lands on the pole
    assert all(s == -1 for g, s in walk if g > 1 + 1e-9)
    assert sign_walk_poles(6, 2) == {"denominator": [1.0], "numerator": []}


def test_sign_walk_positive_near_zero():
    for n in range(3, 10):
        for k in range(n):
            if n / 4 - k / 2 > 0:
                assert sign_walk(n, k, [1e-6])[0][1] == 1


def test_sign_walk_rejects_bad_grid():
    with pytest.raises(DomainError):
        sign_walk(4, 0, [0.5, 0.4])
    with pytest.raises(DomainError):
        sign_walk(4, 0, [2.0])


# -- other prefactors ------------------------------------------------------------

def test_scattering_prefactor():
    assert scattering_prefactor(0.5) == pytest.approx(-1.0, rel=1e-14)
    assert scattering_prefactor(1.5) == pytest.approx(8 * math.gamma(1.5) / math.gamma(-1.5), rel=1e-13)
    assert scattering_prefactor(1.5) > 0
    assert abs(scattering_prefactor(1 - 1e-9)) < 1e-7
    with pytest.raises(PoleError):
        scattering_prefactor(1.0)


def test_pv_normalization_one_dimension_half():
    # 1-D, gamma = 1/2: kernel constant 1/pi
    assert pv_normalization(1, 0.5) == pytest.approx(1 / math.pi, rel=1e-14)


def test_extension_constant():
    assert extension_constant(0.5) == pytest.approx(-1.0, rel=1e-14)
    for g in (0.1, 0.4, 0.9):
        assert 1 / extension_constant(g) == pytest.approx(scattering_prefactor(g) / (2 * g), rel=1e-12)
