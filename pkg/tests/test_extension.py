import math

import numpy as np
import pytest
from scipy import integrate

from fraclap.errors import DomainError, SolverAccuracyError
from fraclap.extension import (
    MeshSpec,
    apply_via_extension,
    calibrate_dtn,
    flat_extension_potential,
    solve_mode,
    write_profile_csv,
)
from fraclap.gamma import extension_constant, scattering_prefactor
from fraclap.grid import PeriodicField
from fraclap.selftest import periodized_gaussian
from fraclap.spectral import apply_spectral


def bessel_k_quad(nu, x):
    """K_nu(x) from its integral representation int_0^inf exp(-x cosh t) cosh(nu t) dt."""
    val, _ = integrate.quad(lambda t: math.exp(-x * math.cosh(t)) * math.cosh(nu * t), 0, 30,
                            epsabs=0, epsrel=1e-13, limit=200)
    return val


def test_zero_mode_is_constant():
    prof = solve_mode(0.0, 0.4, f0=2.5)
    assert prof.dtn_value == 0.0
    assert np.all(prof.u_values == 2.5)


def test_half_order_closed_form():
    prof = solve_mode(2.0, 0.5)
    assert prof.dtn_value == pytest.approx(-2.0, abs=1e-4)
    mid = (prof.x_nodes > 0.1) & (prof.x_nodes < 3)
    assert np.allclose(prof.u_values[mid], np.exp(-2 * prof.x_nodes[mid]), rtol=1e-6)


def test_profile_matches_bessel_form():
    g = 0.3
    prof = solve_mode(1.0, g)
    sel = np.nonzero((prof.x_nodes > 0.5) & (prof.x_nodes < 5))[0][::25]
    for i in sel:
        x = prof.x_nodes[i]
        ref = 2 / math.gamma(g) * (x / 2) ** g * bessel_k_quad(g, x)
        assert prof.u_values[i] == pytest.approx(ref, rel=1e-6)


@pytest.mark.parametrize("gamma", [0.15, 0.5, 0.85])
def test_maximum_principle(gamma):
    prof = solve_mode(3.0, gamma, f0=1.7)
    assert np.all(prof.u_values >= -1e-12) and np.all(prof.u_values <= 1.7 + 1e-12)


def test_trace_scaling_in_eta():
    g = 0.35
    base = solve_mode(1.0, g).dtn_value
    for eta in (0.3, 2.0, 7.5):
        assert solve_mode(eta, g).dtn_value == pytest.approx(eta ** (2 * g) * base, rel=1e-6)


def test_trace_converges_under_refinement():
    g = 0.7
    k = extension_constant(g)
    errs = [abs(solve_mode(1.0, g, MeshSpec(J=J, tol=1.0)).dtn_value / k - 1) for J in (100, 200, 400)]
    orders = [math.log2(errs[0] / errs[1]), math.log2(errs[1] / errs[2])]
    assert min(orders) >= 1.5


def test_accuracy_guard():
    with pytest.raises(SolverAccuracyError):
        solve_mode(1.0, 0.3, MeshSpec(J=100, tol=1e-9))
    with pytest.raises(DomainError):
        solve_mode(1.0, 1.2)
    with pytest.raises(DomainError):
        solve_mode(-1.0, 0.5)


@pytest.mark.parametrize("gamma", [0.1, 0.3, 0.5, 0.7, 0.9])
def test_calibration(gamma):
    cal = calibrate_dtn(gamma, mesh_spec=MeshSpec(x_max=60.0))
    assert cal.fitted_exponent == pytest.approx(2 * gamma, abs=1e-3)
    assert cal.kappa == pytest.approx(extension_constant(gamma), rel=1e-6)
    # sign agreement with the scattering prefactor
    assert math.copysign(1, cal.d_gamma_estimate) == math.copysign(1, scattering_prefactor(gamma)) == -1
    report = cal.report()
    assert set(report) >= {"gamma", "d_gamma_estimate", "fit_deviation", "mesh_spec"}


def test_half_order_calibration():
    cal = calibrate_dtn(0.5)
    assert cal.kappa == pytest.approx(-1.0, abs=1e-4)
    assert cal.d_gamma_estimate == pytest.approx(-1.0, abs=1e-4)


def test_complementary_orders():
    # logged relation: kappa(gamma) kappa(1 - gamma) = 1 for the flat extension
    for g in (0.25, 0.4):
        prod = calibrate_dtn(g).kappa * calibrate_dtn(1 - g).kappa
        assert prod == pytest.approx(1.0, rel=1e-6)


def test_flat_potential_vanishes():
    x = np.geomspace(1e-2, 10, 30)
    for g in (0.2, 0.5, 0.8):
        scale = np.abs((g**2 - 0.25) * x ** (-1 - 2 * g)) + 1e-300
        assert np.max(np.abs(flat_extension_potential(g, x)) / np.maximum(scale, x ** (-1 - 2 * g))) < 1e-6


def test_apply_constant_and_plane_wave():
    L = 2 * math.pi
    const = PeriodicField((16,), (L,), np.full(16, 3.0))
    assert np.max(np.abs(apply_via_extension(const, 0.4).values)) < 1e-12
    wave = PeriodicField.from_function(lambda x, y: np.exp(1j * (2 * x + y)), (8, 8), (L, L))
    g = 0.6
    out = apply_via_extension(wave, g).values
    assert np.allclose(out, 5 ** g * wave.values, rtol=1e-4, atol=1e-12)


@pytest.mark.parametrize("gamma", [0.3, 0.5, 0.7])
def test_apply_matches_spectral(gamma):
    f = periodized_gaussian(1, 256)
    ref = apply_spectral(f, gamma).values
    out = apply_via_extension(f, gamma).values
    assert np.max(np.abs(out - ref)) <= 1e-4 * np.max(np.abs(ref))


def test_profile_csv(tmp_path):
    prof = solve_mode(1.0, 0.5, MeshSpec(J=200))
    path = write_profile_csv(prof, tmp_path / "p.csv")
    rows = path.read_text().splitlines()
    assert rows[0] == "x,U" and len(rows) == prof.x_nodes.size + 1
