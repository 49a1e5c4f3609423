import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fraclap.errors import StructuralError
from fraclap.grid import (
    FracParams,
    PeriodicField,
    fft_workers,
    forward_transform,
    frequency_norms,
    inverse_transform,
    load_field,
    mode_frequencies,
    save_field,
    wrap_indices,
)

from conftest import random_field


def direct_dft(f: PeriodicField) -> np.ndarray:
    """O(N^2) continuum-normalised DFT: h^n sum_j f_j exp(-i eta_m . y_j)."""
    out = np.zeros(f.dims, dtype=complex)
    freqs = mode_frequencies(f.dims, f.box_lengths)
    coords = [np.arange(N) * h for N, h in zip(f.dims, f.spacing)]
    for m in np.ndindex(*f.dims):
        phase = 1.0
        for ax in range(f.ndim):
            shape = [1] * f.ndim
            shape[ax] = f.dims[ax]
            phase = phase * np.exp(-1j * freqs[ax][m[ax]] * coords[ax]).reshape(shape)
        out[m] = np.sum(f.values * phase) * f.cell_volume
    return out


def test_constant_field_has_only_mean_mode():
    f = PeriodicField((8, 6), (2.0, 3.0), np.ones(48))
    c = forward_transform(f).values.copy()
    assert c[0, 0] == pytest.approx(6.0, rel=1e-14)
    c[0, 0] = 0
    assert np.max(np.abs(c)) < 1e-14


def test_plane_wave_hits_single_mode():
    L = 2 * math.pi
    f = PeriodicField.from_function(lambda y: np.exp(3j * y), (16,), (L,))
    c = forward_transform(f).values.copy()
    assert c[3] == pytest.approx(L, rel=1e-13)
    c[3] = 0
    assert np.max(np.abs(c)) < 1e-13


@pytest.mark.parametrize("dims", [(16,), (9,), (8, 6), (4, 5, 3)])
def test_forward_matches_direct_summation(rng, dims):
    f = random_field(rng, dims, box=tuple(1.0 + i for i in range(len(dims))), real=False)
    assert np.allclose(forward_transform(f).values, direct_dft(f), rtol=0, atol=1e-12 * np.abs(f.values).sum())


@pytest.mark.parametrize("dims", [(64,), (33,), (16, 12), (6, 8, 4)])
def test_round_trip(rng, dims):
    f = random_field(rng, dims, real=False)
    back = inverse_transform(forward_transform(f)).values
    assert np.max(np.abs(back - f.values)) <= 1e-12 * np.max(np.abs(f.values))


def test_zero_coefficients_give_zero_field():
    c = PeriodicField((5, 4), (1.0, 1.0), np.zeros(20))
    assert np.all(inverse_transform(c).values == 0)


def test_unit_coefficient_is_scaled_plane_wave():
    L = 3.0
    vals = np.zeros(10, complex)
    vals[2] = 1.0
    f = inverse_transform(PeriodicField((10,), (L,), vals))
    y = np.arange(10) * L / 10
    assert np.allclose(f.values, np.exp(1j * 2 * math.pi / L * 2 * y) / L, atol=1e-15)


@settings(max_examples=25, deadline=None)
@given(st.lists(st.integers(2, 12), min_size=1, max_size=3), st.integers(0, 2**31 - 1))
def test_parseval(dims, seed):
    rng = np.random.default_rng(seed)
    box = tuple(0.5 + rng.random() * 3 for _ in dims)
    f = random_field(rng, tuple(dims), box=box, real=False)
    c = forward_transform(f)
    lhs = np.sum(np.abs(f.values) ** 2) * f.cell_volume
    rhs = np.sum(np.abs(c.values) ** 2) * f.frequency_cell_volume / (2 * math.pi) ** f.ndim
    assert rhs == pytest.approx(lhs, rel=1e-10)


def test_shift_equivariance(rng):
    f = random_field(rng, (12, 10), box=(2.0, 5.0))
    shift = (3, -2)
    g = f.with_values(np.roll(f.values, shift, axis=(0, 1)))
    eta = np.meshgrid(*mode_frequencies(f.dims, f.box_lengths), indexing="ij")
    phase = np.exp(-1j * sum(e * s * h for e, s, h in zip(eta, shift, f.spacing)))
    assert np.allclose(forward_transform(g).values, forward_transform(f).values * phase, atol=1e-12)


def test_wrap_convention():
    assert list(mode_frequencies((4,), (2 * math.pi,))[0]) == [0, 1, 2, -1]
    assert list(mode_frequencies((5,), (2 * math.pi,))[0]) == [0, 1, 2, -2, -1]
    assert mode_frequencies((8,), (1.0,))[0][1] == pytest.approx(2 * math.pi)
    assert list(wrap_indices(6)) == [0, 1, 2, 3, -2, -1]


def test_frequency_norms_euclidean():
    eta = frequency_norms((4, 4), (2 * math.pi, math.pi))
    assert eta[1, 1] == pytest.approx(math.sqrt(1 + 4))


def test_structural_errors():
    with pytest.raises(StructuralError):
        PeriodicField((4, 4), (1.0, 1.0), np.zeros(15))
    with pytest.raises(StructuralError):
        PeriodicField((4,), (1.0, 2.0), np.zeros(4))
    with pytest.raises(StructuralError):
        PeriodicField((4,), (-1.0,), np.zeros(4))
    with pytest.raises(StructuralError):
        PeriodicField((1,), (1.0,), np.zeros(1))


def test_values_are_read_only(rng):
    f = random_field(rng, (4,))
    with pytest.raises(ValueError):
        f.values[0] = 1.0


@pytest.mark.parametrize("fmt,suffix", [("json", ".field"), ("raw", ".field"), ("csv", ".csv")])
def test_field_file_round_trip(tmp_path, rng, fmt, suffix):
    f = random_field(rng, (4, 3), box=(1.5, 2.5), real=False)
    path = save_field(f, tmp_path / ("f" + suffix), fmt)
    g = load_field(path)
    assert g.dims == f.dims and g.box_lengths == f.box_lengths
    assert np.array_equal(g.values, f.values)


def test_malformed_field_files(tmp_path):
    bad = tmp_path / "bad.field"
    bad.write_text("not json")
    with pytest.raises(StructuralError):
        load_field(bad)
    bad.write_text(json.dumps({"dims": [4], "box_lengths": [1.0], "dtype": "c128", "layout": "row-major",
                               "data": "AAAA"}))
    with pytest.raises(StructuralError):
        load_field(bad)
    bad.write_text(json.dumps({"dims": [4], "box_lengths": [1.0]}))
    with pytest.raises(StructuralError, match="missing"):
        load_field(bad)


def test_frac_params_validation():
    assert FracParams(3, 0.5, 1).k == 1
    with pytest.raises(ValueError):
        FracParams(3, 2.0)
    with pytest.raises(ValueError):
        FracParams(3, 0.5, 3)


def test_thread_cap(monkeypatch):
    monkeypatch.setenv("FRACLAP_THREADS", "1")
    assert fft_workers() == 1
    monkeypatch.setenv("FRACLAP_THREADS", "x")
    with pytest.raises(StructuralError):
        fft_workers()
