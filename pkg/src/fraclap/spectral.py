"""The flat fractional Laplacian as a Fourier multiplier and as a singular integral.

``apply_spectral`` is the ground truth: multiply mode coefficients by
``|eta|^(2 gamma)``.  ``apply_pv`` evaluates the principal-value difference
integral

    C(n, gamma) * P.V. int (f(y) - f(y + z)) / |z|^(n + 2 gamma) dz

on the torus, directly from the samples, with the constant ``C`` from
:func:`fraclap.gamma.pv_normalization`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import product

import numpy as np
from scipy import special

from .errors import DomainError, StructuralError, ZeroModeError
from .gamma import pv_normalization
from .grid import PeriodicField, forward_transform, frequency_norms, inverse_transform

__all__ = [
    "MultiplierSpec",
    "apply_spectral",
    "spectral_multiplier",
    "PVResult",
    "apply_pv",
    "pv_evaluate",
    "periodic_kernel",
    "epstein_zeta",
    "compose_inverse_check",
    "ZERO_MODE_POLICIES",
]

ZERO_MODE_POLICIES = ("annihilate", "identity", "error")


@dataclass(frozen=True)
class MultiplierSpec:
    """Exponent and zero-mode handling for the ``|eta|^(2 gamma)`` multiplier.

    ``zero_mode_policy`` only matters for ``gamma < 0``: ``annihilate`` sends
    the mean to zero, ``identity`` leaves it untouched, ``error`` refuses
    fields with a nonzero mean.
    """

    gamma: float
    zero_mode_policy: str = "annihilate"

    def __post_init__(self):
        if not math.isfinite(self.gamma):
            raise DomainError(f"gamma must be finite, got {self.gamma}", contract="spectral-op")
        if self.zero_mode_policy not in ZERO_MODE_POLICIES:
            raise DomainError(
                f"zero_mode_policy must be one of {ZERO_MODE_POLICIES}, got {self.zero_mode_policy!r}",
                contract="spectral-op",
            )


def spectral_multiplier(dims, box_lengths, spec: MultiplierSpec) -> np.ndarray:
    eta = frequency_norms(dims, box_lengths)
    mult = np.empty_like(eta)
    nz = eta > 0
    mult[nz] = eta[nz] ** (2 * spec.gamma)
    zero = ~nz
    if spec.gamma > 0:
        mult[zero] = 0.0
    elif spec.gamma == 0:
        mult[zero] = 1.0
    else:
        mult[zero] = 1.0 if spec.zero_mode_policy == "identity" else 0.0
    return mult


def _mean_is_zero(field: PeriodicField, tol: float = 1e-12) -> bool:
    scale = np.max(np.abs(field.values))
    return abs(field.values.mean()) <= tol * max(scale, np.finfo(float).tiny)


def apply_spectral(field: PeriodicField, spec: MultiplierSpec | float) -> PeriodicField:
    """``(-Delta)^gamma f`` by coefficientwise multiplication with ``|eta|^(2 gamma)``."""
    if not isinstance(spec, MultiplierSpec):
        spec = MultiplierSpec(float(spec))
    if not np.all(np.isfinite(field.values)):
        raise StructuralError("field contains NaN or inf", contract="spectral-op")
    if spec.gamma < 0 and spec.zero_mode_policy == "error" and not _mean_is_zero(field):
        raise ZeroModeError(
            f"gamma={spec.gamma} < 0 with zero_mode_policy='error' needs a mean-zero field "
            f"(mean={field.values.mean():.3e})"
        )
    coeffs = forward_transform(field)
    mult = spectral_multiplier(field.dims, field.box_lengths, spec)
    return inverse_transform(coeffs.with_values(coeffs.values * mult))


def compose_inverse_check(field: PeriodicField, gamma: float) -> float:
    """Relative error of ``P_{-gamma}(P_gamma f)`` against ``f`` (zero mode annihilated)."""
    if not _mean_is_zero(field, tol=1e-10):
        raise ZeroModeError(
            f"compose_inverse_check needs a mean-zero field (mean={field.values.mean():.3e})"
        )
    fwd = apply_spectral(field, MultiplierSpec(gamma, "annihilate"))
    back = apply_spectral(fwd, MultiplierSpec(-gamma, "annihilate"))
    return float(np.linalg.norm(back.values - field.values) / np.linalg.norm(field.values))


# -- singular-integral form ---------------------------------------------------


@lru_cache(maxsize=64)
def epstein_zeta(n: int, sigma: float) -> float:
    """Analytically continued ``sum over nonzero j in Z^n of |j|^(-sigma)``.

    ``n = 1`` uses ``2 zeta(sigma)``; otherwise the theta-function splitting
    at ``t = 1`` (self-dual lattice), which converges like ``exp(-pi |j|^2)``.
    """
    if n == 1:
        return 2.0 * float(special.zeta(sigma))
    if sigma == n or sigma == 0:
        raise DomainError(f"Epstein zeta of Z^{n} is singular at sigma={sigma}", contract="spectral-op")
    a1, a2 = sigma / 2, (n - sigma) / 2
    if a1 <= 0 or a2 <= 0:
        raise DomainError(
            f"epstein_zeta({n}, {sigma}) outside the supported range 0 < sigma < n", contract="spectral-op"
        )
    R = 6
    ax = np.arange(-R, R + 1)
    grids = np.meshgrid(*([ax] * n), indexing="ij")
    r2 = sum(g.astype(float) ** 2 for g in grids).ravel()
    r2 = r2[r2 > 0]
    x = np.pi * r2
    terms = special.gammaincc(a1, x) * special.gamma(a1) * x ** (-a1)
    terms += special.gammaincc(a2, x) * special.gamma(a2) * x ** (-a2)
    bracket = 2.0 / (sigma - n) - 2.0 / sigma + terms.sum()
    return float(math.pi**a1 / special.gamma(a1) * bracket)


def _face_integral(func, half_widths: np.ndarray, order: int = 48) -> float:
    """``sum over faces of a_i * int_{face} func(w) dA`` on the boundary of the box
    ``prod [-a_i, a_i]`` (outward normals, both faces per axis)."""
    n = len(half_widths)
    if n == 1:
        a = half_widths[0]
        return 2 * a * float(func(np.array([[a]]))[0])
    nodes, weights = np.polynomial.legendre.leggauss(order)
    total = 0.0
    for i in range(n):
        others = [l for l in range(n) if l != i]
        pts = []
        wts = []
        for combo in product(range(order), repeat=n - 1):
            w = np.empty(n)
            w[i] = half_widths[i]
            wt = 1.0
            for l, c in zip(others, combo):
                w[l] = nodes[c] * half_widths[l]
                wt *= weights[c] * half_widths[l]
            pts.append(w)
            wts.append(wt)
        pts = np.array(pts)
        total += 2 * half_widths[i] * float(np.dot(func(pts), wts))
    return total


@lru_cache(maxsize=32)
def _tail_moments(n: int, p: float, box: tuple[float, ...], images: int):
    """Integrals of ``|w|^-p`` and ``d_i^2 |w|^-p`` outside the image block."""
    a = (images + 0.5) * np.asarray(box)
    # for f homogeneous of degree d < -n: int_outside f = -1/(d+n) * sum_faces a_i int f dA
    i0 = -_face_integral(lambda w: np.sum(w * w, axis=1) ** (-p / 2), a) / (n - p)
    i2 = []
    for i in range(n):
        def d2(w, i=i):
            r2 = np.sum(w * w, axis=1)
            return p * (p + 2) * w[:, i] ** 2 * r2 ** (-p / 2 - 2) - p * r2 ** (-p / 2 - 1)
        i2.append(-_face_integral(d2, a) / (n - p - 2))
    return i0, tuple(i2)


def periodic_kernel(dims, box_lengths, p: float, images: int = 3) -> tuple[np.ndarray, float]:
    """Periodised kernel ``sum_m |z + m L|^(-p)`` on the grid offsets (origin entry 0).

    Returns ``(table, tail_error)``.  In 1-D the image sum is closed by Hurwitz
    zeta functions and is exact.  Otherwise images with ``|m|_inf <= images`` are
    summed directly and the rest replaced by a second-order midpoint-rule
    integral over the exterior of the image block; ``tail_error`` is the size of
    that second-order term, an upper estimate for what is left out.
    """
    dims = tuple(dims)
    box = tuple(float(b) for b in box_lengths)
    n = len(dims)
    offsets = []
    for N, L in zip(dims, box):
        j = np.arange(N)
        offsets.append(np.where(j <= N // 2, j, j - N) * (L / N))
    if n == 1:
        (L,) = box
        q = (np.arange(dims[0]) * (L / dims[0])) / L
        table = np.zeros(dims)
        qq = q[1:]
        table[1:] = L ** (-p) * (special.zeta(p, qq) + special.zeta(p, 1.0 - qq))
        return table, 0.0
    z = np.meshgrid(*offsets, indexing="ij")
    table = np.zeros(dims)
    for m in product(range(-images, images + 1), repeat=n):
        r2 = sum((zi + mi * L) ** 2 for zi, mi, L in zip(z, m, box))
        with np.errstate(divide="ignore"):
            table += np.where(r2 > 0, r2 ** (-p / 2), 0.0)
    i0, i2 = _tail_moments(n, p, box, images)
    vol = math.prod(box)
    second = sum((zi**2 / 2 - L**2 / 24) * m2 for zi, L, m2 in zip(z, box, i2)) / vol
    table += i0 / vol + second
    origin = (0,) * n
    table[origin] = 0.0
    tail_error = float(np.max(np.abs(second)))
    return table, tail_error


@dataclass(frozen=True)
class PVResult:
    value: complex
    local_correction: complex  # singular-cell term
    tail_error: float  # estimated truncation error of the image sum


def _check_isotropic(field: PeriodicField) -> float:
    h = field.spacing
    if any(abs(hi - h[0]) > 1e-12 * h[0] for hi in h):
        raise DomainError(f"apply_pv needs equal spacing on every axis, got {h}", contract="spectral-op")
    return h[0]


def _laplacian_at(values: np.ndarray, idx: tuple[int, ...], h: float) -> complex:
    """Fourth-order central-difference Laplacian at a grid index (periodic wrap)."""
    total = 0.0 + 0.0j
    for ax, N in enumerate(values.shape):
        def at(s):
            j = list(idx)
            j[ax] = (j[ax] + s) % N
            return values[tuple(j)]
        if N >= 5:
            total += (-at(2) + 16 * at(1) - 30 * at(0) + 16 * at(-1) - at(-2)) / (12 * h * h)
        else:
            total += (at(1) - 2 * at(0) + at(-1)) / (h * h)
    return total


def pv_evaluate(samples: PeriodicField, gamma: float, point, images: int = 3) -> PVResult:
    """Principal-value form at one grid index, with diagnostics.

    The periodised kernel sum omits the self-cell.  The missing singular
    contribution is restored from the local Taylor expansion: the quadratic
    term of ``f(y) - f(y + z)`` times ``|z|^(-n - 2 gamma)`` leaves a lattice
    defect ``-A h^(2 - 2 gamma) Z_n(n + 2 gamma - 2)`` with ``A = -Lap f(y)/(2n)``
    and ``Z_n`` the Epstein zeta function of ``Z^n``.  The remaining error is
    ``O(h^(4 - 2 gamma))`` for smooth ``f``.
    """
    if not (0 < gamma < 1):
        raise DomainError(f"apply_pv needs gamma in (0, 1), got {gamma}", contract="spectral-op")
    if not np.all(np.isfinite(samples.values)):
        raise StructuralError("field contains NaN or inf", contract="spectral-op")
    n = samples.ndim
    idx = (int(point),) if np.isscalar(point) else tuple(int(i) for i in point)
    if len(idx) != n or any(not (0 <= i < N) for i, N in zip(idx, samples.dims)):
        raise DomainError(f"point {point} outside grid {samples.dims}", contract="spectral-op")
    h = _check_isotropic(samples)
    p = n + 2 * gamma
    kernel, tail_error = periodic_kernel(samples.dims, samples.box_lengths, p, images)
    f = samples.values
    shifted = np.roll(f, shift=tuple(-i for i in idx), axis=tuple(range(n)))
    diff = f[idx] - shifted  # f(y) - f(y + z_j), z_j on the offset grid
    cell = h**n
    quad = np.sum(diff * kernel) * cell
    coef = -_laplacian_at(f, idx, h) / (2 * n)
    defect = coef * h ** (2 - 2 * gamma) * epstein_zeta(n, n + 2 * gamma - 2)
    c_norm = pv_normalization(n, gamma)
    value = c_norm * (quad - defect)
    scale = c_norm * float(np.sum(np.abs(diff))) * cell
    return PVResult(complex(value), complex(-c_norm * defect), tail_error * scale)


def apply_pv(samples: PeriodicField, gamma: float, point, images: int = 3) -> complex:
    """``(-Delta)^gamma f`` at one grid point from the difference-kernel integral."""
    return pv_evaluate(samples, gamma, point, images).value
