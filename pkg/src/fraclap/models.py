"""Model solutions: homogeneous singular profiles, bubbles, growth and completeness checks."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import DomainError, FitError
from .fitting import fit_power_law
from .gamma import lambda_factor
from .grid import FracParams, PeriodicField
from .spectral import apply_spectral

__all__ = [
    "SingularModel",
    "GridSpec",
    "HomogeneousFit",
    "eval_singular_model",
    "mollified_profile",
    "verify_homogeneous_action",
    "output_exponent_exceeds_codimension",
    "BubbleParams",
    "BubbleResidual",
    "eval_bubble",
    "bubble_residual",
    "GrowthReport",
    "growth_diagnostic",
    "CompletenessResult",
    "completeness_probe",
]


# -- homogeneous singular model ----------------------------------------------


@dataclass(frozen=True)
class SingularModel:
    """``u(y) = a |y''|^(gamma - n/2)`` with ``y = (y', y'')`` in R^k x R^(n-k)."""

    n: int
    k: int
    gamma: float
    amplitude: float = 1.0

    def __post_init__(self):
        FracParams(self.n, self.gamma, self.k)
        if not (0 < self.gamma < self.n / 2):
            raise DomainError(f"gamma must lie in (0, n/2), got {self.gamma}", contract="model-solutions")

    @property
    def exponent(self) -> float:
        return self.gamma - self.n / 2

    @property
    def codim(self) -> int:
        return self.n - self.k


def eval_singular_model(y, model: SingularModel) -> float:
    """``a |y''|^(gamma - n/2)``; ``y`` has ``n`` components, the last ``n - k`` are ``y''``."""
    y = np.asarray(y, dtype=float)
    if y.shape[-1] != model.n:
        raise DomainError(f"point needs {model.n} components, got {y.shape[-1]}", contract="model-solutions")
    r = np.sqrt(np.sum(y[..., model.k:] ** 2, axis=-1))
    if np.any(r == 0):
        raise DomainError("u is infinite on the singular set y'' = 0", contract="model-solutions")
    out = model.amplitude * r**model.exponent
    return float(out) if out.ndim == 0 else out


def output_exponent_exceeds_codimension(n: int, k: int, gamma: float) -> bool:
    """Whether ``-n/2 - gamma > k - n``: the image has no mass concentrated on the singular set."""
    return -n / 2 - gamma > k - n


@dataclass(frozen=True)
class GridSpec:
    """Uniform grid: ``points`` per y'' axis over a box of side ``box_length``."""

    points: int
    box_length: float = 1.0

    def __post_init__(self):
        if int(self.points) != self.points or self.points < 16 or self.points % 2:
            raise DomainError(f"grid needs an even number >= 16 of points, got {self.points}", contract="model-solutions")
        if not self.box_length > 0:
            raise DomainError(f"box_length must be positive, got {self.box_length}", contract="model-solutions")

    @property
    def spacing(self) -> float:
        return self.box_length / self.points


def _cap_coefficients(beta: float, N: int) -> np.ndarray:
    # P(t) = sum c_i t^(2i), i = 0..4, joins t^beta in C^2 at t = 1 and matches
    # the zeroth and second radial moments of t^beta over the unit ball of R^N
    powers = 2 * np.arange(5)
    A = np.array(
        [
            np.ones(5),
            powers,
            powers * (powers - 1),
            1 / (N + powers),
            1 / (N + 2 + powers),
        ]
    )
    b = np.array([1.0, beta, beta * (beta - 1), 1 / (beta + N), 1 / (beta + N + 2)])
    return np.linalg.solve(A, b)


def mollified_profile(r: np.ndarray, model: SingularModel, radius: float) -> np.ndarray:
    """``a r^beta`` outside ``radius``; inside, an even polynomial cap that is ``C^2``
    at the junction and has the same zeroth and second moments over the ball."""
    beta = model.exponent
    c = _cap_coefficients(beta, model.codim)
    t2 = (np.asarray(r) / radius) ** 2
    cap = radius**beta * np.polynomial.polynomial.polyval(t2, c)
    with np.errstate(divide="ignore"):
        outer = np.where(r > 0, np.asarray(r, dtype=float) ** beta, 0.0)
    return model.amplitude * np.where(r >= radius, outer, cap)


@dataclass(frozen=True)
class HomogeneousFit:
    fitted_exponent: float
    fitted_prefactor: float
    lambda_predicted: float
    target_exponent: float
    background: tuple[float, float]  # b0 + b2 r^2 smooth part removed before the log-log fit
    window: tuple[float, float]
    half_window_exponent: float
    max_rel_deviation: float
    points: int

    @property
    def exponent_rel_error(self) -> float:
        return abs(self.fitted_exponent / self.target_exponent - 1)

    @property
    def prefactor_rel_error(self) -> float:
        return abs(self.fitted_prefactor / self.lambda_predicted - 1)

    def report(self) -> dict:
        return {
            "fitted_exponent": self.fitted_exponent,
            "target_exponent": self.target_exponent,
            "exponent_rel_error": self.exponent_rel_error,
            "fitted_prefactor": self.fitted_prefactor,
            "lambda_times_a": self.lambda_predicted,
            "prefactor_rel_error": self.prefactor_rel_error,
            "background": list(self.background),
            "window": list(self.window),
            "half_window_exponent": self.half_window_exponent,
            "max_rel_deviation": self.max_rel_deviation,
            "points": self.points,
        }


def _default_points(codim: int) -> int:
    return {1: 65536, 2: 2048}.get(codim, 128)


def _background_fit(r: np.ndarray, data: np.ndarray, guess: float):
    """Variable-projection fit of ``P r^e + b0 + b2 r^2`` with relative weights."""
    w = 1.0 / np.abs(data)
    cols = lambda e: np.stack([r**e, np.ones_like(r), r**2], axis=1)

    def solve(e):
        A = cols(e)
        coef, *_ = np.linalg.lstsq(A * w[:, None], data * w, rcond=None)
        resid = (A @ coef - data) * w
        return coef, float(resid @ resid)

    opt = minimize_scalar(lambda e: solve(e)[1], bounds=(guess - 0.4, guess + 0.4), method="bounded",
                          options={"xatol": 1e-11})
    coef, _ = solve(opt.x)
    return opt.x, coef


def verify_homogeneous_action(
    model: SingularModel,
    grid_spec: GridSpec | None = None,
    mollification_radius: float | None = None,
    window: tuple[float, float] | None = None,
    stability_tol: float = 5e-3,
) -> HomogeneousFit:
    """Apply the spectral operator to a mollified ``a |y''|^(gamma-n/2)`` and fit the result.

    The singular set sits at the box centre.  The y' axes carry two samples
    each (the field is constant along them).  Output values in the annulus
    ``window`` (default ``[max(8h, 4 r_moll), L/8]``) are fitted as
    ``P r^e + b0 + b2 r^2``; the smooth part comes from periodisation and is
    removed before the final log-log regression.  The fit is repeated on the
    lower half of the window and must move the exponent by less than
    ``stability_tol`` (relative).
    """
    N = model.codim
    grid_spec = grid_spec or GridSpec(_default_points(N))
    h = grid_spec.spacing
    L = grid_spec.box_length
    radius = 4 * h if mollification_radius is None else mollification_radius
    if radius < 4 * h * (1 - 1e-12):
        raise DomainError(f"mollification radius {radius} below 4 grid cells ({4 * h})", contract="model-solutions")
    lo, hi = window if window is not None else (max(8 * h, 4 * radius), L / 8)
    if not (lo < hi) or hi > L / 2:
        raise FitError(f"fit window [{lo}, {hi}] is empty or leaves the box")

    M = grid_spec.points
    axis = np.arange(M) * h - L / 2
    rgrid = np.sqrt(sum(g * g for g in np.meshgrid(*([axis] * N), indexing="ij", sparse=True)))
    profile = mollified_profile(rgrid, model, radius)
    dims = (2,) * model.k + (M,) * N
    values = np.broadcast_to(profile, dims)
    field = PeriodicField(dims, (L,) * model.n, values)
    out = apply_spectral(field, model.gamma).values.real[(0,) * model.k]

    sel = (rgrid >= lo) & (rgrid <= hi)
    r, data = rgrid[sel], out[sel]
    if r.size < 8:
        raise FitError(f"only {r.size} samples inside the fit window [{lo}, {hi}]")
    target = -model.n / 2 - model.gamma

    def fit_on(rr, dd):
        _, coef = _background_fit(rr, dd, target)
        cleaned = dd - coef[1] - coef[2] * rr**2
        return fit_power_law(rr, cleaned), coef

    full, coef = fit_on(r, data)
    mid = math.sqrt(lo * hi)
    half_sel = r <= mid
    half, _ = fit_on(r[half_sel], data[half_sel])
    if abs(half.exponent / full.exponent - 1) > stability_tol:
        raise FitError(
            f"exponent unstable under window halving: {full.exponent:.5f} vs {half.exponent:.5f}; "
            "mollification or periodisation contaminates the window"
        )
    lam = lambda_factor(model.n, model.k, model.gamma).value * model.amplitude
    return HomogeneousFit(
        fitted_exponent=full.exponent,
        fitted_prefactor=full.prefactor,
        lambda_predicted=lam,
        target_exponent=target,
        background=(float(coef[1]), float(coef[2])),
        window=(float(lo), float(hi)),
        half_window_exponent=half.exponent,
        max_rel_deviation=full.max_rel_deviation,
        points=full.points,
    )


# -- bubbles -----------------------------------------------------------------


@dataclass(frozen=True)
class BubbleParams:
    """``v(z) = C (mu / (|z - z0|^2 + mu^2))^((n - 2 gamma)/2)``."""

    n: int
    gamma: float
    mu: float = 1.0
    center: tuple[float, ...] | None = None  # None: origin
    amplitude: float = 1.0

    def __post_init__(self):
        FracParams(self.n, self.gamma)
        if not (self.mu > 0 and self.amplitude > 0):
            raise DomainError("bubble needs mu > 0 and C > 0", contract="model-solutions")
        if self.center is not None and len(self.center) != self.n:
            raise DomainError(f"center needs {self.n} components", contract="model-solutions")

    @property
    def z0(self) -> np.ndarray:
        return np.zeros(self.n) if self.center is None else np.asarray(self.center, dtype=float)

    @property
    def decay_exponent(self) -> float:
        return (self.n - 2 * self.gamma) / 2


def eval_bubble(z, params: BubbleParams):
    z = np.asarray(z, dtype=float)
    d2 = np.sum((z - params.z0) ** 2, axis=-1)
    out = params.amplitude * (params.mu / (d2 + params.mu**2)) ** params.decay_exponent
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class BubbleResidual:
    lambda_estimate: float
    residual_norm: float  # coefficient of variation of the ratio over the window
    periodization_error: float  # |Lambda(L) - Lambda(L/2)| / (2^n - 1) at fixed spacing
    boundary_ratio: float  # v at the nearest box face over v(z0)
    window_points: int

    def report(self) -> dict:
        return {
            "lambda_estimate": self.lambda_estimate,
            "residual_norm": self.residual_norm,
            "periodization_error": self.periodization_error,
            "boundary_ratio": self.boundary_ratio,
            "window_points": self.window_points,
        }


def _bubble_ratio(params: BubbleParams, points: int, box: float, origin: np.ndarray):
    n, g = params.n, params.gamma
    h = box / points
    axes = [origin[i] + np.arange(points) * h for i in range(n)]
    mesh = np.meshgrid(*axes, indexing="ij", sparse=True)
    # distances to z0 taken periodically so the bubble sits whole inside the torus
    d2 = 0.0
    for i, y in enumerate(mesh):
        d = (y - params.z0[i] + box / 2) % box - box / 2
        d2 = d2 + d * d
    v = params.amplitude * (params.mu / (d2 + params.mu**2)) ** params.decay_exponent
    field = PeriodicField((points,) * n, (box,) * n, np.broadcast_to(v, (points,) * n))
    out = apply_spectral(field, g).values.real
    p = (n + 2 * g) / (n - 2 * g)
    sel = np.broadcast_to(d2, v.shape) <= (2 * params.mu) ** 2
    ratio = out[sel] / v[sel] ** p
    return ratio


# default (points per axis, box side in units of mu)
_BUBBLE_GRIDS = {1: (262144, 8192.0), 2: (1024, 128.0), 3: (128, 32.0)}


def bubble_residual(
    params: BubbleParams,
    grid_spec: GridSpec | None = None,
    origin: Sequence[float] | None = None,
    max_boundary_ratio: float = 0.25,
    max_cv: float = 0.05,
) -> BubbleResidual:
    """Measure ``Lambda`` in ``(-Delta)^gamma v = Lambda v^((n+2g)/(n-2g))`` on a periodic box.

    ``origin`` is the lower box corner (default: box centred on ``z0``).  The
    ratio is sampled where ``|z - z0| <= 2 mu``; its mean is ``Lambda`` and its
    coefficient of variation is the residual.  Periodisation error is estimated
    by repeating on the half-size box at the same spacing.
    """
    n, g = params.n, params.gamma
    if not (n - 2 * g > 0):
        raise DomainError(
            f"the critical exponent (n+2g)/(n-2g) is undefined for n = 2 gamma (n={n}, gamma={g}); "
            "the bubble degenerates to a constant",
            contract="model-solutions",
        )
    if grid_spec is None:
        points, box = _BUBBLE_GRIDS.get(n, (64, 16.0))
        grid_spec = GridSpec(points, box * params.mu)
    L, M = grid_spec.box_length, grid_spec.points
    if grid_spec.spacing > params.mu / 4:
        raise DomainError(f"grid spacing {grid_spec.spacing} too coarse for mu={params.mu}", contract="model-solutions")
    boundary_ratio = (params.mu**2 / ((L / 2) ** 2 + params.mu**2)) ** params.decay_exponent
    if boundary_ratio > max_boundary_ratio:
        raise DomainError(
            f"bubble too wide for the box: v at the box face is {boundary_ratio:.3g} of the peak "
            f"(limit {max_boundary_ratio})",
            contract="model-solutions",
        )
    corner = params.z0 - L / 2 if origin is None else np.asarray(origin, dtype=float)
    ratio = _bubble_ratio(params, M, L, corner)
    lam = float(ratio.mean())
    cv = float(ratio.std() / abs(lam))
    half = _bubble_ratio(params, M // 2, L / 2, params.z0 - L / 4)
    per_err = abs(lam - float(half.mean())) / (2**n - 1)
    if cv > max_cv:
        raise DomainError(
            f"ratio varies by {cv:.2%} over the window (limit {max_cv:.0%}); refine or enlarge the grid",
            contract="model-solutions",
        )
    return BubbleResidual(lam, cv, per_err, boundary_ratio, int(ratio.size))


# -- growth and completeness ------------------------------------------------


@dataclass(frozen=True)
class GrowthReport:
    gamma: float
    n: int
    sup_constant: float
    witness: tuple[float, ...]
    samples_count: int

    def report(self) -> dict:
        return {
            "gamma": self.gamma,
            "n": self.n,
            "sup_constant": self.sup_constant,
            "witness": list(self.witness),
            "samples_count": self.samples_count,
        }


def _nearest_distances(points: np.ndarray, targets: np.ndarray, chunk: int = 4096) -> np.ndarray:
    out = np.empty(points.shape[0])
    for s in range(0, points.shape[0], chunk):
        block = points[s:s + chunk]
        d2 = np.sum((block[:, None, :] - targets[None, :, :]) ** 2, axis=-1)
        out[s:s + chunk] = np.sqrt(d2.min(axis=1))
    return out


def growth_diagnostic(u_samples, lambda_set, params: FracParams) -> GrowthReport:
    """``sup u(z) dist(z, Lambda)^((n - 2 gamma)/2)`` over the samples (flat distances).

    ``u_samples`` is a sequence of ``(point, value)``; ``lambda_set`` a sequence
    of points.  Nearest distances are brute force.
    """
    if len(u_samples) == 0 or len(lambda_set) == 0:
        raise DomainError("growth_diagnostic needs nonempty samples and singular set", contract="model-solutions")
    pts = np.array([np.atleast_1d(np.asarray(p, dtype=float)) for p, _ in u_samples])
    vals = np.array([float(v) for _, v in u_samples])
    lam = np.array([np.atleast_1d(np.asarray(q, dtype=float)) for q in lambda_set])
    if pts.shape[1] != params.n or lam.shape[1] != params.n:
        raise DomainError(f"points must have {params.n} components", contract="model-solutions")
    dist = _nearest_distances(pts, lam)
    if np.any(dist <= 0):
        raise DomainError("a sample point lies on the singular set", contract="model-solutions")
    weighted = vals * dist ** ((params.n - 2 * params.gamma) / 2)
    i = int(np.argmax(weighted))
    return GrowthReport(params.gamma, params.n, float(weighted[i]), tuple(map(float, pts[i])), len(u_samples))


@dataclass(frozen=True)
class CompletenessResult:
    divergent: bool
    partial_integral: float
    tail_exponent: float


def completeness_probe(u_along_ray, params: FracParams, tail: int = 8, tol: float = 1e-6) -> CompletenessResult:
    """Does the conformal length ``int u^(2/(n-2 gamma)) ds`` diverge toward the singular set?

    ``u_along_ray`` holds ``(s, u)`` with ``s`` the remaining distance to the
    singular set along the ray, ordered with ``s`` decreasing.  The integrand's
    power law in ``s`` is fitted on the ``tail`` samples closest to the set;
    an exponent ``<= -1`` (up to ``tol``) means the length diverges.
    """
    if len(u_along_ray) < 8:
        raise DomainError(f"completeness_probe needs at least 8 samples, got {len(u_along_ray)}",
                          contract="model-solutions")
    if not (params.n - 2 * params.gamma > 0):
        raise DomainError("completeness_probe needs n > 2 gamma", contract="model-solutions")
    s = np.array([float(a) for a, _ in u_along_ray])
    u = np.array([float(b) for _, b in u_along_ray])
    if np.any(np.diff(s) >= 0) or s[-1] <= 0:
        raise DomainError("samples must approach the singular set with strictly decreasing positive distance",
                          contract="model-solutions")
    integrand = u ** (2 / (params.n - 2 * params.gamma))
    partial = float(np.trapezoid(integrand[::-1], s[::-1]))
    fit = fit_power_law(s[-tail:], integrand[-tail:])
    return CompletenessResult(fit.exponent <= -1 + tol, partial, fit.exponent)
