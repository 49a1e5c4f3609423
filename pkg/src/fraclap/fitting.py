"""Least-squares power-law fits on log-log data."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import FitError

__all__ = ["PowerLawFit", "fit_power_law"]


@dataclass(frozen=True)
class PowerLawFit:
    exponent: float
    prefactor: float  # signed: carries the common sign of the data
    max_rel_deviation: float
    points: int


def fit_power_law(x, y, min_points: int = 3) -> PowerLawFit:
    """Fit ``y ~ prefactor * x**exponent`` by linear regression of ``log|y|`` on ``log x``.

    All ``y`` must share one sign (the prefactor inherits it).
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise FitError(f"fit_power_law needs matching 1-D arrays, got {x.shape} and {y.shape}")
    if x.size < min_points:
        raise FitError(f"need at least {min_points} points for a power-law fit, got {x.size}")
    if np.any(x <= 0):
        raise FitError("abscissae must be positive")
    signs = np.sign(y)
    if np.any(signs == 0) or np.any(signs != signs[0]):
        raise FitError("ordinates change sign or vanish inside the fit window")
    lx, ly = np.log(x), np.log(np.abs(y))
    slope, intercept = np.polyfit(lx, ly, 1)
    model = slope * lx + intercept
    dev = float(np.max(np.abs(np.expm1(ly - model))))
    return PowerLawFit(float(slope), float(signs[0] * np.exp(intercept)), dev, int(x.size))
