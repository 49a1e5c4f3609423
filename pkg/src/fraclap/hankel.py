"""Numerical Fourier transform of ``|z|^(alpha - N)`` by radial (Hankel) quadrature.

For a radial function on R^N, with the ``exp(-2 pi i z.zeta)`` kernel,

    F(zeta) = 2 pi |zeta|^(1 - N/2) int_0^inf f(r) J_(N/2 - 1)(2 pi |zeta| r) r^(N/2) dr.

For ``f = r^(alpha - N)`` and ``|zeta| = 1`` this is the constant ``c`` itself.
The integral is oscillatory and only conditionally convergent, so it is cut
at the zeros of the Bessel factor and the resulting partial sums are
extrapolated with Wynn's epsilon algorithm.  Nothing here touches Gamma
functions: this is the independent check on the closed forms in
:mod:`fraclap.gamma`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize, special

from .errors import DomainError, OracleError
from .gamma import ft_homogeneous_constant

__all__ = ["QuadratureSpec", "hankel_ft_oracle", "resolve_ft_convention", "bessel_zeros"]


@dataclass(frozen=True)
class QuadratureSpec:
    intervals: int = 120  # number of zero-to-zero pieces summed before extrapolation
    tol: float = 1e-8  # agreement required between the last two extrapolants


def bessel_zeros(nu: float, count: int) -> np.ndarray:
    """First ``count`` positive zeros of ``J_nu`` (McMahon start, bracketed refinement)."""
    out = []
    k = 1
    while len(out) < count:
        guess = (k + nu / 2 - 0.25) * math.pi
        a, b = guess - 1.2, guess + 1.2
        a = max(a, 1e-9)
        fa, fb = special.jv(nu, a), special.jv(nu, b)
        if fa * fb > 0:
            # low-order zeros drift from McMahon; scan the bracket
            xs = np.linspace(max(guess - 3.0, 1e-9), guess + 3.0, 121)
            vals = special.jv(nu, xs)
            idx = np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)[0]
            cand = [optimize.brentq(lambda t: special.jv(nu, t), xs[i], xs[i + 1]) for i in idx]
            for c in cand:
                if not out or c > out[-1] + 1e-6:
                    out.append(c)
        else:
            z = optimize.brentq(lambda t: special.jv(nu, t), a, b, xtol=1e-14)
            if not out or z > out[-1] + 1e-6:
                out.append(z)
        k += 1
    return np.array(sorted(out)[:count])


def _wynn_epsilon(partial: np.ndarray) -> np.ndarray:
    """Diagonal estimates of the limit from Wynn's epsilon table (even columns)."""
    s = list(partial)
    n = len(s)
    eps_prev = [0.0] * (n + 1)
    eps_cur = s[:]
    estimates = []
    col = 0
    while len(eps_cur) > 1:
        nxt = []
        for i in range(len(eps_cur) - 1):
            d = eps_cur[i + 1] - eps_cur[i]
            if d == 0:
                nxt.append(math.inf)
            else:
                nxt.append(eps_prev[i + 1] + 1.0 / d)
        eps_prev, eps_cur = eps_cur, nxt
        col += 1
        if col % 2 == 0 and eps_cur:
            estimates.append(eps_cur[-1])
    return np.array(estimates)


def hankel_ft_oracle(N: int, alpha: float, quadrature_spec: QuadratureSpec | None = None,
                     convention: str = "cycles") -> float:
    """Constant ``c`` with ``FT[|z|^(alpha-N)] = c |zeta|^(-alpha)``, by quadrature.

    ``convention="cycles"`` uses the ``exp(-2 pi i z.zeta)`` kernel;
    ``"angular"`` rescales to the ``exp(-i z.zeta)`` kernel of
    :func:`fraclap.grid.forward_transform` (factor ``(2 pi)^alpha``).
    """
    spec = quadrature_spec or QuadratureSpec()
    if int(N) != N or not (1 <= N <= 3):
        raise DomainError(f"hankel_ft_oracle supports N in {{1, 2, 3}}, got {N}", contract="model-solutions")
    if not (0 < alpha < N):
        raise DomainError(f"alpha must lie in (0, N), got {alpha}", contract="model-solutions")
    if convention not in ("cycles", "angular"):
        raise DomainError(f"unknown convention {convention!r}", contract="model-solutions")
    nu = N / 2 - 1
    # integrand r^(alpha - N/2) J_nu(2 pi r) = r^(alpha-1) * [r^(-nu) J_nu(2 pi r)]
    smooth = lambda r: (r ** (-nu) * special.jv(nu, 2 * math.pi * r)) if r > 0 else math.pi**nu / special.gamma(nu + 1)
    full = lambda r: r ** (alpha - N / 2) * special.jv(nu, 2 * math.pi * r)

    zeros = bessel_zeros(nu, spec.intervals) / (2 * math.pi)
    head, _ = integrate.quad(smooth, 0.0, zeros[0], weight="alg", wvar=(alpha - 1, 0), epsabs=1e-14, epsrel=1e-13, limit=200)
    pieces = [head]
    for a, b in zip(zeros[:-1], zeros[1:]):
        val, _ = integrate.quad(full, a, b, epsabs=1e-15, epsrel=1e-13, limit=100)
        pieces.append(val)
    partial = np.cumsum(pieces)
    est = _wynn_epsilon(partial)
    est = est[np.isfinite(est)]
    if est.size < 2:
        raise OracleError(f"Wynn extrapolation broke down for N={N}, alpha={alpha}")
    value, previous = est[-1], est[-2]
    if not math.isfinite(value) or abs(value - previous) > spec.tol * max(1.0, abs(value)):
        raise OracleError(
            f"Hankel oracle did not converge for N={N}, alpha={alpha}: "
            f"last extrapolants {previous!r}, {value!r}"
        )
    c = 2 * math.pi * value
    if convention == "angular":
        c *= (2 * math.pi) ** alpha
    return float(c)


def resolve_ft_convention(N: int, alpha: float, tol: float = 1e-3,
                          quadrature_spec: QuadratureSpec | None = None) -> dict:
    """Compare the oracle with the two pi-exponent variants of the closed form."""
    oracle = hankel_ft_oracle(N, alpha, quadrature_spec)
    printed = ft_homogeneous_constant(N, alpha, "printed")
    cycles = ft_homogeneous_constant(N, alpha, "cycles")
    return {
        "N": N,
        "alpha": alpha,
        "oracle": oracle,
        "pi^(alpha-N/2) variant": printed,
        "pi^(N/2-alpha) variant": cycles,
        "matches_printed": abs(oracle - printed) <= tol * abs(printed),
        "matches_cycles": abs(oracle - cycles) <= tol * abs(cycles),
        "tolerance": tol,
    }
