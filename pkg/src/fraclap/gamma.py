"""Sign-aware Gamma arithmetic and the closed-form constants built on it.

Everything is carried as ``(log|x|, sign, pole)`` so that sign conclusions never
pass through an overflowing or cancelling floating-point product.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import DomainError, PoleError

__all__ = [
    "SignedLog",
    "SignedLogGamma",
    "signed_log_gamma",
    "gamma_value",
    "ft_homogeneous_constant",
    "lambda_factor",
    "lambda_factor_printed",
    "AdmissibilityReport",
    "admissible",
    "dimrest_ratio",
    "sign_walk",
    "sign_walk_poles",
    "scattering_prefactor",
    "pv_normalization",
    "extension_constant",
    "FT_VARIANTS",
]

# Lanczos approximation, g = 7, n = 9 (Godfrey's coefficients).
_LANCZOS_G = 7.0
_LANCZOS_COEF = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_HALF_LOG_2PI = 0.5 * math.log(2 * math.pi)


@dataclass(frozen=True)
class SignedLog:
    """A real number stored as ``sign * exp(log_abs)``.

    ``is_pole`` marks a value that does not exist (a Gamma pole was hit
    somewhere in the product); ``sign`` and ``log_abs`` are then meaningless.
    """

    log_abs: float
    sign: int
    is_pole: bool = False

    @classmethod
    def pole(cls) -> "SignedLog":
        return cls(math.nan, 0, True)

    @classmethod
    def of(cls, x: float) -> "SignedLog":
        if x == 0:
            return cls(-math.inf, 0)
        return cls(math.log(abs(x)), 1 if x > 0 else -1)

    @property
    def indeterminate(self) -> bool:
        return self.is_pole

    @property
    def value(self) -> float:
        """Plain float (nan at a pole, may overflow to +-inf)."""
        if self.is_pole:
            return math.nan
        if self.sign == 0:
            return 0.0
        try:
            return self.sign * math.exp(self.log_abs)
        except OverflowError:
            return self.sign * math.inf

    def __mul__(self, other: "SignedLog") -> "SignedLog":
        if self.is_pole or other.is_pole:
            return SignedLog.pole()
        return SignedLog(self.log_abs + other.log_abs, self.sign * other.sign)

    def __truediv__(self, other: "SignedLog") -> "SignedLog":
        if self.is_pole or other.is_pole:
            return SignedLog.pole()
        if other.sign == 0:
            raise ZeroDivisionError("division by a signed-log zero")
        return SignedLog(self.log_abs - other.log_abs, self.sign * other.sign)


#: Result type of :func:`signed_log_gamma`.
SignedLogGamma = SignedLog


def _is_nonpositive_integer(x: float) -> bool:
    return x <= 0 and x == math.floor(x)


def _lanczos_log_gamma(x: float) -> float:
    """log Gamma(x) for x >= 0.5."""
    x -= 1.0
    a = _LANCZOS_COEF[0]
    t = x + _LANCZOS_G + 0.5
    for i in range(1, len(_LANCZOS_COEF)):
        a += _LANCZOS_COEF[i] / (x + i)
    return _HALF_LOG_2PI + (x + 0.5) * math.log(t) - t + math.log(a)


def _log_abs_sin_pi(x: float) -> tuple[float, int]:
    # reduce to (-1/2, 1/2] first so sin(pi*x) keeps full relative accuracy near integers
    m = round(x)
    s = math.sin(math.pi * (x - m))
    if m % 2:
        s = -s
    return math.log(abs(s)), (1 if s > 0 else -1)


def signed_log_gamma(x: float) -> SignedLog:
    """``(log|Gamma(x)|, sign Gamma(x))``; poles at 0, -1, -2, ... are flagged in-band."""
    x = float(x)
    if not math.isfinite(x):
        raise DomainError(f"signed_log_gamma needs a finite argument, got {x}", contract="gamma-calculus")
    if _is_nonpositive_integer(x):
        return SignedLog.pole()
    if x >= 0.5:
        return SignedLog(_lanczos_log_gamma(x), 1)
    # reflection: Gamma(x) Gamma(1-x) = pi / sin(pi x), and Gamma(1-x) > 0 here
    log_sin, sgn = _log_abs_sin_pi(x)
    return SignedLog(math.log(math.pi) - log_sin - _lanczos_log_gamma(1.0 - x), sgn)


def gamma_value(x: float) -> float:
    """Gamma(x) as a float; raises :class:`PoleError` at nonpositive integers."""
    g = signed_log_gamma(x)
    if g.is_pole:
        raise PoleError(f"Gamma has a pole at {x}")
    return g.value


def _gamma_ratio(nums: Iterable[float], dens: Iterable[float]) -> SignedLog:
    out = SignedLog(0.0, 1)
    for a in nums:
        out = out * signed_log_gamma(a)
    for b in dens:
        g = signed_log_gamma(b)
        out = out / g if not g.is_pole else SignedLog.pole()
    return out


# -- Fourier constant of homogeneous distributions --------------------------

FT_VARIANTS = ("printed", "cycles", "angular")


def ft_homogeneous_constant(N: int, alpha: float, variant: str = "printed") -> float:
    """Constant ``c`` in ``FT[|z|^(alpha-N)](zeta) = c |zeta|^(-alpha)`` on R^N.

    ``variant`` selects the normalisation:

    ``"printed"``  ``pi^(alpha-N/2) Gamma(alpha/2)/Gamma((N-alpha)/2)`` as
                   usually quoted alongside an ``exp(-i z.zeta)`` kernel.
    ``"cycles"``   ``pi^(N/2-alpha) Gamma(alpha/2)/Gamma((N-alpha)/2)``, the
                   value for the ``exp(-2 pi i z.zeta)`` kernel.
    ``"angular"``  ``2^alpha pi^(N/2) Gamma(alpha/2)/Gamma((N-alpha)/2)``, the
                   value for the ``exp(-i z.zeta)`` kernel used by
                   :func:`fraclap.grid.forward_transform`.

    The first two agree at ``alpha = N/2`` and both satisfy
    ``c(N, alpha) c(N, N - alpha) = 1``; the numerical Hankel oracle in
    :mod:`fraclap.hankel` separates them.
    """
    if int(N) != N or N < 1:
        raise DomainError(f"N must be a positive integer, got {N}", contract="gamma-calculus")
    if not (0 < alpha < N):
        raise DomainError(
            f"alpha must lie in (0, N) = (0, {N}), got {alpha}", contract="gamma-calculus"
        )
    ratio = _gamma_ratio([alpha / 2], [(N - alpha) / 2])
    if variant == "printed":
        log_pref = (alpha - N / 2) * math.log(math.pi)
    elif variant == "cycles":
        log_pref = (N / 2 - alpha) * math.log(math.pi)
    elif variant == "angular":
        log_pref = alpha * math.log(2.0) + (N / 2) * math.log(math.pi)
    else:
        raise DomainError(f"unknown variant {variant!r}; choose from {FT_VARIANTS}", contract="gamma-calculus")
    return math.exp(log_pref + ratio.log_abs)


# -- the multiplicative factor on |y''|^(gamma - n/2) -----------------------


def _check_nkg(n: int, k: int, gamma: float) -> None:
    if int(n) != n or n < 1:
        raise DomainError(f"n must be a positive integer, got {n}", contract="gamma-calculus")
    if int(k) != k or not (0 <= k < n):
        raise DomainError(f"k must be an integer in [0, n), got k={k}, n={n}", contract="gamma-calculus")
    if not (0 < gamma < n / 2):
        raise DomainError(
            f"gamma must lie in (0, n/2) = (0, {n / 2}), got {gamma}", contract="gamma-calculus"
        )


def _lambda_gammas(n: int, k: int, gamma: float) -> SignedLog:
    return _gamma_ratio(
        [0.5 * (n / 2 - k + gamma), 0.5 * (n / 2 + gamma)],
        [0.5 * (n / 2 - gamma), 0.5 * (n / 2 - k - gamma)],
    )


def lambda_factor(n: int, k: int, gamma: float) -> SignedLog:
    """Factor ``lam`` with ``(-Delta)^gamma |y''|^(gamma-n/2) = lam |y''|^(-gamma-n/2)``.

    Chaining the homogeneous Fourier constant twice in the transform
    convention of :mod:`fraclap.grid` (forward with ``c_angular(N, a1)``,
    inverse with ``(2 pi)^-N c_angular(N, a2)``, ``N = n - k``) leaves

        lam = 2^(2 gamma) G((n/2-k+gamma)/2) G((n/2+gamma)/2)
                          / (G((n/2-gamma)/2) G((n/2-k-gamma)/2)).

    Returned as a :class:`SignedLog`; ``is_pole`` when a Gamma argument is a
    nonpositive integer.
    """
    _check_nkg(n, k, gamma)
    return SignedLog(2 * gamma * math.log(2.0), 1) * _lambda_gammas(n, k, gamma)


def lambda_factor_printed(n: int, k: int, gamma: float) -> SignedLog:
    """Same Gamma product with the ``2^(k-n) pi^(k-n+2 gamma)`` prefactor that the
    ``"printed"`` Fourier constant produces.  Same sign as :func:`lambda_factor`,
    different magnitude; kept for comparison only."""
    _check_nkg(n, k, gamma)
    log_pref = (k - n) * math.log(2.0) + (k - n + 2 * gamma) * math.log(math.pi)
    return SignedLog(log_pref, 1) * _lambda_gammas(n, k, gamma)


# -- admissibility -----------------------------------------------------------


@dataclass(frozen=True)
class AdmissibilityReport:
    n: int
    k: int
    gamma: float
    ratio_sign: int | None  # None: a Gamma argument is a pole
    lambda_value: float  # nan when indeterminate
    simple_bound_holds: bool
    dimrest_holds: bool

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "k": self.k,
            "gamma": self.gamma,
            "ratio_sign": self.ratio_sign,
            "lambda": None if math.isnan(self.lambda_value) else self.lambda_value,
            "simple_bound": self.simple_bound_holds,
            "dimrest": self.dimrest_holds,
        }


def dimrest_ratio(n: int, k: int, gamma: float) -> SignedLog:
    """``Gamma(n/4 - k/2 + gamma/2) / Gamma(n/4 - k/2 - gamma/2)``."""
    shift = n / 4 - k / 2
    return _gamma_ratio([shift + gamma / 2], [shift - gamma / 2])


def admissible(n: int, k: int, gamma: float) -> AdmissibilityReport:
    _check_nkg(n, k, gamma)
    ratio = dimrest_ratio(n, k, gamma)
    lam = lambda_factor(n, k, gamma)
    ratio_sign = None if ratio.is_pole else ratio.sign
    return AdmissibilityReport(
        n=n,
        k=k,
        gamma=gamma,
        ratio_sign=ratio_sign,
        lambda_value=lam.value,
        simple_bound_holds=k < (n - 2 * gamma) / 2,
        dimrest_holds=ratio_sign == 1,
    )


def sign_walk(n: int, k: int, gamma_grid: Sequence[float]) -> list[tuple[float, int | None]]:
    """Sign of the admissibility ratio along an increasing grid of gamma values.

    Entries landing exactly on a pole of either Gamma factor carry ``None``.
    """
    prev = -math.inf
    out = []
    for g in gamma_grid:
        if not (0 < g < n / 2):
            raise DomainError(f"gamma grid point {g} outside (0, n/2)", contract="gamma-calculus")
        if g <= prev:
            raise DomainError("gamma grid must be strictly increasing", contract="gamma-calculus")
        prev = g
        r = dimrest_ratio(n, k, g)
        out.append((g, None if r.is_pole else r.sign))
    return out


def sign_walk_poles(n: int, k: int) -> dict[str, list[float]]:
    """Gamma values in (0, n/2) where the ratio's numerator or denominator has a pole.

    The denominator argument ``A - gamma/2`` hits ``0, -1, -2, ...`` at
    ``gamma = 2A, 2A + 2, ...`` (one every 2 units of gamma); the numerator
    ``A + gamma/2`` only when ``A < 0``, at ``gamma = -2A - 2j`` inside ``(0, -2A)``.
    """
    a = n / 4 - k / 2
    top = n / 2
    den = []
    g = 2 * a
    while g < top:
        if g > 0:
            den.append(g)
        g += 2
    num = []
    g = -2 * a
    while g > 0:
        if g < top:
            num.append(g)
        g -= 2
    return {"denominator": den, "numerator": sorted(num)}


# -- other prefactors -------------------------------------------------------


def scattering_prefactor(gamma: float) -> float:
    """``2^(2 gamma) Gamma(gamma) / Gamma(-gamma)``; poles at integer gamma."""
    gamma = float(gamma)
    if gamma == math.floor(gamma):
        raise PoleError(f"scattering prefactor has a pole at integer gamma={gamma}")
    r = _gamma_ratio([gamma], [-gamma])
    return (SignedLog(2 * gamma * math.log(2.0), 1) * r).value


def pv_normalization(n: int, gamma: float) -> float:
    """``2^(2 gamma) Gamma(n/2 + gamma) / (pi^(n/2) |Gamma(-gamma)|)``.

    Makes the difference-kernel integral equal to the ``|eta|^(2 gamma)``
    multiplier for gamma in (0, 1).
    """
    if not (0 < gamma < 1):
        raise DomainError(f"gamma must lie in (0, 1), got {gamma}", contract="spectral-op")
    num = signed_log_gamma(n / 2 + gamma)
    den = signed_log_gamma(-gamma)
    return math.exp(2 * gamma * math.log(2.0) + num.log_abs - (n / 2) * math.log(math.pi) - den.log_abs)


def extension_constant(gamma: float) -> float:
    """``-2^(1-2 gamma) Gamma(1-gamma)/Gamma(gamma)``: weighted Neumann trace of the
    decaying solution of ``(x^(1-2g) U')' = x^(1-2g) U`` with ``U(0) = 1``.

    Reference value only; the extension solver measures this number itself.
    """
    if not (0 < gamma < 1):
        raise DomainError(f"gamma must lie in (0, 1), got {gamma}", contract="extension-solver")
    r = _gamma_ratio([1 - gamma], [gamma])
    return -math.exp((1 - 2 * gamma) * math.log(2.0) + r.log_abs)
