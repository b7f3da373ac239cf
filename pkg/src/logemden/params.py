"""Problem parameters and every closed-form scalar the model defines.

The equation under study is the radial semilinear problem

    -u'' - (n-1)/r u' = u^alpha (log u)^beta,   0 < r < 1,

with n >= 3 and n/(n-2) < alpha < (n+2)/(n-2).  This module holds the
validated exponent triple and the closed-form quantities attached to it:
the singular-profile amplitude ``A``, the limiting coefficients ``a0`` and
``b0`` of the transformed equation, the characteristic roots, the
time-dependent coefficients a(t), b(t), the scaling factor phi(r) and its
logarithmic rate eta(r), the Lambert W function, and the inversion of the
growth product U^(alpha-1) (log U)^beta.

All functions are pure and operate on 64-bit floats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError, NonpositiveTime, NoMonotoneRoot, OutOfRange

__all__ = [
    "Exponents",
    "LimitCoefficients",
    "validate_exponents",
    "constant_A",
    "limit_coefficients",
    "coeff_a",
    "coeff_b",
    "eta",
    "phi",
    "lambert_w",
    "invert_growth",
    "upper_envelope",
]


@dataclass(frozen=True)
class Exponents:
    """Validated exponent triple (n, alpha, beta).

    Construct through :func:`validate_exponents`; direct construction skips
    the admissibility checks.
    """

    n: int
    alpha: float
    beta: float

    @property
    def zeta0(self) -> float:
        """Limiting growth rate 2/(alpha-1) of log u / log(1/r)."""
        return 2.0 / (self.alpha - 1.0)

    def alpha_interval(self) -> tuple[float, float]:
        """Open admissible interval for alpha at this dimension."""
        return self.n / (self.n - 2.0), (self.n + 2.0) / (self.n - 2.0)


@dataclass(frozen=True)
class LimitCoefficients:
    """Limits of the transformed equation's coefficients and derived roots.

    ``lambda_minus`` and ``lambda_plus`` solve lambda^2 + a0*lambda - b0 = 0;
    the discriminant satisfies a0^2 + 4*b0 = (n-2)^2 exactly, and the
    negative root equals -2/(alpha-1).
    """

    a0: float
    b0: float
    zeta0: float
    lambda_minus: float
    lambda_plus: float
    A: float


def validate_exponents(n: int, alpha: float, beta: float) -> Exponents:
    """Validate (n, alpha, beta) and return the exponent triple.

    Requires n >= 3 integral, alpha strictly inside (n/(n-2), (n+2)/(n-2)),
    and beta finite.  Raises :class:`OutOfRange` naming the violated
    constraint and, for alpha, the admissible open interval.
    """
    if not isinstance(n, int) or isinstance(n, bool):
        raise OutOfRange(f"dimension n must be an integer, got {n!r}")
    if n < 3:
        raise OutOfRange(f"dimension n must satisfy n >= 3, got n={n}")
    alpha = float(alpha)
    beta = float(beta)
    if not math.isfinite(alpha):
        raise OutOfRange(f"alpha must be finite, got {alpha!r}")
    if not math.isfinite(beta):
        raise OutOfRange(f"beta must be finite, got {beta!r}")
    lo = n / (n - 2.0)
    hi = (n + 2.0) / (n - 2.0)
    if not (lo < alpha < hi):
        raise OutOfRange(
            f"alpha={alpha} out of range for n={n}: admissible alpha interval "
            f"is ({_fmt(lo)}, {_fmt(hi)}), endpoints excluded"
        )
    return Exponents(n=n, alpha=alpha, beta=beta)


def _fmt(x: float) -> str:
    """Render interval endpoints without a trailing .0 for whole numbers."""
    return str(int(x)) if x == int(x) else repr(x)


def constant_A(e: Exponents) -> float:
    """Amplitude A of the singular profile.

    A = [ (2/(alpha-1))^(1-beta) * (n - 2 - 2/(alpha-1)) ]^(1/(alpha-1)),
    positive throughout the admissible exponent range.
    """
    z = e.zeta0
    base = z ** (1.0 - e.beta) * (e.n - 2.0 - z)
    return base ** (1.0 / (e.alpha - 1.0))


def limit_coefficients(e: Exponents) -> LimitCoefficients:
    """Limiting coefficients a0, b0 and the characteristic roots.

    Roots are computed with the cancellation-free quadratic formula:
    a0 > 0 here, so lambda_minus = -(a0 + sqrt(a0^2+4 b0))/2 is computed
    directly and lambda_plus recovered from the product -b0.
    """
    z = e.zeta0
    a0 = 2.0 * z - (e.n - 2.0)
    b0 = z * (e.n - 2.0 - z)
    disc = math.sqrt(a0 * a0 + 4.0 * b0)
    lam_minus = -0.5 * (a0 + disc)
    lam_plus = -b0 / lam_minus
    return LimitCoefficients(
        a0=a0,
        b0=b0,
        zeta0=z,
        lambda_minus=lam_minus,
        lambda_plus=lam_plus,
        A=constant_A(e),
    )


def coeff_a(t: float, e: Exponents) -> float:
    """Damping coefficient a(t) = 4/(alpha-1) - n + 2 - 2 beta/((alpha-1) t)."""
    if t <= 0.0:
        raise NonpositiveTime(f"coefficient a(t) requires t > 0, got t={t}")
    return 2.0 * e.zeta0 - (e.n - 2.0) - 2.0 * e.beta / ((e.alpha - 1.0) * t)


def coeff_b(t: float, e: Exponents) -> float:
    """Restoring coefficient b(t) of the transformed equation.

    b(t) = ((n-2) - 2/(a-1) + beta/((a-1) t)) (2/(a-1) - beta/((a-1) t))
           - beta/((a-1) t^2),  writing a for alpha.
    """
    if t <= 0.0:
        raise NonpositiveTime(f"coefficient b(t) requires t > 0, got t={t}")
    z = e.zeta0
    c = e.beta / ((e.alpha - 1.0) * t)
    return (e.n - 2.0 - z + c) * (z - c) - c / t


def eta(r: float, e: Exponents) -> float:
    """Logarithmic derivative rate eta(r) = 2/(alpha-1) + beta/((alpha-1) log r).

    phi satisfies r phi'(r) = eta(r) phi(r); defined for 0 < r < 1.
    """
    if not 0.0 < r < 1.0:
        raise DomainError(f"eta(r) requires 0 < r < 1, got r={r}")
    return e.zeta0 + e.beta / ((e.alpha - 1.0) * math.log(r))


def phi(r: float, e: Exponents) -> float:
    """Scaling factor phi(r) = r^(2/(alpha-1)) (log(1/r))^(beta/(alpha-1))."""
    if not 0.0 < r < 1.0:
        raise DomainError(f"phi(r) requires 0 < r < 1, got r={r}")
    logr = math.log(r)
    # exp/log form avoids spurious overflow for r near 0 with large beta
    return math.exp(e.zeta0 * logr + (e.beta / (e.alpha - 1.0)) * math.log(-logr))


def lambert_w(s: float, tol: float = 1e-15, max_iter: int = 60) -> float:
    """Principal-branch Lambert W on s >= 0: solves w e^w = s.

    Seeded with log s - log log s for s >= e (the sandwich-bound midpoint)
    and with s itself below e, then polished by Halley iteration.  The
    residual |w e^w - s| lands within a few ulps of s.
    """
    if s < 0.0:
        raise DomainError(f"lambert_w requires s >= 0, got s={s}")
    if s == 0.0:
        return 0.0
    if s >= math.e:
        ls = math.log(s)
        w = ls - math.log(ls) if ls > 1.0 else 1.0
    else:
        w = s if s < 1.0 else 1.0
    for _ in range(max_iter):
        ew = math.exp(w)
        f = w * ew - s
        wp1 = w + 1.0
        # Halley step: quadratic correction of Newton using f'' = e^w (w+2)
        dw = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1))
        w -= dw
        if abs(dw) <= tol * (1.0 + abs(w)):
            break
    return w


def invert_growth(K: float, e: Exponents) -> float:
    """Solve U^(alpha-1) (log U)^beta = K on the monotone branch.

    The product is strictly increasing in U wherever
    (alpha-1) log U + beta > 0; the search is restricted to
    U >= max(e, e^((1-beta)/(alpha-1))), where that margin is at least 1.
    Bisection runs on x = log U, where the equation reads
    (alpha-1) x + beta log x = log K.  Raises :class:`NoMonotoneRoot` when
    K falls below the branch threshold.
    """
    if not (K > 0.0 and math.isfinite(K)):
        raise DomainError(f"invert_growth requires finite K > 0, got K={K}")
    am1 = e.alpha - 1.0
    if e.beta == 0.0:
        # pure power law: exact inversion
        return K ** (1.0 / am1)
    logK = math.log(K)
    x_lo = max(1.0, (1.0 - e.beta) / am1)

    def h(x: float) -> float:
        return am1 * x + e.beta * math.log(x) - logK

    h_lo = h(x_lo)
    if h_lo > 4.0 * abs(logK) * 1e-16 + 1e-300:
        raise NoMonotoneRoot(
            f"K={K} below the monotone-branch threshold for "
            f"alpha={e.alpha}, beta={e.beta}"
        )
    if h_lo >= 0.0:
        return math.exp(x_lo)
    x_hi = max(2.0 * logK / am1, x_lo + 1.0)
    for _ in range(200):
        if h(x_hi) >= 0.0:
            break
        x_hi *= 2.0
    else:
        raise NoMonotoneRoot(f"no bracket found for K={K}")
    for _ in range(200):
        x_mid = 0.5 * (x_lo + x_hi)
        if h(x_mid) < 0.0:
            x_lo = x_mid
        else:
            x_hi = x_mid
        if x_hi - x_lo <= 1e-16 * max(1.0, x_hi):
            break
    return math.exp(0.5 * (x_lo + x_hi))


def upper_envelope(r: float, e: Exponents) -> float:
    """Growth envelope r^(-2/(alpha-1)) (log(1/r))^(-beta/(alpha-1)).

    Equals exact_profile(r)/A; the singular branch satisfies
    u(r) = O(envelope) as r -> 0.
    """
    if not 0.0 < r < 1.0:
        raise DomainError(f"upper_envelope requires 0 < r < 1, got r={r}")
    logr = math.log(r)
    return math.exp(-e.zeta0 * logr - (e.beta / (e.alpha - 1.0)) * math.log(-logr))
