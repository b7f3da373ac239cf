"""Exact maps between the physical radial frame and the log-radius frame.

A radial state carries (r, u, u_r) with 0 < r < 1.  The log-radius frame
uses t = -log r and the scaled unknown psi = phi(r) u, which turns the
radial equation into an asymptotically autonomous second-order ODE in t.
Both maps are closed-form and mutually inverse; no integration happens
here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError
from .params import Exponents, constant_A, eta, phi, upper_envelope

__all__ = [
    "RadialState",
    "PsiState",
    "to_psi_state",
    "from_psi_state",
    "zeta",
    "exact_profile",
    "exact_profile_gradient",
    "profile_equation_residual",
]


@dataclass(frozen=True)
class RadialState:
    """Point of the physical phase space: radius, value, radial derivative.

    The working regime keeps 0 < r < 1 and u > 1 (log u > 0); states
    produced by event-terminated integrations may sit on the boundary.
    """

    r: float
    u: float
    u_r: float


@dataclass(frozen=True)
class PsiState:
    """Point of the transformed phase space at t = -log r."""

    t: float
    psi: float
    psi_t: float


def to_psi_state(s: RadialState, e: Exponents) -> PsiState:
    """Map a radial state to the log-radius frame.

    t = -log r, psi = phi(r) u, psi_t = -eta(r) psi - r phi(r) u_r.
    """
    if not 0.0 < s.r < 1.0:
        raise DomainError(f"to_psi_state requires 0 < r < 1, got r={s.r}")
    if not s.u > 0.0:
        raise DomainError(f"to_psi_state requires u > 0, got u={s.u}")
    ph = phi(s.r, e)
    psi = ph * s.u
    psi_t = -eta(s.r, e) * psi - s.r * ph * s.u_r
    return PsiState(t=-math.log(s.r), psi=psi, psi_t=psi_t)


def from_psi_state(p: PsiState, e: Exponents) -> RadialState:
    """Inverse map: r = e^-t, u = psi/phi(r), u_r = -(psi_t + eta psi)/(r phi)."""
    if not p.t > 0.0:
        raise DomainError(f"from_psi_state requires t > 0, got t={p.t}")
    r = math.exp(-p.t)
    ph = phi(r, e)
    u = p.psi / ph
    u_r = -(p.psi_t + eta(r, e) * p.psi) / (r * ph)
    return RadialState(r=r, u=u, u_r=u_r)


def zeta(t: float, psi: float, e: Exponents) -> float:
    """Normalized logarithm zeta = log u / log(1/r) expressed in (t, psi).

    zeta(t, psi) = 2/(alpha-1) - (beta/(alpha-1)) log(t)/t + log(psi)/t,
    which tends to 2/(alpha-1) along singular-type trajectories.
    """
    if not t > 0.0:
        raise DomainError(f"zeta requires t > 0, got t={t}")
    if not psi > 0.0:
        raise DomainError(f"zeta requires psi > 0, got psi={psi}")
    return e.zeta0 - (e.beta / (e.alpha - 1.0)) * math.log(t) / t + math.log(psi) / t


def exact_profile(r: float, e: Exponents) -> float:
    """Leading singular profile A r^(-2/(alpha-1)) (log(1/r))^(-beta/(alpha-1)).

    For beta = 0 this is an exact solution of the radial equation; for
    beta != 0 it is the leading asymptotic term only.
    """
    return constant_A(e) * upper_envelope(r, e)


def exact_profile_gradient(r: float, e: Exponents) -> float:
    """Analytic radial derivative of the profile: -eta(r) u(r) / r."""
    return -eta(r, e) * exact_profile(r, e) / r


def profile_equation_residual(r: float, e: Exponents) -> float:
    """Relative residual of the beta=0 profile in the radial equation.

    Evaluates |u'' + (n-1)/r u' + u^alpha| / u^alpha with the analytic
    derivatives of A r^(-2/(alpha-1)); identically zero in exact
    arithmetic when beta = 0, so the float value is pure round-off.
    """
    if e.beta != 0.0:
        raise DomainError("profile_equation_residual is defined for beta = 0")
    z = e.zeta0
    u = exact_profile(r, e)
    u_r = -z * u / r
    u_rr = z * (z + 1.0) * u / (r * r)
    force = u**e.alpha
    return abs(u_rr + (e.n - 1.0) / r * u_r + force) / force
