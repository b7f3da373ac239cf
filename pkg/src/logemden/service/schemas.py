"""Pydantic request/response models for the HTTP service."""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, Field


class ExponentsIn(BaseModel):
    n: int = Field(description="space dimension, n >= 3")
    alpha: float = Field(description="power exponent, n/(n-2) < alpha < (n+2)/(n-2)")
    beta: float = Field(description="log-power exponent, any finite real")


class IntegratorOptions(BaseModel):
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_step: Optional[float] = None
    max_samples: int = 200_000
    zeta_min: Optional[float] = None
    psi_max: Optional[float] = None
    fd_target: Optional[float] = None


class ThresholdOptions(BaseModel):
    conv_tol: Optional[float] = None
    zero_tol: float = 1e-3
    tail_fraction: float = 0.25
    fit_window: float = 10.0


class ConstantsResponse(BaseModel):
    n: int
    alpha: float
    beta: float
    A: float
    a0: float
    b0: float
    zeta0: float
    lambda_minus: float
    lambda_plus: float
    identity_residual: float = Field(
        description="a0^2 + 4 b0 - (n-2)^2, zero up to round-off"
    )
    admissible_alpha: tuple[float, float]


class SimulateRequest(BaseModel):
    exponents: ExponentsIn
    frame: Literal["ef", "physical"] = "ef"
    t0: Optional[float] = Field(default=None, description="start; default max(5, 2|beta|/(alpha-1))")
    span: float = Field(default=35.0, gt=0.0, description="extent in t (or in -log r)")
    psi0: Optional[float] = Field(default=None, description="initial psi; default A")
    dpsi0: float = 0.0
    integrator: IntegratorOptions = IntegratorOptions()
    include_csv: bool = True


class EventOut(BaseModel):
    x: float
    kind: str


class SimulateResponse(BaseModel):
    frame: str
    x_start: float
    x_end: float
    n_samples: int
    terminal_value: float
    terminal_derivative: float
    events: list[EventOut]
    accepted: int
    rejected: int
    rhs_evals: int
    psi_residual: Optional[float] = None
    csv: Optional[str] = None


class ClassifyRequest(BaseModel):
    exponents: ExponentsIn
    t0: Optional[float] = None
    horizon: float = Field(default=300.0, gt=0.0)
    psi0: float = Field(gt=0.0)
    dpsi0: float = 0.0
    thresholds: ThresholdOptions = ThresholdOptions()
    integrator: IntegratorOptions = IntegratorOptions()


class ClassifyResponse(BaseModel):
    outcome: str
    terminal_value: float
    fitted_rate: Optional[float]
    A: float
    lambda_minus: float
    windows: dict
    tolerances: dict
    events: list[EventOut]


class SeparatrixRequest(BaseModel):
    exponents: ExponentsIn
    t0: float = 5.0
    psi0: float = Field(gt=0.0)
    slope_lo: float
    slope_hi: float
    horizon: float = 300.0
    thresholds: ThresholdOptions = ThresholdOptions()


class SeparatrixResponse(BaseModel):
    critical_slope: float
    fitted_rate: float
    rate_target: float
    rate_rel_error: float
    psi0: float
    t0: float


class SweepRequest(BaseModel):
    config: dict = Field(default_factory=dict, description="SweepConfig fields")


class VerifyRequest(BaseModel):
    scale: Literal["desk", "default"] = "desk"
    jobs: int = Field(default=1, ge=1)


class CheckOut(BaseModel):
    name: str
    passed: bool
    detail: str


class VerifyResponse(BaseModel):
    passed: bool
    checks: list[CheckOut]
