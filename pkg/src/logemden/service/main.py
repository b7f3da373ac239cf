"""FastAPI service exposing the laboratory over HTTP.

The CLI is a thin client of these endpoints (in-process by default); any
other client can drive long-running sweeps or separatrix searches the
same way.  Library errors map to HTTP 400 with the error class name in
the payload.
"""

from __future__ import annotations

import math

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from ..analysis import SweepConfig, psi_residual, run_sweep
from ..classify import Thresholds, classify, find_separatrix, separatrix_rate_fit
from ..errors import LogEmdenError
from ..frames import PsiState, from_psi_state
from ..ode import Frame, IntegratorConfig, integrate
from ..params import constant_A, limit_coefficients, validate_exponents
from ..verify import run_verification
from .schemas import (
    CheckOut,
    ClassifyRequest,
    ClassifyResponse,
    ConstantsResponse,
    EventOut,
    ExponentsIn,
    SeparatrixRequest,
    SeparatrixResponse,
    SimulateRequest,
    SimulateResponse,
    SweepRequest,
    VerifyRequest,
    VerifyResponse,
)

app = FastAPI(
    title="logemden",
    description=(
        "Numerical laboratory for radial singular solutions of "
        "-laplace(u) = u^alpha |log u|^beta"
    ),
    version="0.1.0",
)


@app.exception_handler(LogEmdenError)
async def _domain_error(request: Request, exc: LogEmdenError) -> JSONResponse:
    return JSONResponse(
        status_code=400,
        content={"detail": str(exc), "error_type": type(exc).__name__},
    )


def _integrator_config(opts) -> IntegratorConfig:
    return IntegratorConfig(
        rel_tol=opts.rel_tol,
        abs_tol=opts.abs_tol,
        max_step=opts.max_step,
        max_samples=opts.max_samples,
        zeta_min=opts.zeta_min,
        psi_max=opts.psi_max,
        fd_target=opts.fd_target,
    )


def _thresholds(opts) -> Thresholds:
    return Thresholds(
        conv_tol=opts.conv_tol,
        zero_tol=opts.zero_tol,
        tail_fraction=opts.tail_fraction,
        fit_window=opts.fit_window,
    )


def _default_t0(e) -> float:
    return max(5.0, 2.0 * abs(e.beta) / (e.alpha - 1.0))


@app.get("/health")
def health() -> dict:
    return {"status": "ok"}


@app.post("/constants", response_model=ConstantsResponse)
def constants(req: ExponentsIn) -> ConstantsResponse:
    e = validate_exponents(req.n, req.alpha, req.beta)
    lc = limit_coefficients(e)
    return ConstantsResponse(
        n=e.n,
        alpha=e.alpha,
        beta=e.beta,
        A=lc.A,
        a0=lc.a0,
        b0=lc.b0,
        zeta0=lc.zeta0,
        lambda_minus=lc.lambda_minus,
        lambda_plus=lc.lambda_plus,
        identity_residual=lc.a0**2 + 4.0 * lc.b0 - (e.n - 2.0) ** 2,
        admissible_alpha=e.alpha_interval(),
    )


@app.post("/simulate", response_model=SimulateResponse)
def simulate(req: SimulateRequest) -> SimulateResponse:
    e = validate_exponents(req.exponents.n, req.exponents.alpha, req.exponents.beta)
    t0 = req.t0 if req.t0 is not None else _default_t0(e)
    psi0 = req.psi0 if req.psi0 is not None else constant_A(e)
    cfg = _integrator_config(req.integrator)
    initial = PsiState(t0, psi0, req.dpsi0)
    if req.frame == "ef":
        traj = integrate(Frame.EMDEN_FOWLER, initial, (t0, t0 + req.span), e, cfg)
        residual = psi_residual(traj, e) if traj.n_samples >= 5 else None
    else:
        radial = from_psi_state(initial, e)
        r_end = math.exp(-(t0 + req.span))
        traj = integrate(Frame.PHYSICAL, radial, (radial.r, r_end), e, cfg)
        residual = None
    return SimulateResponse(
        frame=traj.frame.value,
        x_start=traj.x_start,
        x_end=traj.x_end,
        n_samples=traj.n_samples,
        terminal_value=float(traj.vals[-1]),
        terminal_derivative=float(traj.ders[-1]),
        events=[EventOut(x=x, kind=k) for x, k in traj.events],
        accepted=traj.stats.accepted,
        rejected=traj.stats.rejected,
        rhs_evals=traj.stats.rhs_evals,
        psi_residual=residual,
        csv=traj.to_csv() if req.include_csv else None,
    )


@app.post("/classify", response_model=ClassifyResponse)
def classify_endpoint(req: ClassifyRequest) -> ClassifyResponse:
    e = validate_exponents(req.exponents.n, req.exponents.alpha, req.exponents.beta)
    t0 = req.t0 if req.t0 is not None else _default_t0(e)
    cfg = _integrator_config(req.integrator)
    th = _thresholds(req.thresholds)
    traj = integrate(
        Frame.EMDEN_FOWLER,
        PsiState(t0, req.psi0, req.dpsi0),
        (t0, t0 + req.horizon),
        e,
        cfg,
    )
    c = classify(traj, e, th)
    lc = limit_coefficients(e)
    windows = {
        k: v
        for k, v in c.diagnostics.items()
        if k in ("tail_window", "decay_window", "half_rates", "trend")
    }
    return ClassifyResponse(
        outcome=c.outcome,
        terminal_value=c.terminal_value,
        fitted_rate=c.fitted_rate,
        A=lc.A,
        lambda_minus=lc.lambda_minus,
        windows=windows,
        tolerances={
            "conv_tol": th.resolved_conv_tol(e),
            "zero_tol": th.zero_tol,
            "tail_fraction": th.tail_fraction,
            "fit_window": th.fit_window,
        },
        events=[EventOut(x=x, kind=k) for x, k in traj.events],
    )


@app.post("/separatrix", response_model=SeparatrixResponse)
def separatrix(req: SeparatrixRequest) -> SeparatrixResponse:
    e = validate_exponents(req.exponents.n, req.exponents.alpha, req.exponents.beta)
    th = _thresholds(req.thresholds)
    slope = find_separatrix(
        e,
        req.t0,
        req.psi0,
        (req.slope_lo, req.slope_hi),
        th,
        horizon=req.horizon,
    )
    rate, _ = separatrix_rate_fit(e, req.t0, req.psi0, slope, th)
    lc = limit_coefficients(e)
    return SeparatrixResponse(
        critical_slope=slope,
        fitted_rate=rate,
        rate_target=lc.lambda_minus,
        rate_rel_error=abs(rate - lc.lambda_minus) / abs(lc.lambda_minus),
        psi0=req.psi0,
        t0=req.t0,
    )


@app.post("/sweep")
def sweep(req: SweepRequest) -> dict:
    cfg = SweepConfig.from_dict(req.config)
    report = run_sweep(cfg)
    return {"config": report.config, "cells": report.cells, "summary": report.summary}


@app.post("/verify", response_model=VerifyResponse)
def verify(req: VerifyRequest) -> VerifyResponse:
    checks = run_verification(scale=req.scale, jobs=req.jobs)
    return VerifyResponse(
        passed=all(c.passed for c in checks),
        checks=[CheckOut(name=c.name, passed=c.passed, detail=c.detail) for c in checks],
    )
