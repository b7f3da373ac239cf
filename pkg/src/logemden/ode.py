"""Adaptive integration of the radial equation in both frames.

The integrator is an embedded Dormand-Prince 5(4) pair with the FSAL
property, a mixed absolute/relative max-norm error control, cubic Hermite
dense output on accepted steps, and event detection with bisection
localization.  Integration is supported in two frames:

* Emden-Fowler (primary): psi'' = -a(t) psi' + b(t) psi - zeta^beta psi^alpha,
  marching in increasing t.  The equation is asymptotically autonomous and
  non-stiff, so this frame does all the production work.
* Physical (cross-validation): u'' = -(n-1)/r u' - u^alpha (log u)^beta,
  marching toward r -> 0+ (decreasing r).

A second, optional step-size limiter keyed to the local fourth derivative
keeps the dense output accurate enough that finite-difference residual
checks of the equation stay near ``fd_target``; without it, the equation
residual of any cubic interpolant is dominated by curvature error that
tolerance tightening cannot remove.
"""

from __future__ import annotations

import enum
import io
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import (
    DomainError,
    RegimeExit,
    SampleBudgetExceeded,
    StepUnderflow,
    ZetaGuard,
)
from .frames import PsiState, RadialState, zeta
from .params import Exponents, coeff_a, coeff_b, constant_A

__all__ = [
    "Frame",
    "EventKind",
    "IntegratorConfig",
    "IntegratorStats",
    "Trajectory",
    "rhs_radial_u",
    "rhs_psi",
    "integrate",
    "detect_event",
]

# Dormand-Prince 5(4) tableau (FSAL: row 7 equals the 5th-order weights).
DP_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
DP_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
DP_B = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0)
DP_E = (71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40)

# Step-controller bounds and the residual-refinement coupling.
SAFETY = 0.9
FAC_MIN = 0.2
FAC_MAX = 5.0
FD_TARGET_FACTOR = 2.0e4  # fd_target defaults to this multiple of rel_tol
# central-difference residual of a cubic-Hermite trajectory is roughly
# h^2 (0.12 |psi''''| + |a| |psi'''| / 6); the cap inverts that with margin
FD_CAP_NUM = 0.85
FD_M4_COEF = 0.12
FD_M3_COEF = 1.0 / 6.0
FD_RELAX = 0.6  # decay time of the running derivative estimates
EVENT_LOC_WIDTH = 1e-8  # bracket width for event localization
PHYSICAL_BLOWUP = 1e250  # overflow guard for u in the physical frame

E_CONST = math.e


class Frame(str, enum.Enum):
    PHYSICAL = "physical"
    EMDEN_FOWLER = "emden_fowler"


class EventKind(str, enum.Enum):
    HITS_ZERO = "hits_zero"
    BLOW_UP = "blow_up"
    ZETA_GUARD = "zeta_guard"


@dataclass(frozen=True)
class IntegratorConfig:
    """Tolerances, guards and budgets for a single integration.

    ``zeta_min`` and ``psi_max`` default to 0.1 * 2/(alpha-1) and
    1e3 * A when left as None.  ``fd_target`` controls the curvature-keyed
    step limiter: None couples it to the tolerance (2e4 * rel_tol),
    ``math.inf`` disables it.
    """

    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_step: Optional[float] = None
    max_samples: int = 200_000
    zeta_min: Optional[float] = None
    psi_max: Optional[float] = None
    fd_target: Optional[float] = None
    first_step: Optional[float] = None

    def __post_init__(self) -> None:
        if not self.rel_tol >= 1e-14:
            raise DomainError(f"rel_tol must be >= 1e-14, got {self.rel_tol}")
        if not self.abs_tol > 0.0:
            raise DomainError(f"abs_tol must be positive, got {self.abs_tol}")
        if self.max_step is not None and not self.max_step > 0.0:
            raise DomainError(f"max_step must be positive, got {self.max_step}")
        if self.max_samples <= 0:
            raise DomainError("max_samples must be positive")

    def resolved_zeta_min(self, e: Exponents) -> float:
        return 0.1 * e.zeta0 if self.zeta_min is None else self.zeta_min

    def resolved_psi_max(self, e: Exponents) -> float:
        return 1e3 * constant_A(e) if self.psi_max is None else self.psi_max

    def resolved_fd_target(self) -> float:
        return FD_TARGET_FACTOR * self.rel_tol if self.fd_target is None else self.fd_target


@dataclass
class IntegratorStats:
    accepted: int = 0
    rejected: int = 0
    rhs_evals: int = 0


@dataclass
class Trajectory:
    """Dense record of one integration.

    Columns are (independent variable, state, first derivative, second
    derivative): (t, psi, psi_t, psi_tt) in the Emden-Fowler frame and
    (r, u, u_r, u_rr) in the physical frame.  ``xs`` is strictly monotone
    (increasing for Emden-Fowler, decreasing for physical).  Dense output
    between samples is cubic Hermite.
    """

    frame: Frame
    xs: np.ndarray
    vals: np.ndarray
    ders: np.ndarray
    secs: np.ndarray
    events: list[tuple[float, str]] = field(default_factory=list)
    stats: IntegratorStats = field(default_factory=IntegratorStats)

    @property
    def n_samples(self) -> int:
        return int(self.xs.shape[0])

    @property
    def x_start(self) -> float:
        return float(self.xs[0])

    @property
    def x_end(self) -> float:
        return float(self.xs[-1])

    @property
    def terminal_event(self) -> Optional[str]:
        return self.events[-1][1] if self.events else None

    def _locate(self, x: np.ndarray) -> np.ndarray:
        xs = self.xs
        if xs[-1] >= xs[0]:
            idx = np.searchsorted(xs, x, side="right") - 1
        else:
            idx = xs.shape[0] - 1 - np.searchsorted(xs[::-1], x, side="left")
            idx = np.where(np.asarray(x) == xs[0], 0, idx)
        return np.clip(idx, 0, xs.shape[0] - 2)

    def eval_many(self, x: Sequence[float]) -> tuple[np.ndarray, np.ndarray]:
        """Cubic-Hermite dense output: values and first derivatives at x."""
        x = np.asarray(x, dtype=float)
        i = self._locate(x)
        h = self.xs[i + 1] - self.xs[i]
        s = (x - self.xs[i]) / h
        v = _hermite(self.vals[i], self.ders[i] * h, self.vals[i + 1], self.ders[i + 1] * h, s)
        w = _hermite(self.ders[i], self.secs[i] * h, self.ders[i + 1], self.secs[i + 1] * h, s)
        return v, w

    def eval(self, x: float) -> tuple[float, float]:
        v, w = self.eval_many(np.asarray([x]))
        return float(v[0]), float(w[0])

    def tail_mask(self, length: float) -> np.ndarray:
        """Boolean mask of samples within `length` of the final abscissa."""
        return np.abs(self.xs - self.xs[-1]) <= length

    def to_csv(self, path: Optional[str] = None) -> str:
        """Serialize samples to CSV with 17 significant digits."""
        header = (
            "t,psi,psi_t,psi_tt"
            if self.frame is Frame.EMDEN_FOWLER
            else "r,u,u_r,u_rr"
        )
        buf = io.StringIO()
        buf.write(header + "\n")
        for k in range(self.n_samples):
            buf.write(
                "%.17g,%.17g,%.17g,%.17g\n"
                % (self.xs[k], self.vals[k], self.ders[k], self.secs[k])
            )
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(text)
        return text

    @classmethod
    def from_csv(cls, text: str) -> "Trajectory":
        lines = [ln for ln in text.strip().splitlines() if ln]
        frame = Frame.EMDEN_FOWLER if lines[0].startswith("t,") else Frame.PHYSICAL
        data = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]])
        return cls(
            frame=frame,
            xs=data[:, 0],
            vals=data[:, 1],
            ders=data[:, 2],
            secs=data[:, 3],
        )


def _hermite(y0, m0, y1, m1, s):
    """Cubic Hermite on the unit interval; m are endpoint slopes times h."""
    s2 = s * s
    s3 = s2 * s
    return (
        (2 * s3 - 3 * s2 + 1) * y0
        + (s3 - 2 * s2 + s) * m0
        + (-2 * s3 + 3 * s2) * y1
        + (s3 - s2) * m1
    )


def rhs_radial_u(s: RadialState, e: Exponents) -> float:
    """Second radial derivative u_rr = -(n-1)/r u_r - u^alpha (log u)^beta.

    Defined on the working regime u >= e, where |log u|^beta = (log u)^beta
    for every beta; raises :class:`RegimeExit` below it.
    """
    if not s.r > 0.0:
        raise DomainError(f"rhs_radial_u requires r > 0, got r={s.r}")
    if s.u < E_CONST:
        raise RegimeExit(f"u={s.u} left the working regime u >= e")
    logu = math.log(s.u)
    force = math.exp(e.alpha * logu + e.beta * math.log(logu))
    return -(e.n - 1.0) / s.r * s.u_r - force


def rhs_psi(p: PsiState, e: Exponents, zeta_min: Optional[float] = None) -> float:
    """Second derivative psi_tt = -a(t) psi_t + b(t) psi - zeta^beta psi^alpha.

    For beta != 0 the factor zeta^beta is evaluated as exp(beta log zeta)
    and guarded: zeta below ``zeta_min`` (default 0.1 * 2/(alpha-1)) raises
    :class:`ZetaGuard`, because such states are outside the regime where
    the transformed equation is meaningful.
    """
    if not p.t > 0.0:
        raise DomainError(f"rhs_psi requires t > 0, got t={p.t}")
    if not p.psi > 0.0:
        raise DomainError(f"rhs_psi requires psi > 0, got psi={p.psi}")
    if e.beta == 0.0:
        zb = 1.0
    else:
        zmin = 0.1 * e.zeta0 if zeta_min is None else zeta_min
        z = zeta(p.t, p.psi, e)
        if z < zmin:
            raise ZetaGuard(f"zeta={z} below guard {zmin} at t={p.t}")
        zb = math.exp(e.beta * math.log(z))
    return -coeff_a(p.t, e) * p.psi_t + coeff_b(p.t, e) * p.psi - zb * p.psi**e.alpha


def detect_event(
    state: PsiState | RadialState,
    e: Exponents,
    cfg: Optional[IntegratorConfig] = None,
) -> Optional[EventKind]:
    """Pointwise event test; first match of hits-zero, blow-up, zeta-guard.

    In the physical frame the hits-zero event is the regime exit u <= e.
    """
    cfg = cfg or IntegratorConfig()
    if isinstance(state, PsiState):
        if state.psi <= 0.0:
            return EventKind.HITS_ZERO
        if state.psi >= cfg.resolved_psi_max(e):
            return EventKind.BLOW_UP
        if e.beta != 0.0 and zeta(state.t, state.psi, e) < cfg.resolved_zeta_min(e):
            return EventKind.ZETA_GUARD
        return None
    if state.u <= E_CONST:
        return EventKind.HITS_ZERO
    if state.u >= PHYSICAL_BLOWUP:
        return EventKind.BLOW_UP
    return None


# ---------------------------------------------------------------------------
# Right-hand sides used inside the stepper.  Stage states may overshoot the
# admissible region before a step is rejected or an event localized, so these
# soft variants clamp instead of raising; events stop the integration before
# clamped dynamics can contaminate accepted output.


def _soft_rhs_psi(e: Exponents, zeta_floor: float) -> Callable[[float, float, float], float]:
    alpha = e.alpha
    beta = e.beta
    z0 = e.zeta0
    n2 = e.n - 2.0
    if beta == 0.0:
        a0 = 2.0 * z0 - n2
        b0 = z0 * (n2 - z0)

        def f(t: float, v: float, w: float) -> float:
            vp = v if v > 0.0 else 0.0
            return -a0 * w + b0 * v - vp**alpha

        return f

    c_beta = beta / (alpha - 1.0)

    def f(t: float, v: float, w: float) -> float:
        a = 2.0 * z0 - n2 - 2.0 * c_beta / t
        cb = c_beta / t
        b = (n2 - z0 + cb) * (z0 - cb) - cb / t
        vp = v if v > 1e-300 else 1e-300
        z = z0 - c_beta * math.log(t) / t + math.log(vp) / t
        if z < zeta_floor:
            z = zeta_floor
        return -a * w + b * v - math.exp(beta * math.log(z)) * vp**alpha

    return f


def _soft_rhs_radial(e: Exponents) -> Callable[[float, float, float], float]:
    alpha = e.alpha
    beta = e.beta
    n1 = e.n - 1.0
    # keeps log u away from 0 so (log u)^beta stays real past the regime exit
    u_floor = math.exp(0.5)

    def f(r: float, v: float, w: float) -> float:
        vp = v if v > u_floor else u_floor
        logu = math.log(vp)
        force = math.exp(alpha * logu + beta * math.log(logu))
        return -n1 / r * w - force

    return f


def _psi_events(
    e: Exponents, zeta_min: float, psi_max: float
) -> list[tuple[str, Callable[[float, float, float], float]]]:
    events: list[tuple[str, Callable[[float, float, float], float]]] = [
        (EventKind.HITS_ZERO.value, lambda t, v, w: v),
        (EventKind.BLOW_UP.value, lambda t, v, w: psi_max - v),
    ]
    if e.beta != 0.0:
        c_beta = e.beta / (e.alpha - 1.0)
        z0 = e.zeta0

        def g_zeta(t: float, v: float, w: float) -> float:
            vp = v if v > 1e-300 else 1e-300
            return z0 - c_beta * math.log(t) / t + math.log(vp) / t - zeta_min

        events.append((EventKind.ZETA_GUARD.value, g_zeta))
    return events


def _radial_events(e: Exponents) -> list[tuple[str, Callable[[float, float, float], float]]]:
    return [
        (EventKind.HITS_ZERO.value, lambda r, v, w: v - E_CONST),
        (EventKind.BLOW_UP.value, lambda r, v, w: PHYSICAL_BLOWUP - v),
    ]


def integrate(
    frame: Frame,
    initial: PsiState | RadialState,
    span: tuple[float, float],
    e: Exponents,
    cfg: Optional[IntegratorConfig] = None,
    extra_events: Optional[Sequence[tuple[str, Callable[[float, float, float], float]]]] = None,
) -> Trajectory:
    """Integrate from ``initial`` over ``span`` and return the trajectory.

    Emden-Fowler spans increase in t; physical spans decrease in r toward
    the singularity.  Integration stops at the span end or at the first
    event, whichever comes first; the final sample is the event state
    localized to within 1e-8 in the independent variable.
    """
    cfg = cfg or IntegratorConfig()
    x0, x_end = float(span[0]), float(span[1])
    if frame is Frame.EMDEN_FOWLER:
        if not isinstance(initial, PsiState):
            raise DomainError("Emden-Fowler integration needs a PsiState")
        if not x_end > x0 > 0.0:
            raise DomainError(f"Emden-Fowler span must increase from t > 0, got {span}")
        if abs(initial.t - x0) > 1e-12 * max(1.0, abs(x0)):
            raise DomainError("span start must match the initial state's t")
        y0 = (initial.psi, initial.psi_t)
        rhs = _soft_rhs_psi(e, 0.5 * cfg.resolved_zeta_min(e))
        events = _psi_events(e, cfg.resolved_zeta_min(e), cfg.resolved_psi_max(e))
        max_step = cfg.max_step if cfg.max_step is not None else 5.0
    else:
        if not isinstance(initial, RadialState):
            raise DomainError("physical integration needs a RadialState")
        if not 0.0 < x_end < x0 < 1.0:
            raise DomainError(f"physical span must decrease toward r -> 0 inside (0,1), got {span}")
        if abs(initial.r - x0) > 1e-12 * max(1.0, abs(x0)):
            raise DomainError("span start must match the initial state's r")
        y0 = (initial.u, initial.u_r)
        rhs = _soft_rhs_radial(e)
        events = _radial_events(e)
        max_step = cfg.max_step if cfg.max_step is not None else (x0 - x_end) / 20.0
    if extra_events:
        events = events + list(extra_events)
    if frame is Frame.EMDEN_FOWLER:
        a0_abs = abs(2.0 * e.zeta0 - e.n + 2.0)

        def damping(x: float) -> float:
            return abs(coeff_a(x, e)) if e.beta != 0.0 else a0_abs

        def local_scale(x: float, v: float, w: float) -> float:
            b = coeff_b(x, e) if e.beta != 0.0 else e.zeta0 * (e.n - 2.0 - e.zeta0)
            return max(1.0, abs(b * v), damping(x) * abs(w))
    else:
        def damping(x: float) -> float:
            return (e.n - 1.0) / x

        def local_scale(x: float, v: float, w: float) -> float:
            return max(1.0, damping(x) * abs(w))
    return _march(frame, rhs, events, x0, x_end, y0, cfg, max_step, damping, local_scale)


def _march(
    frame: Frame,
    rhs: Callable[[float, float, float], float],
    events: Sequence[tuple[str, Callable[[float, float, float], float]]],
    x0: float,
    x_end: float,
    y0: tuple[float, float],
    cfg: IntegratorConfig,
    max_step: float,
    damping: Callable[[float], float],
    local_scale: Callable[[float, float, float], float],
) -> Trajectory:
    sign = 1.0 if x_end > x0 else -1.0
    span_len = abs(x_end - x0)
    rel, ab = cfg.rel_tol, cfg.abs_tol
    fd_target = cfg.resolved_fd_target()
    fd_on = math.isfinite(fd_target)

    stats = IntegratorStats()
    xs = [x0]
    v, w = y0
    f0 = rhs(x0, v, w)
    stats.rhs_evals += 1
    vals, ders, secs = [v], [w], [f0]
    ev_list: list[tuple[float, str]] = []

    # initial-state event check
    for kind, g in events:
        if g(x0, v, w) <= 0.0:
            ev_list.append((x0, kind))
            return _build(frame, xs, vals, ders, secs, ev_list, stats)

    # running third/fourth-derivative estimates from the last three f samples
    hist_x = [x0]
    hist_f = [f0]
    m3 = 0.0
    m4 = 0.0

    def h_cap() -> float:
        # budget scales with the local term size of the equation, so the
        # *relative* dense-output residual is what the cap controls
        if not fd_on:
            return math.inf
        m_eff = FD_M4_COEF * m4 + FD_M3_COEF * damping(x) * m3
        if m_eff <= 0.0:
            return math.inf
        return math.sqrt(FD_CAP_NUM * fd_target * local_scale(x, v, w) / m_eff)

    h = cfg.first_step if cfg.first_step is not None else min(1e-3 * span_len, max_step)
    if fd_on:
        # hold steps small until the fourth-derivative estimate exists
        h = min(h, 1e-4)
    x = x0
    rejected_last = False

    while True:
        remaining = (x_end - x) * sign
        if remaining <= 1e-14 * span_len:
            break
        h = min(h, max_step, h_cap(), remaining)
        if h < 1e-14 * span_len:
            raise StepUnderflow(f"step {h} underflowed at x={x}")
        # snap the step so x + hs is exactly representable; otherwise the
        # stored (abscissa, state) pairs disagree by |y'| ulp(x), which
        # finite-difference checks amplify at large |x|
        hs = (x + h * sign) - x
        if hs == 0.0:
            raise StepUnderflow(f"step below ulp({x})")

        # Dormand-Prince stages; k[i] = (w_stage, f_stage)
        kp = [w]
        kf = [f0]
        for i in range(1, 7):
            av = 0.0
            aw = 0.0
            row = DP_A[i]
            for j in range(i):
                av += row[j] * kp[j]
                aw += row[j] * kf[j]
            vi = v + hs * av
            wi = w + hs * aw
            fi = rhs(x + DP_C[i] * hs, vi, wi)
            kp.append(wi)
            kf.append(fi)
        stats.rhs_evals += 6
        v_new = vi  # stage 7 state is the 5th-order solution (FSAL)
        w_new = wi
        f_new = kf[6]

        err_v = 0.0
        err_w = 0.0
        for j in range(7):
            err_v += DP_E[j] * kp[j]
            err_w += DP_E[j] * kf[j]
        err_v *= hs
        err_w *= hs
        sc_v = ab + rel * max(abs(v), abs(v_new))
        sc_w = ab + rel * max(abs(w), abs(w_new))
        err = max(abs(err_v) / sc_v, abs(err_w) / sc_w)

        if err <= 1.0:
            x_prev, v_prev, w_prev, f_prev = x, v, w, f0
            x += hs
            v, w, f0 = v_new, w_new, f_new
            stats.accepted += 1
            xs.append(x)
            vals.append(v)
            ders.append(w)
            secs.append(f0)
            if len(xs) > cfg.max_samples:
                raise SampleBudgetExceeded(
                    f"exceeded max_samples={cfg.max_samples} at x={x}"
                )

            hist_x.append(x)
            hist_f.append(f0)
            if len(hist_x) > 3:
                hist_x.pop(0)
                hist_f.pop(0)
            if len(hist_x) == 3:
                d01 = (hist_f[1] - hist_f[0]) / (hist_x[1] - hist_x[0])
                d12 = (hist_f[2] - hist_f[1]) / (hist_x[2] - hist_x[1])
                # decaying max: the raw estimates dip through zero within each
                # oscillation period, which would release the cap mid-transient
                decay = math.exp(-abs(hs) / FD_RELAX)
                m3 = max(abs(d12), m3 * decay)
                m4 = max(abs(2.0 * (d12 - d01) / (hist_x[2] - hist_x[0])), m4 * decay)

            v_mid = _hermite(v_prev, w_prev * hs, v, w * hs, 0.5)
            w_mid = _hermite(w_prev, f_prev * hs, w, f0 * hs, 0.5)
            hit: Optional[tuple[float, str, float, float]] = None
            for kind, g in events:
                g_mid = g(x_prev + 0.5 * hs, v_mid, w_mid)
                g_now = g(x, v, w)
                if g_now <= 0.0 or g_mid <= 0.0:
                    s_hi = 0.5 if g_mid <= 0.0 else 1.0
                    x_ev, v_ev, w_ev = _localize(
                        g, x_prev, hs, v_prev, w_prev, f_prev, v, w, f0, 0.0, s_hi
                    )
                    # earliest crossing along the step wins
                    if hit is None or (x_ev - hit[0]) * sign < 0.0:
                        hit = (x_ev, kind, v_ev, w_ev)
            if hit is not None:
                x_ev, kind, v_ev, w_ev = hit
                f_ev = rhs(x_ev, v_ev, w_ev)
                stats.rhs_evals += 1
                xs[-1], vals[-1], ders[-1], secs[-1] = x_ev, v_ev, w_ev, f_ev
                ev_list.append((x_ev, kind))
                break

            fac = SAFETY * err ** -0.2 if err > 0.0 else FAC_MAX
            fac_top = FAC_MAX if not rejected_last else 1.0
            if fd_on and m4 == 0.0 and m3 == 0.0:
                fac_top = min(fac_top, 2.0)
            fac = min(fac_top, max(FAC_MIN, fac))
            h = abs(hs) * fac
            rejected_last = False
        else:
            stats.rejected += 1
            fac = max(FAC_MIN, min(1.0, SAFETY * err ** -0.2))
            h = abs(hs) * fac
            rejected_last = True

    return _build(frame, xs, vals, ders, secs, ev_list, stats)


def _localize(g, x_prev, hs, v0, w0, f0, v1, w1, f1, s_lo, s_hi):
    """Bisect the dense output for the event crossing; width <= 1e-8 in x."""
    for _ in range(80):
        if abs(hs) * (s_hi - s_lo) <= EVENT_LOC_WIDTH:
            break
        s_mid = 0.5 * (s_lo + s_hi)
        vm = float(_hermite(v0, w0 * hs, v1, w1 * hs, s_mid))
        wm = float(_hermite(w0, f0 * hs, w1, f1 * hs, s_mid))
        if g(x_prev + s_mid * hs, vm, wm) <= 0.0:
            s_hi = s_mid
        else:
            s_lo = s_mid
    v_ev = float(_hermite(v0, w0 * hs, v1, w1 * hs, s_hi))
    w_ev = float(_hermite(w0, f0 * hs, w1, f1 * hs, s_hi))
    return x_prev + s_hi * hs, v_ev, w_ev


def _build(frame, xs, vals, ders, secs, ev_list, stats) -> Trajectory:
    return Trajectory(
        frame=frame,
        xs=np.asarray(xs, dtype=float),
        vals=np.asarray(vals, dtype=float),
        ders=np.asarray(ders, dtype=float),
        secs=np.asarray(secs, dtype=float),
        events=ev_list,
        stats=stats,
    )
