"""Trajectory classification and separatrix location.

A trajectory in the log-radius frame resolves, in exact arithmetic, to one
of two limits: psi -> A (singular-type solution) or psi -> 0
(removable-type).  Numerically a finite horizon adds two exits: psi
crossing zero (the state leaves the cone of admissible solutions) and the
zeta guard (the transformed equation left its valid regime, which for
beta != 0 happens on every downward exit before psi reaches zero).  The
classifier maps trajectories onto these outcomes from tail behavior alone
and never guesses: a tail that matches no criterion stays Undetermined.

The separatrix search bisects on the initial slope between a
hits-zero outcome and a converges-to-A outcome; the critical trajectory
shadows the stable manifold of the zero saddle, whose departure rate is
the negative characteristic root -2/(alpha-1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import BracketInvalid, DomainError, NonpositiveSamples, TrajectoryTooShort
from .ode import EventKind, Frame, IntegratorConfig, PsiState, Trajectory, integrate
from .params import Exponents, constant_A, limit_coefficients

__all__ = [
    "Outcome",
    "Classification",
    "Thresholds",
    "classify",
    "fit_decay_rate",
    "find_separatrix",
    "separatrix_rate_fit",
]


class Outcome:
    CONVERGES_TO_A = "converges_to_A"
    DECAYS_TO_ZERO = "decays_to_zero"
    HITS_ZERO = "hits_zero"
    BLOW_UP = "blow_up"
    UNDETERMINED = "undetermined"


@dataclass(frozen=True)
class Thresholds:
    """Classification tolerances.

    ``conv_tol`` left as None resolves to 1e-3 for beta = 0 and 5e-2 for
    beta != 0 (the approach to A is only O(log t / t) there).
    """

    conv_tol: Optional[float] = None
    zero_tol: float = 1e-3
    tail_fraction: float = 0.25
    fit_window: float = 10.0

    def __post_init__(self) -> None:
        if self.conv_tol is not None and not 0.0 < self.conv_tol < 1.0:
            raise DomainError("conv_tol must lie in (0, 1)")
        if not 0.0 < self.zero_tol < 1.0:
            raise DomainError("zero_tol must lie in (0, 1)")
        if not 0.0 < self.tail_fraction < 1.0:
            raise DomainError("tail_fraction must lie in (0, 1)")
        if not self.fit_window > 0.0:
            raise DomainError("fit_window must be positive")

    def resolved_conv_tol(self, e: Exponents) -> float:
        if self.conv_tol is not None:
            return self.conv_tol
        return 1e-3 if e.beta == 0.0 else 5e-2


@dataclass
class Classification:
    outcome: str
    terminal_value: float
    fitted_rate: Optional[float] = None
    diagnostics: dict = field(default_factory=dict)


def fit_decay_rate(ts: np.ndarray, psis: np.ndarray) -> float:
    """Least-squares slope of log psi against t; needs psi > 0 throughout."""
    ts = np.asarray(ts, dtype=float)
    psis = np.asarray(psis, dtype=float)
    if ts.size < 2:
        raise NonpositiveSamples("need at least two samples to fit a rate")
    if not np.all(psis > 0.0):
        raise NonpositiveSamples("log-slope fit requires strictly positive psi")
    y = np.log(psis)
    tbar = ts.mean()
    ybar = y.mean()
    dt = ts - tbar
    denom = float(np.dot(dt, dt))
    if denom == 0.0:
        raise NonpositiveSamples("degenerate abscissae in rate fit")
    return float(np.dot(dt, y - ybar) / denom)


def _tail_rate(traj: Trajectory, lo: float, hi: float) -> Optional[float]:
    m = (traj.xs >= lo) & (traj.xs <= hi) & (traj.vals > 0.0)
    if int(m.sum()) < 4:
        return None
    return fit_decay_rate(traj.xs[m], traj.vals[m])


def _decay_tail_ok(traj: Trajectory, zero_lvl: float, th: Thresholds) -> tuple[bool, Optional[float], dict]:
    """Tail test for removable-type behavior: monotone, small, negative slope."""
    below = traj.vals <= zero_lvl
    if not below[-1]:
        return False, None, {}
    # contiguous trailing run below the zero level
    idx = np.nonzero(~below)[0]
    start = int(idx[-1]) + 1 if idx.size else 0
    ts = traj.xs[start:]
    ps = traj.vals[start:]
    pos = ps > 0.0
    ts, ps = ts[pos], ps[pos]
    if ts.size < 4:
        return False, None, {}
    if np.any(np.diff(ps) > 0.0):
        return False, None, {}
    span = float(ts[-1] - ts[0])
    rate = fit_decay_rate(ts, ps) if span > 0.0 else None
    if rate is None or rate >= 0.0:
        return False, None, {}
    diag = {"decay_window": (float(ts[0]), float(ts[-1])), "decay_span": span}
    return True, rate, diag


def _manifold_like(traj: Trajectory, zero_lvl: float, th: Thresholds) -> tuple[bool, Optional[float], dict]:
    """Sustained log-linear decay below the zero level before the crossing.

    Distinguishes stable-manifold shadowing (log-slope stays put over an
    extended stretch) from a transversal zero crossing (slope diverges as
    the crossing nears).  The final 15% of the stretch is dropped, since
    even a shadowing trajectory ends in a plunge once the residual
    unstable component takes over.
    """
    vals, xs = traj.vals, traj.xs
    end = int(vals.shape[0])
    while end > 0 and vals[end - 1] <= 0.0:
        end -= 1
    if end < 8:
        return False, None, {}
    below = vals[:end] <= zero_lvl
    bad = np.nonzero(~below)[0]
    start = int(bad[-1]) + 1 if bad.size else 0
    ts = xs[start:end]
    ps = vals[start:end]
    if ts.size < 8:
        return False, None, {}
    keep = ts <= ts[0] + 0.85 * (ts[-1] - ts[0])
    ts, ps = ts[keep], ps[keep]
    span = float(ts[-1] - ts[0]) if ts.size else 0.0
    if span < 2.0 or ts.size < 8:
        return False, None, {}
    mid = ts[0] + 0.5 * span
    first = ts <= mid
    if int(first.sum()) < 2 or int((~first).sum()) < 2:
        return False, None, {}
    r1 = fit_decay_rate(ts[first], ps[first])
    r2 = fit_decay_rate(ts[~first], ps[~first])
    if not (r1 < 0.0 and r2 < 0.0):
        return False, None, {}
    if abs(r2 - r1) > 0.3 * max(abs(r1), abs(r2)):
        return False, None, {}
    rate = fit_decay_rate(ts, ps)
    return True, rate, {"decay_window": (float(ts[0]), float(ts[-1])), "half_rates": (r1, r2)}


def classify(traj: Trajectory, e: Exponents, th: Optional[Thresholds] = None) -> Classification:
    """Resolve a log-radius-frame trajectory to a dichotomy outcome.

    Event-terminated trajectories map through their event: blow-up passes
    through, a zeta-guard exit with a small decaying tail is
    removable-type, and a zero crossing is removable-type only when the
    approach was manifold-like (sustained log-linear decay) rather than a
    transversal plunge.  Otherwise the tail window decides; a tail that
    meets no criterion is reported Undetermined.
    """
    th = th or Thresholds()
    if traj.frame is not Frame.EMDEN_FOWLER:
        raise TrajectoryTooShort("classification runs on Emden-Fowler trajectories")
    A = constant_A(e)
    conv_tol = th.resolved_conv_tol(e)
    zero_lvl = th.zero_tol * A
    terminal = float(traj.vals[-1])
    event = traj.terminal_event

    if event == EventKind.BLOW_UP.value:
        return Classification(Outcome.BLOW_UP, terminal, None, {"event": event})
    if event == EventKind.ZETA_GUARD.value:
        ok, rate, diag = _decay_tail_ok(traj, zero_lvl, th)
        diag["event"] = event
        if ok:
            return Classification(Outcome.DECAYS_TO_ZERO, terminal, rate, diag)
        # zeta t = log u, so a falling guard exit is the physical-frame
        # regime exit u <= e, which the event contract labels hits-zero
        if traj.ders[-1] < 0.0:
            return Classification(Outcome.HITS_ZERO, terminal, None, diag)
        return Classification(Outcome.UNDETERMINED, terminal, None, diag)
    if event == EventKind.HITS_ZERO.value:
        ok, rate, diag = _manifold_like(traj, zero_lvl, th)
        diag["event"] = event
        if ok:
            return Classification(Outcome.DECAYS_TO_ZERO, terminal, rate, diag)
        return Classification(Outcome.HITS_ZERO, terminal, None, diag)

    span = float(abs(traj.xs[-1] - traj.xs[0]))
    if span < th.fit_window:
        raise TrajectoryTooShort(
            f"trajectory span {span} shorter than fit_window {th.fit_window}"
        )
    # tail window: slow coefficient drift for beta != 0 makes long windows
    # reject genuinely converging tails, so only beta = 0 uses tail_fraction
    tail_len = (
        max(th.fit_window, th.tail_fraction * span) if e.beta == 0.0 else th.fit_window
    )
    tmask = traj.tail_mask(tail_len)
    tail_vals = traj.vals[tmask]
    rel_dev = np.abs(tail_vals - A) / A
    diag = {
        "tail_window": (float(traj.xs[tmask][0]), float(traj.xs[-1])),
        "max_rel_dev_from_A": float(rel_dev.max()),
        "conv_tol": conv_tol,
    }

    if rel_dev.max() <= conv_tol:
        if e.beta != 0.0:
            ok, trend = _trend_decrease(traj, A, conv_tol)
            diag["trend"] = trend
            if not ok:
                return Classification(Outcome.UNDETERMINED, terminal, None, diag)
        return Classification(Outcome.CONVERGES_TO_A, terminal, None, diag)

    if np.all(tail_vals < zero_lvl) and np.all(tail_vals > 0.0):
        rate = _tail_rate(traj, traj.xs[tmask][0], traj.xs[-1])
        if rate is not None and rate < 0.0:
            diag["decay_window"] = diag.pop("tail_window")
            return Classification(Outcome.DECAYS_TO_ZERO, terminal, rate, diag)

    return Classification(Outcome.UNDETERMINED, terminal, None, diag)


def _trend_decrease(traj: Trajectory, A: float, conv_tol: float) -> tuple[bool, dict]:
    """Windowed-mean deviation at the midpoint versus the end.

    Implements the beta != 0 trend requirement on |psi - A|: the mean
    deviation over the final window must sit strictly below the mean over
    a window at the mid-horizon.  A tail already deep inside half the
    tolerance passes outright (ringing can otherwise leave the midpoint
    deviation spuriously small).
    """
    t0, T = traj.x_start, traj.x_end
    w = min(10.0, 0.1 * (T - t0))
    t_mid = max(t0 + 0.5 * (T - t0), t0 + w)
    n_pts = 33
    grid_end = np.linspace(T - w, T, n_pts)
    grid_mid = np.linspace(t_mid - w, t_mid, n_pts)
    dev_end = float(np.mean(np.abs(traj.eval_many(grid_end)[0] - A)))
    dev_mid = float(np.mean(np.abs(traj.eval_many(grid_mid)[0] - A)))
    detail = {"dev_mid": dev_mid, "dev_end": dev_end}
    if dev_end <= 0.5 * conv_tol * A:
        return True, detail
    return dev_end < dev_mid, detail


def _decide_side(
    e: Exponents,
    t0: float,
    psi0: float,
    slope: float,
    cfg: IntegratorConfig,
    horizon: float,
    A: float,
) -> str:
    """Cheap bisection decision: 'down' on a zero crossing, 'up' on capture.

    Valid for near-saddle starts (psi0 well below A): an upward exit must
    cross 0.8 A before any later dynamics, and a downward exit cannot
    reach it (it would have to cross the stable manifold).
    """
    capture = ("capture_up", lambda t, v, w: 0.8 * A - v)
    traj = integrate(
        Frame.EMDEN_FOWLER,
        PsiState(t0, psi0, slope),
        (t0, t0 + horizon),
        e,
        cfg,
        extra_events=[capture],
    )
    ev = traj.terminal_event
    if ev == EventKind.HITS_ZERO.value or ev == EventKind.ZETA_GUARD.value:
        return "down"
    if ev == "capture_up":
        return "up"
    # no event: settle by proximity to the sink
    if abs(traj.vals[-1] - A) <= 0.5 * A:
        return "up"
    raise BracketInvalid(
        f"slope {slope} undecided after {horizon} time units (psi_end={traj.vals[-1]})"
    )


def find_separatrix(
    e: Exponents,
    t0: float,
    psi0: float,
    slope_bracket: tuple[float, float],
    th: Optional[Thresholds] = None,
    cfg: Optional[IntegratorConfig] = None,
    horizon: float = 300.0,
) -> float:
    """Bisect the initial slope separating zero-crossing from convergence to A.

    The endpoints must classify to the two distinct outcomes; bisection
    tightens the bracket to 1e-12 of its magnitude and returns the
    midpoint slope, which shadows the stable manifold of the zero saddle.
    """
    th = th or Thresholds()
    cfg = cfg or IntegratorConfig(abs_tol=1e-260)
    A = constant_A(e)
    lo, hi = float(slope_bracket[0]), float(slope_bracket[1])
    if not lo < hi:
        raise BracketInvalid(f"bracket must satisfy lo < hi, got {slope_bracket}")
    side_lo = _decide_side(e, t0, psi0, lo, cfg, horizon, A)
    side_hi = _decide_side(e, t0, psi0, hi, cfg, horizon, A)
    if side_lo == side_hi:
        raise BracketInvalid(
            f"bracket endpoints both resolve '{side_lo}'; need one hits-zero "
            f"and one converges-to-A"
        )
    if side_lo == "up":
        lo, hi = hi, lo  # keep 'down' at lo conceptually; orientation-free below
        side_lo, side_hi = side_hi, side_lo
    width_target = 1e-12 * max(abs(lo), abs(hi), 1e-30)
    while abs(hi - lo) > width_target:
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        if _decide_side(e, t0, psi0, mid, cfg, horizon, A) == "down":
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def separatrix_rate_fit(
    e: Exponents,
    t0: float,
    psi0: float,
    critical_slope: float,
    th: Optional[Thresholds] = None,
    cfg: Optional[IntegratorConfig] = None,
) -> tuple[float, Trajectory]:
    """Integrate the critical trajectory and fit its decay rate.

    The fit window starts once psi has dropped below 0.3 psi0 (initial
    adjustment gone) and ends before bisection residue amplified at the
    positive root rate e^((n-2) t) can contaminate the decay; the fitted
    log-slope approximates the negative characteristic root -2/(alpha-1).
    """
    th = th or Thresholds()
    cfg = cfg or IntegratorConfig(abs_tol=1e-260)
    lc = limit_coefficients(e)
    # bisection leaves a relative slope defect ~1e-12, amplified like
    # e^((n-2) (t - t0)); keep it below 1e-3 of the decaying signal
    guard_len = math.log(1e9) / (e.n - 2.0)
    window_max = max(2.0, min(th.fit_window, guard_len))
    t_end = t0 + min(300.0, 1.5 / lc.zeta0 + window_max + 3.0)
    traj = integrate(
        Frame.EMDEN_FOWLER,
        PsiState(t0, psi0, critical_slope),
        (t0, t_end),
        e,
        cfg,
    )
    start_lvl = 0.3 * psi0
    started = traj.vals <= start_lvl
    if not started.any():
        raise TrajectoryTooShort("critical trajectory never entered the decay range")
    t_a = float(traj.xs[started][0])
    window = max(2.0, min(th.fit_window, guard_len - (t_a - t0)))
    t_b = min(t_a + window, float(traj.xs[-1]))
    m = (traj.xs >= t_a) & (traj.xs <= t_b) & (traj.vals > 0.0)
    rate = fit_decay_rate(traj.xs[m], traj.vals[m])
    return rate, traj
