"""Vectorized ensemble integration in the log-radius frame.

Integrates many initial states of one exponent triple simultaneously with
the same Dormand-Prince 5(4) scheme as :mod:`logemden.ode`: every member
carries its own adaptive step and error control (lanes are fully
independent; arrays only batch the arithmetic), so a member's samples
depend on nothing but its own initial state.  Used by the parameter sweep,
where per-member Python stepping would dominate the runtime.
"""

from __future__ import annotations

import math
from typing import Optional

import numpy as np

from .ode import (
    DP_A,
    DP_C,
    DP_E,
    EVENT_LOC_WIDTH,
    FAC_MAX,
    FAC_MIN,
    FD_CAP_NUM,
    FD_M3_COEF,
    FD_M4_COEF,
    FD_RELAX,
    SAFETY,
    EventKind,
    Frame,
    IntegratorConfig,
    IntegratorStats,
    Trajectory,
    _hermite,
    _soft_rhs_psi,
)
from .params import Exponents

__all__ = ["integrate_ensemble"]


def _batch_rhs(e: Exponents, zeta_floor: float):
    alpha = e.alpha
    beta = e.beta
    z0 = e.zeta0
    n2 = e.n - 2.0
    if beta == 0.0:
        a0 = 2.0 * z0 - n2
        b0 = z0 * (n2 - z0)

        def f(t, v, w):
            vp = np.maximum(v, 0.0)
            return -a0 * w + b0 * v - vp**alpha

        return f

    c_beta = beta / (alpha - 1.0)

    def f(t, v, w):
        a = 2.0 * z0 - n2 - 2.0 * c_beta / t
        cb = c_beta / t
        b = (n2 - z0 + cb) * (z0 - cb) - cb / t
        vp = np.maximum(v, 1e-300)
        z = np.maximum(z0 - c_beta * np.log(t) / t + np.log(vp) / t, zeta_floor)
        return -a * w + b * v - np.exp(beta * np.log(z)) * vp**alpha

    return f


def integrate_ensemble(
    e: Exponents,
    t0: float,
    t_end: float,
    psi0: np.ndarray,
    dpsi0: np.ndarray,
    cfg: Optional[IntegratorConfig] = None,
) -> list[Trajectory]:
    """Integrate every (psi0[i], dpsi0[i]) from t0 to t_end or its first event.

    Returns one Trajectory per member, identical in structure to the
    scalar integrator's output (events included).
    """
    cfg = cfg or IntegratorConfig()
    m = int(psi0.shape[0])
    rel, ab = cfg.rel_tol, cfg.abs_tol
    fd_target = cfg.resolved_fd_target()
    fd_on = math.isfinite(fd_target)
    zeta_min = cfg.resolved_zeta_min(e)
    psi_max = cfg.resolved_psi_max(e)
    max_step = cfg.max_step if cfg.max_step is not None else 5.0
    span_len = t_end - t0

    rhs = _batch_rhs(e, 0.5 * zeta_min)
    srhs = _soft_rhs_psi(e, 0.5 * zeta_min)
    has_guard = e.beta != 0.0
    c_beta = e.beta / (e.alpha - 1.0)
    z0 = e.zeta0

    def g_zeta(t, v, w):
        vp = v if v > 1e-300 else 1e-300
        return z0 - c_beta * math.log(t) / t + math.log(vp) / t - zeta_min

    events = [
        (EventKind.HITS_ZERO.value, lambda t, v, w: v),
        (EventKind.BLOW_UP.value, lambda t, v, w: psi_max - v),
    ]
    if has_guard:
        events.append((EventKind.ZETA_GUARD.value, g_zeta))

    t = np.full(m, float(t0))
    v = np.asarray(psi0, dtype=float).copy()
    w = np.asarray(dpsi0, dtype=float).copy()
    f = rhs(t, v, w)
    done = np.zeros(m, dtype=bool)
    member_events: list[list[tuple[float, str]]] = [[] for _ in range(m)]
    rejected = np.zeros(m, dtype=np.int64)

    # initial-state events
    for i in range(m):
        for kind, g in events:
            if g(t0, float(v[i]), float(w[i])) <= 0.0:
                member_events[i].append((t0, kind))
                done[i] = True
                break

    chunks: list[tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, np.ndarray]] = []
    chunks.append(
        (np.arange(m), t.copy(), v.copy(), w.copy(), f.copy())
    )

    # zeta-guard sign memory (crossing detection needs the previous sign)
    h = np.full(m, min(1e-3 * span_len, max_step))
    if fd_on:
        h = np.minimum(h, 1e-4)
    # third/fourth-derivative estimator state
    t1 = t.copy()
    f1 = f.copy()
    t2 = np.full(m, np.nan)
    f2 = np.full(m, np.nan)
    m3 = np.zeros(m)
    m4 = np.zeros(m)
    n_hist = np.ones(m, dtype=np.int64)
    rejected_last = np.zeros(m, dtype=bool)
    samples_count = np.ones(m, dtype=np.int64)

    a0_abs = abs(2.0 * z0 - (e.n - 2.0))
    b0_const = z0 * (e.n - 2.0 - z0)

    def damping_abs(tv: np.ndarray) -> np.ndarray:
        if e.beta == 0.0:
            return np.full_like(tv, a0_abs)
        return np.abs(2.0 * z0 - (e.n - 2.0) - 2.0 * c_beta / tv)

    def local_scale(tv, vv, wv, a_abs):
        if e.beta == 0.0:
            bv = b0_const
        else:
            cb = c_beta / tv
            bv = (e.n - 2.0 - z0 + cb) * (z0 - cb) - cb / tv
        return np.maximum(1.0, np.maximum(np.abs(bv * vv), a_abs * np.abs(wv)))

    n_iter = 0
    max_iter = 2_000_000
    while not done.all():
        n_iter += 1
        if n_iter > max_iter:
            raise RuntimeError("ensemble integration exceeded the iteration budget")
        remaining = t_end - t
        live = ~done & (remaining > 1e-14 * span_len)
        done |= ~live & ~done  # members that reached t_end
        if not live.any():
            break
        if fd_on:
            tv = np.maximum(t, 1e-300)
            a_abs = damping_abs(tv)
            m_eff = FD_M4_COEF * m4 + FD_M3_COEF * a_abs * m3
            cap = np.where(
                m_eff > 0.0,
                np.sqrt(
                    FD_CAP_NUM
                    * fd_target
                    * local_scale(tv, v, w, a_abs)
                    / np.maximum(m_eff, 1e-300)
                ),
                np.inf,
            )
        else:
            cap = np.full(m, np.inf)
        hs = np.minimum(np.minimum(h, max_step), np.minimum(cap, remaining))
        hs = np.where(live, hs, 0.0)
        if np.any(live & (hs < 1e-14 * span_len)):
            bad = int(np.nonzero(live & (hs < 1e-14 * span_len))[0][0])
            raise RuntimeError(f"step underflow in ensemble member {bad}")
        # snap steps so t + hs is exactly representable (keeps stored
        # abscissa/state pairs consistent to machine precision at large t)
        hs = (t + hs) - t
        if np.any(live & (hs == 0.0)):
            raise RuntimeError("ensemble step below the abscissa's ulp")

        kp = [w]
        kf = [f]
        vi = v
        wi = w
        for i in range(1, 7):
            row = DP_A[i]
            av = row[0] * kp[0]
            aw = row[0] * kf[0]
            for j in range(1, i):
                av = av + row[j] * kp[j]
                aw = aw + row[j] * kf[j]
            vi = v + hs * av
            wi = w + hs * aw
            ti = t + DP_C[i] * hs
            fi = rhs(np.maximum(ti, 1e-300), vi, wi)
            kp.append(wi)
            kf.append(fi)
        v_new, w_new, f_new = vi, wi, kf[6]

        err_v = DP_E[0] * kp[0]
        err_w = DP_E[0] * kf[0]
        for j in range(1, 7):
            err_v = err_v + DP_E[j] * kp[j]
            err_w = err_w + DP_E[j] * kf[j]
        err_v = np.abs(err_v * hs) / (ab + rel * np.maximum(np.abs(v), np.abs(v_new)))
        err_w = np.abs(err_w * hs) / (ab + rel * np.maximum(np.abs(w), np.abs(w_new)))
        err = np.maximum(err_v, err_w)

        acc = live & (err <= 1.0)
        rej = live & ~acc
        rejected[rej] += 1

        if acc.any():
            idx = np.nonzero(acc)[0]
            t_old = t[idx].copy()
            v_old = v[idx].copy()
            w_old = w[idx].copy()
            f_old = f[idx].copy()
            h_step = hs[idx].copy()
            t_new_l = t_old + h_step
            vn = v_new[idx].copy()
            wn = w_new[idx].copy()
            fn = f_new[idx].copy()

            # vectorized trigger screen; scalar localization only on hits
            v_mid_a = _hermite(v_old, w_old * h_step, vn, wn * h_step, 0.5)
            trig = (vn <= 0.0) | (v_mid_a <= 0.0) | (vn >= psi_max) | (v_mid_a >= psi_max)
            if has_guard:
                t_new_a = t_old + h_step
                t_mid_a = t_old + 0.5 * h_step
                zn = z0 - c_beta * np.log(t_new_a) / t_new_a + np.log(
                    np.maximum(vn, 1e-300)
                ) / t_new_a
                zm = z0 - c_beta * np.log(t_mid_a) / t_mid_a + np.log(
                    np.maximum(v_mid_a, 1e-300)
                ) / t_mid_a
                trig |= (zn <= zeta_min) | (zm <= zeta_min)
            for k in np.nonzero(trig)[0]:
                lane = int(idx[k])
                x_prev = float(t_old[k])
                hstep = float(h_step[k])
                vp_, wp_, fp_ = float(v_old[k]), float(w_old[k]), float(f_old[k])
                vn_, wn_, fn_ = float(vn[k]), float(wn[k]), float(fn[k])
                v_mid = float(_hermite(vp_, wp_ * hstep, vn_, wn_ * hstep, 0.5))
                w_mid = float(_hermite(wp_, fp_ * hstep, wn_, fn_ * hstep, 0.5))
                hit = None
                for kind, g in events:
                    g_mid = g(x_prev + 0.5 * hstep, v_mid, w_mid)
                    g_now = g(x_prev + hstep, vn_, wn_)
                    if g_now <= 0.0 or g_mid <= 0.0:
                        s_hi = 0.5 if g_mid <= 0.0 else 1.0
                        s_lo = 0.0
                        for _ in range(80):
                            if hstep * (s_hi - s_lo) <= EVENT_LOC_WIDTH:
                                break
                            s_m = 0.5 * (s_lo + s_hi)
                            vm = float(_hermite(vp_, wp_ * hstep, vn_, wn_ * hstep, s_m))
                            wm = float(_hermite(wp_, fp_ * hstep, wn_, fn_ * hstep, s_m))
                            if g(x_prev + s_m * hstep, vm, wm) <= 0.0:
                                s_hi = s_m
                            else:
                                s_lo = s_m
                        x_ev = x_prev + s_hi * hstep
                        if hit is None or x_ev < hit[0]:
                            v_ev = float(_hermite(vp_, wp_ * hstep, vn_, wn_ * hstep, s_hi))
                            w_ev = float(_hermite(wp_, fp_ * hstep, wn_, fn_ * hstep, s_hi))
                            hit = (x_ev, kind, v_ev, w_ev)
                if hit is not None:
                    x_ev, kind, v_ev, w_ev = hit
                    t_new_l[k] = x_ev
                    vn[k] = v_ev
                    wn[k] = w_ev
                    fn[k] = srhs(x_ev, v_ev, w_ev)
                    member_events[lane].append((x_ev, kind))
                    done[lane] = True

            chunks.append((idx, t_new_l, vn, wn, fn))
            samples_count[idx] += 1
            if np.any(samples_count > cfg.max_samples):
                raise RuntimeError("ensemble member exceeded the sample budget")

            t[idx] = t_new_l
            v[idx] = vn
            w[idx] = wn
            f[idx] = fn

            # derivative estimates from the last three accepted second
            # derivatives, kept as decaying maxima (the raw values dip through
            # zero within each oscillation period)
            ok2 = n_hist[idx] >= 2
            lanes2 = idx[ok2]
            if lanes2.size:
                d01 = (f1[lanes2] - f2[lanes2]) / (t1[lanes2] - t2[lanes2])
                d12 = (f[lanes2] - f1[lanes2]) / (t[lanes2] - t1[lanes2])
                decay = np.exp(-(t[lanes2] - t1[lanes2]) / FD_RELAX)
                m3[lanes2] = np.maximum(np.abs(d12), m3[lanes2] * decay)
                m4[lanes2] = np.maximum(
                    np.abs(2.0 * (d12 - d01) / (t[lanes2] - t2[lanes2])),
                    m4[lanes2] * decay,
                )
            t2[idx] = t1[idx]
            f2[idx] = f1[idx]
            t1[idx] = t[idx]
            f1[idx] = f[idx]
            n_hist[idx] += 1

        # step-size update
        with np.errstate(divide="ignore", over="ignore"):
            fac = SAFETY * err ** -0.2
        fac_top = np.where(rejected_last, 1.0, FAC_MAX)
        if fd_on:
            fresh = (m4 == 0.0) & (m3 == 0.0)
            fac_top = np.where(acc & fresh, np.minimum(fac_top, 2.0), fac_top)
        fac = np.minimum(fac_top, np.maximum(FAC_MIN, np.where(np.isfinite(fac), fac, FAC_MAX)))
        upd = acc | rej
        h = np.where(upd, np.abs(hs) * np.where(rej, np.minimum(fac, 1.0), fac), h)
        rejected_last = np.where(upd, rej, rejected_last)

    # assemble per-member trajectories
    idx_all = np.concatenate([c[0] for c in chunks])
    t_all = np.concatenate([c[1] for c in chunks])
    v_all = np.concatenate([c[2] for c in chunks])
    w_all = np.concatenate([c[3] for c in chunks])
    f_all = np.concatenate([c[4] for c in chunks])
    order = np.lexsort((t_all, idx_all))
    idx_all, t_all, v_all, w_all, f_all = (
        idx_all[order],
        t_all[order],
        v_all[order],
        w_all[order],
        f_all[order],
    )
    bounds = np.searchsorted(idx_all, np.arange(m + 1))
    out: list[Trajectory] = []
    for i in range(m):
        sl = slice(bounds[i], bounds[i + 1])
        n_acc = int(bounds[i + 1] - bounds[i]) - 1
        out.append(
            Trajectory(
                frame=Frame.EMDEN_FOWLER,
                xs=t_all[sl].copy(),
                vals=v_all[sl].copy(),
                ders=w_all[sl].copy(),
                secs=f_all[sl].copy(),
                events=member_events[i],
                stats=IntegratorStats(
                    accepted=n_acc,
                    rejected=int(rejected[i]),
                    rhs_evals=6 * (n_acc + int(rejected[i])) + 1,
                ),
            )
        )
    return out
