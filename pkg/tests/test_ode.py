"""Integration engine: right-hand sides, adaptive stepping, events, dense
output, CSV round trip, frame consistency, and the ensemble runner.

The damped-spiral regression is checked against a fixed-step classical
RK4 integrator written here, independent of the adaptive engine.
"""

import math

import numpy as np
import pytest

from logemden import (
    DomainError,
    EventKind,
    Frame,
    IntegratorConfig,
    PsiState,
    RadialState,
    RegimeExit,
    SampleBudgetExceeded,
    Trajectory,
    ZetaGuard,
    constant_A,
    detect_event,
    exact_profile,
    exact_profile_gradient,
    integrate,
    rhs_psi,
    rhs_radial_u,
    validate_exponents,
)
from logemden.analysis import energy_tail_increment, frame_agreement
from logemden.batch import integrate_ensemble

E5A2B0 = validate_exponents(5, 2.0, 0.0)


def rk4_reference(e, t0, y0, t1, h):
    """Classical fixed-step RK4 on the beta=0 autonomous system."""
    a0 = 2.0 * e.zeta0 - (e.n - 2.0)
    b0 = e.zeta0 * (e.n - 2.0 - e.zeta0)

    def f(y):
        v, w = y
        return np.array([w, -a0 * w + b0 * v - max(v, 0.0) ** e.alpha])

    y = np.asarray(y0, dtype=float)
    n = int(round((t1 - t0) / h))
    for _ in range(n):
        k1 = f(y)
        k2 = f(y + 0.5 * h * k1)
        k3 = f(y + 0.5 * h * k2)
        k4 = f(y + h * k3)
        y = y + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    return y


class TestRightHandSides:
    def test_radial_rhs_hand_values(self):
        # |log e|^beta = 1 for every beta
        for beta in (0.0, 1.0, -2.0):
            e = validate_exponents(5, 2.0, beta)
            val = rhs_radial_u(RadialState(0.5, math.e, 0.0), e)
            assert val == pytest.approx(-math.e**2, rel=1e-14)
        e = validate_exponents(5, 2.0, 0.0)
        assert rhs_radial_u(RadialState(0.5, math.e, 1.0), e) == pytest.approx(
            -8.0 - math.e**2, rel=1e-14
        )

    def test_radial_regime_exit(self):
        with pytest.raises(RegimeExit):
            rhs_radial_u(RadialState(0.5, 2.0, 0.0), E5A2B0)

    def test_radial_profile_is_exact_solution(self):
        # residual of the beta=0 profile through the rhs itself
        e = E5A2B0
        for r in (1e-6, 1e-3, 0.1):
            u = exact_profile(r, e)
            u_r = exact_profile_gradient(r, e)
            u_rr_analytic = e.zeta0 * (e.zeta0 + 1.0) * u / r**2
            got = rhs_radial_u(RadialState(r, u, u_r), e)
            assert got == pytest.approx(u_rr_analytic, rel=1e-12)

    def test_psi_rhs_hand_values(self):
        assert rhs_psi(PsiState(7.0, 2.0, 0.0), E5A2B0) == pytest.approx(0.0, abs=1e-14)
        assert rhs_psi(PsiState(7.0, 1.0, 0.0), E5A2B0) == pytest.approx(1.0, rel=1e-14)

    def test_psi_rhs_limit_at_equilibrium(self):
        # with psi = A, psi_t = 0 the right side vanishes as t -> infinity
        e = validate_exponents(5, 2.0, 1.0)
        A = constant_A(e)
        assert abs(rhs_psi(PsiState(1e8, A, 0.0), e)) <= 1e-6

    def test_psi_rhs_zeta_guard(self):
        e = validate_exponents(5, 2.0, 1.0)
        with pytest.raises(ZetaGuard):
            rhs_psi(PsiState(2.0, math.exp(-3.0), 0.0), e)


class TestDetectEvent:
    def test_threshold_crossings(self):
        e = E5A2B0
        assert detect_event(PsiState(5.0, -0.001, 0.0), e) is EventKind.HITS_ZERO
        A = constant_A(e)
        assert detect_event(PsiState(5.0, 1e4 * A, 0.0), e) is EventKind.BLOW_UP
        assert detect_event(PsiState(5.0, 1.0, 0.0), e) is None

    def test_zeta_guard_hand_value(self):
        # zeta(2, e^-3) = 2 - log(2)/2 - 3/2 < 0.2
        e = validate_exponents(5, 2.0, 1.0)
        assert detect_event(PsiState(2.0, math.exp(-3.0), 0.0), e) is EventKind.ZETA_GUARD

    def test_physical_regime_exit(self):
        assert detect_event(RadialState(0.5, 2.0, 0.0), E5A2B0) is EventKind.HITS_ZERO
        assert detect_event(RadialState(0.5, 10.0, 0.0), E5A2B0) is None


class TestIntegrateEmdenFowler:
    def test_equilibrium_preserved(self):
        traj = integrate(Frame.EMDEN_FOWLER, PsiState(5.0, 2.0, 0.0), (5.0, 105.0), E5A2B0)
        grid = np.linspace(5.0, 105.0, 1001)
        vals, _ = traj.eval_many(grid)
        assert np.max(np.abs(vals - 2.0)) <= 1e-8

    def test_damped_spiral_against_rk4_oracle(self):
        # (t0, psi, psi_t) = (5, 2.5, 0): spiral into the sink at A = 2
        ref = rk4_reference(E5A2B0, 5.0, (2.5, 0.0), 40.0, 1e-3)
        traj = integrate(Frame.EMDEN_FOWLER, PsiState(5.0, 2.5, 0.0), (5.0, 40.0), E5A2B0)
        assert traj.vals[-1] == pytest.approx(ref[0], abs=1e-8)
        assert traj.vals[-1] == pytest.approx(2.0, abs=1e-6)

    def test_near_manifold_datum_decays_at_rate_two(self):
        # eigendirection (1, -2) of the zero saddle
        traj = integrate(
            Frame.EMDEN_FOWLER, PsiState(5.0, 1e-4, -2e-4), (5.0, 8.5), E5A2B0,
            IntegratorConfig(abs_tol=1e-260),
        )
        assert not traj.events
        m = (traj.xs >= 5.0) & (traj.xs <= 8.0)
        slope = np.polyfit(traj.xs[m], np.log(traj.vals[m]), 1)[0]
        assert slope == pytest.approx(-2.0, abs=2e-2)

    def test_fixed_step_order_at_least_four(self):
        e = E5A2B0
        ref = integrate(
            Frame.EMDEN_FOWLER,
            PsiState(5.0, 2.5, 0.0),
            (5.0, 15.0),
            e,
            IntegratorConfig(rel_tol=1e-13, abs_tol=1e-14, fd_target=math.inf),
        )
        errs = []
        for h in (0.2, 0.1, 0.05):
            cfg = IntegratorConfig(
                rel_tol=0.9, abs_tol=1e6, max_step=h, first_step=h, fd_target=math.inf
            )
            traj = integrate(Frame.EMDEN_FOWLER, PsiState(5.0, 2.5, 0.0), (5.0, 15.0), e, cfg)
            errs.append(abs(traj.vals[-1] - ref.vals[-1]))
        orders = [math.log2(errs[i] / errs[i + 1]) for i in range(len(errs) - 1)]
        assert min(orders) >= 4.0

    def test_hits_zero_event_localized(self):
        traj = integrate(Frame.EMDEN_FOWLER, PsiState(5.0, 0.5, -2.0), (5.0, 40.0), E5A2B0)
        assert traj.terminal_event == EventKind.HITS_ZERO.value
        t_ev = traj.events[-1][0]
        assert traj.x_start < t_ev <= traj.x_end
        before, _ = traj.eval(t_ev - 1e-8)
        at, _ = traj.eval(t_ev)
        assert before > 0.0
        assert at <= 1e-12

    def test_blow_up_event(self):
        cfg = IntegratorConfig(psi_max=3.0)
        traj = integrate(
            Frame.EMDEN_FOWLER, PsiState(5.0, 2.5, 2.0), (5.0, 40.0), E5A2B0, cfg
        )
        assert traj.terminal_event == EventKind.BLOW_UP.value

    def test_zeta_guard_event_on_downward_exit(self):
        e = validate_exponents(5, 2.0, 1.0)
        traj = integrate(Frame.EMDEN_FOWLER, PsiState(5.0, 0.3, -1.0), (5.0, 60.0), e)
        assert traj.terminal_event == EventKind.ZETA_GUARD.value
        # the guard fires before psi reaches zero
        assert traj.vals[-1] > 0.0

    def test_sample_budget(self):
        with pytest.raises(SampleBudgetExceeded):
            integrate(
                Frame.EMDEN_FOWLER,
                PsiState(5.0, 2.5, 0.0),
                (5.0, 305.0),
                E5A2B0,
                IntegratorConfig(max_samples=50),
            )

    def test_span_direction_checked(self):
        with pytest.raises(DomainError):
            integrate(Frame.EMDEN_FOWLER, PsiState(5.0, 2.0, 0.0), (5.0, 4.0), E5A2B0)

    def test_energy_integral_stabilizes(self):
        traj = integrate(Frame.EMDEN_FOWLER, PsiState(5.0, 2.5, 0.0), (5.0, 85.0), E5A2B0)
        assert energy_tail_increment(traj, 10.0) <= 1e-6

    def test_dense_output_accuracy(self):
        # cubic Hermite dense output stays within ~10 rel_tol of a tight run
        cfg = IntegratorConfig(rel_tol=1e-10, abs_tol=1e-12)
        traj = integrate(Frame.EMDEN_FOWLER, PsiState(5.0, 2.5, 0.0), (5.0, 25.0), E5A2B0, cfg)
        ref = integrate(
            Frame.EMDEN_FOWLER,
            PsiState(5.0, 2.5, 0.0),
            (5.0, 25.0),
            E5A2B0,
            IntegratorConfig(rel_tol=1e-13, abs_tol=1e-15),
        )
        grid = np.linspace(5.0, 25.0, 4001)
        v1, _ = traj.eval_many(grid)
        v2, _ = ref.eval_many(grid)
        assert np.max(np.abs(v1 - v2)) <= 10.0 * cfg.rel_tol * np.max(np.abs(v2))


class TestPhysicalFrame:
    def test_physical_integration_tracks_profile(self):
        e = E5A2B0
        r0, r1 = math.exp(-5.0), math.exp(-9.0)
        init = RadialState(r0, exact_profile(r0, e), exact_profile_gradient(r0, e))
        traj = integrate(Frame.PHYSICAL, init, (r0, r1), e)
        expect = np.array([exact_profile(float(r), e) for r in traj.xs])
        assert np.max(np.abs(traj.vals - expect) / expect) <= 1e-8
        # singular branch is monotone: u' < 0 throughout
        assert np.all(traj.ders < 0.0)

    def test_frame_agreement_single_case(self):
        rel = frame_agreement(E5A2B0, PsiState(5.0, 2.3, 0.1), overlap=5.0)
        assert rel <= 50.0 * 1e-10

    def test_physical_span_direction_checked(self):
        with pytest.raises(DomainError):
            integrate(
                Frame.PHYSICAL, RadialState(0.01, 100.0, 0.0), (0.01, 0.02), E5A2B0
            )


class TestTrajectorySerialization:
    def test_csv_round_trip_is_exact(self):
        traj = integrate(Frame.EMDEN_FOWLER, PsiState(5.0, 2.5, 0.0), (5.0, 12.0), E5A2B0)
        text = traj.to_csv()
        assert text.splitlines()[0] == "t,psi,psi_t,psi_tt"
        back = Trajectory.from_csv(text)
        assert back.frame is Frame.EMDEN_FOWLER
        assert np.array_equal(back.xs, traj.xs)
        assert np.array_equal(back.vals, traj.vals)
        assert np.array_equal(back.ders, traj.ders)
        assert np.array_equal(back.secs, traj.secs)

    def test_csv_physical_header(self):
        e = E5A2B0
        r0 = math.exp(-5.0)
        init = RadialState(r0, exact_profile(r0, e), exact_profile_gradient(r0, e))
        traj = integrate(Frame.PHYSICAL, init, (r0, r0 / 8.0), e)
        assert traj.to_csv().splitlines()[0] == "r,u,u_r,u_rr"

    def test_csv_file_output(self, tmp_path):
        traj = integrate(Frame.EMDEN_FOWLER, PsiState(5.0, 2.0, 0.0), (5.0, 10.0), E5A2B0)
        path = tmp_path / "traj.csv"
        traj.to_csv(str(path))
        assert Trajectory.from_csv(path.read_text()).n_samples == traj.n_samples


class TestEnsembleRunner:
    def test_matches_scalar_integrator(self):
        e = E5A2B0
        psi0 = np.array([2.5, 0.5, 1.7])
        dpsi0 = np.array([0.0, -2.0, 0.3])
        trajs = integrate_ensemble(e, 5.0, 45.0, psi0, dpsi0, IntegratorConfig())
        for k in range(3):
            scal = integrate(
                Frame.EMDEN_FOWLER,
                PsiState(5.0, float(psi0[k]), float(dpsi0[k])),
                (5.0, 45.0),
                e,
            )
            assert [kind for _, kind in trajs[k].events] == [
                kind for _, kind in scal.events
            ]
            if not scal.events:
                assert trajs[k].vals[-1] == pytest.approx(scal.vals[-1], abs=1e-8)
            else:
                assert trajs[k].events[-1][0] == pytest.approx(
                    scal.events[-1][0], abs=1e-5
                )

    def test_members_are_lane_independent(self):
        # a member's samples must not depend on its batch companions
        e = E5A2B0
        solo = integrate_ensemble(e, 5.0, 25.0, np.array([2.5]), np.array([0.0]))
        trio = integrate_ensemble(
            e, 5.0, 25.0, np.array([2.5, 0.4, 1.1]), np.array([0.0, -1.5, 0.8])
        )
        assert np.array_equal(solo[0].xs, trio[0].xs)
        assert np.array_equal(solo[0].vals, trio[0].vals)
