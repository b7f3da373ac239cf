"""Classification of trajectories and the separatrix search."""

import numpy as np
import pytest

from logemden import (
    BracketInvalid,
    Frame,
    IntegratorConfig,
    NonpositiveSamples,
    PsiState,
    TrajectoryTooShort,
    constant_A,
    classify,
    find_separatrix,
    integrate,
    limit_coefficients,
    validate_exponents,
)
from logemden.classify import Outcome, Thresholds, fit_decay_rate, separatrix_rate_fit

E5A2B0 = validate_exponents(5, 2.0, 0.0)


class TestFitDecayRate:
    def test_exact_log_linear_data(self):
        ts = np.linspace(0.0, 10.0, 200)
        assert fit_decay_rate(ts, np.exp(-2.0 * ts)) == pytest.approx(-2.0, abs=1e-10)

    def test_perturbed_data(self):
        ts = np.linspace(0.0, 10.0, 500)
        psis = (1.0 + 0.01 * np.sin(ts)) * np.exp(-2.0 * ts)
        assert fit_decay_rate(ts, psis) == pytest.approx(-2.0, abs=2e-2)

    def test_positive_samples_required(self):
        with pytest.raises(NonpositiveSamples):
            fit_decay_rate(np.array([0.0, 1.0]), np.array([1.0, -1.0]))


class TestClassify:
    def test_spiral_converges_to_A(self):
        traj = integrate(Frame.EMDEN_FOWLER, PsiState(5.0, 2.5, 0.0), (5.0, 65.0), E5A2B0)
        c = classify(traj, E5A2B0)
        assert c.outcome == Outcome.CONVERGES_TO_A
        assert c.terminal_value == pytest.approx(2.0, rel=1e-3)
        assert c.fitted_rate is None

    def test_near_manifold_decays_with_rate(self):
        # stable-manifold shadowing: rate -2/(alpha-1) = -2
        traj = integrate(
            Frame.EMDEN_FOWLER,
            PsiState(5.0, 1e-5, -2e-5),
            (5.0, 65.0),
            E5A2B0,
            IntegratorConfig(abs_tol=1e-260),
        )
        c = classify(traj, E5A2B0)
        assert c.outcome == Outcome.DECAYS_TO_ZERO
        assert c.fitted_rate == pytest.approx(-2.0, abs=5e-2)

    def test_plunge_hits_zero(self):
        traj = integrate(Frame.EMDEN_FOWLER, PsiState(5.0, 0.5, -2.0), (5.0, 65.0), E5A2B0)
        c = classify(traj, E5A2B0)
        assert c.outcome == Outcome.HITS_ZERO

    def test_blow_up_passthrough(self):
        traj = integrate(
            Frame.EMDEN_FOWLER,
            PsiState(5.0, 2.5, 2.0),
            (5.0, 65.0),
            E5A2B0,
            IntegratorConfig(psi_max=3.0),
        )
        c = classify(traj, E5A2B0)
        assert c.outcome == Outcome.BLOW_UP
        assert c.fitted_rate is None

    def test_zeta_guard_exit_decays(self):
        e = validate_exponents(5, 2.0, 1.0)
        traj = integrate(
            Frame.EMDEN_FOWLER,
            PsiState(5.0, 0.02, -0.05),
            (5.0, 120.0),
            e,
            IntegratorConfig(abs_tol=1e-260),
        )
        assert traj.terminal_event == "zeta_guard"
        c = classify(traj, e)
        assert c.outcome in (Outcome.DECAYS_TO_ZERO, Outcome.HITS_ZERO)

    def test_undetermined_mid_transit(self):
        # spiral not settled by the horizon: honest non-answer
        traj = integrate(Frame.EMDEN_FOWLER, PsiState(5.0, 2.5, 0.0), (5.0, 17.0), E5A2B0)
        c = classify(traj, E5A2B0)
        assert c.outcome == Outcome.UNDETERMINED

    def test_too_short_raises(self):
        traj = integrate(Frame.EMDEN_FOWLER, PsiState(5.0, 2.0, 0.0), (5.0, 9.0), E5A2B0)
        with pytest.raises(TrajectoryTooShort):
            classify(traj, E5A2B0)

    def test_classify_beta_nonzero_converging(self):
        e = validate_exponents(5, 2.0, 1.0)
        A = constant_A(e)
        traj = integrate(Frame.EMDEN_FOWLER, PsiState(5.0, 1.4 * A, 0.0), (5.0, 305.0), e)
        c = classify(traj, e)
        assert c.outcome == Outcome.CONVERGES_TO_A
        assert abs(c.terminal_value - A) / A <= 5e-2

    def test_monotone_classification_stability(self):
        # halving conv_tol and doubling the horizon must not flip outcomes
        for e, psi0, dpsi0 in [
            (E5A2B0, 2.5, 0.0),
            (E5A2B0, 0.6, 0.4),
            (validate_exponents(4, 2.5, 0.0), 1.0, -0.2),
        ]:
            out = {}
            for factor, horizon in ((1.0, 300.0), (0.5, 600.0)):
                th = Thresholds(conv_tol=1e-3 * factor)
                traj = integrate(
                    Frame.EMDEN_FOWLER, PsiState(5.0, psi0, dpsi0), (5.0, 5.0 + horizon), e
                )
                out[horizon] = classify(traj, e, th).outcome
            assert out[300.0] == out[600.0]


class TestFindSeparatrix:
    def test_bracket_straddles_and_critical_slope_separates(self):
        slope = find_separatrix(E5A2B0, 5.0, 0.5, (-5.0, 5.0))
        assert -5.0 < slope < 5.0
        for offset, expected in ((1e-3, Outcome.CONVERGES_TO_A), (-1e-3, Outcome.HITS_ZERO)):
            traj = integrate(
                Frame.EMDEN_FOWLER,
                PsiState(5.0, 0.5, slope * (1.0 + offset) if slope < 0 else slope + offset),
                (5.0, 305.0),
                E5A2B0,
            )
            c = classify(traj, E5A2B0)
            want = expected
            if slope < 0 and offset > 0:
                # multiplying a negative slope by (1+eps) pushes it down
                want = Outcome.HITS_ZERO
            elif slope < 0 and offset < 0:
                want = Outcome.CONVERGES_TO_A
            assert c.outcome == want

    def test_small_psi0_limit_matches_linearization(self):
        # critical slope / psi0 -> lambda_minus = -2
        lc = limit_coefficients(E5A2B0)
        errs = []
        for psi0 in (1e-2, 1e-3, 1e-4):
            slope = find_separatrix(E5A2B0, 5.0, psi0, (-5.0 * psi0, 5.0 * psi0))
            errs.append(abs(slope / psi0 - lc.lambda_minus))
        assert errs[0] < 5e-3
        assert errs[2] < 1e-4
        assert errs[2] < errs[0]

    def test_monotone_in_psi0(self):
        slopes = [
            find_separatrix(E5A2B0, 5.0, p, (-5.0 * p, 5.0 * p))
            for p in (1e-3, 2e-3, 4e-3)
        ]
        assert slopes[0] > slopes[1] > slopes[2]

    def test_invalid_bracket(self):
        with pytest.raises(BracketInvalid):
            find_separatrix(E5A2B0, 5.0, 0.5, (1.0, 5.0))

    def test_rate_fit_on_critical_trajectory(self):
        lc = limit_coefficients(E5A2B0)
        psi0 = 1e-3 * lc.A
        slope = find_separatrix(
            E5A2B0, 5.0, psi0, (-6.0 * lc.zeta0 * psi0, 2.0 * lc.zeta0 * psi0)
        )
        rate, traj = separatrix_rate_fit(E5A2B0, 5.0, psi0, slope)
        assert abs(rate - lc.lambda_minus) / abs(lc.lambda_minus) <= 0.02
