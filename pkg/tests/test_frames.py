"""Frame transforms: hand-computed map values, round trips, the exact
profile and its algebraic properties."""

import math

import numpy as np
import pytest

from logemden import (
    DomainError,
    PsiState,
    RadialState,
    constant_A,
    exact_profile,
    exact_profile_gradient,
    from_psi_state,
    to_psi_state,
    upper_envelope,
    validate_exponents,
    zeta,
)
from logemden.frames import profile_equation_residual

E = math.e


class TestToPsiState:
    def test_hand_example_beta1(self):
        # phi(1/e) = e^-2, eta(1/e) = 1: psi = 1, psi_t = -1, t = 1
        e = validate_exponents(5, 2.0, 1.0)
        p = to_psi_state(RadialState(math.exp(-1), E**2, 0.0), e)
        assert p.t == pytest.approx(1.0, abs=1e-15)
        assert p.psi == pytest.approx(1.0, rel=1e-14)
        assert p.psi_t == pytest.approx(-1.0, rel=1e-14)

    def test_profile_maps_to_constant_A(self):
        # the leading profile satisfies phi * u = A identically, psi_t = 0
        for beta in (0.0, 1.0, -2.0):
            e = validate_exponents(5, 2.0, beta)
            A = constant_A(e)
            for r in (1e-9, 1e-4, 0.05):
                s = RadialState(r, exact_profile(r, e), exact_profile_gradient(r, e))
                p = to_psi_state(s, e)
                assert p.psi == pytest.approx(A, rel=1e-12)
                assert abs(p.psi_t) <= 1e-12 * A

    def test_domain_errors(self):
        e = validate_exponents(5, 2.0, 0.0)
        with pytest.raises(DomainError):
            to_psi_state(RadialState(1.2, 10.0, 0.0), e)
        with pytest.raises(DomainError):
            to_psi_state(RadialState(0.5, -1.0, 0.0), e)


class TestFromPsiState:
    def test_inverse_of_hand_example(self):
        e = validate_exponents(5, 2.0, 1.0)
        s = from_psi_state(PsiState(1.0, 1.0, -1.0), e)
        assert s.r == pytest.approx(math.exp(-1), rel=1e-15)
        assert s.u == pytest.approx(E**2, rel=1e-14)
        assert abs(s.u_r) <= 1e-12

    def test_round_trips_randomized(self):
        rng = np.random.default_rng(37)
        for _ in range(400):
            n = int(rng.integers(3, 7))
            lo, hi = n / (n - 2.0), (n + 2.0) / (n - 2.0)
            e = validate_exponents(
                n, float(lo + (hi - lo) * rng.uniform(0.05, 0.95)), float(rng.uniform(-3, 3))
            )
            r = float(np.exp(rng.uniform(math.log(1e-15), math.log(0.3))))
            u = float(np.exp(rng.uniform(1.0, math.log(1e12))))
            u_r = float(rng.normal(0.0, u / r))
            p = to_psi_state(RadialState(r, u, u_r), e)
            s = from_psi_state(p, e)
            assert s.r == pytest.approx(r, rel=1e-12)
            assert s.u == pytest.approx(u, rel=1e-12)
            assert s.u_r == pytest.approx(u_r, rel=1e-12, abs=1e-12 * u / r)
            p2 = to_psi_state(s, e)
            assert p2.psi == pytest.approx(p.psi, rel=1e-12)
            assert p2.psi_t == pytest.approx(p.psi_t, rel=1e-12, abs=1e-12 * max(1.0, p.psi))


class TestZeta:
    def test_beta_zero_is_constant(self):
        e = validate_exponents(5, 2.0, 0.0)
        assert zeta(17.3, 1.0, e) == pytest.approx(2.0, abs=1e-15)

    def test_hand_value(self):
        e = validate_exponents(5, 2.0, 1.0)
        assert zeta(E, 1.0, e) == pytest.approx(2.0 - 1.0 / E, rel=1e-14)

    def test_consistency_with_log_u(self):
        # zeta * t = log u where u = psi / phi(e^-t)
        rng = np.random.default_rng(41)
        for _ in range(200):
            n = int(rng.integers(3, 7))
            lo, hi = n / (n - 2.0), (n + 2.0) / (n - 2.0)
            e = validate_exponents(
                n, float(lo + (hi - lo) * rng.uniform(0.05, 0.95)), float(rng.uniform(-3, 3))
            )
            t = float(rng.uniform(2.0, 40.0))
            psi = float(np.exp(rng.uniform(-2.0, 2.0)))
            u = from_psi_state(PsiState(t, psi, 0.0), e).u
            if u <= 0:
                continue
            assert zeta(t, psi, e) * t == pytest.approx(math.log(u), rel=1e-10)


class TestExactProfile:
    def test_hand_values(self):
        e1 = validate_exponents(5, 2.0, 1.0)
        e0 = validate_exponents(5, 2.0, 0.0)
        assert exact_profile(math.exp(-1), e1) == pytest.approx(E**2, rel=1e-13)
        assert exact_profile(math.exp(-1), e0) == pytest.approx(2 * E**2, rel=1e-13)

    def test_equals_A_times_envelope(self):
        e = validate_exponents(4, 2.25, -1.0)
        A = constant_A(e)
        for r in (1e-8, 1e-3, 0.1):
            assert exact_profile(r, e) == pytest.approx(A * upper_envelope(r, e), rel=1e-13)

    def test_beta0_profile_solves_radial_equation(self):
        e = validate_exponents(5, 2.0, 0.0)
        for r in np.exp(np.linspace(math.log(1e-8), -1.0, 50)):
            assert profile_equation_residual(float(r), e) <= 1e-12

    def test_profile_residual_beta_nonzero_rejected(self):
        with pytest.raises(DomainError):
            profile_equation_residual(0.1, validate_exponents(5, 2.0, 1.0))
