import math

import numpy as np
import pytest

from jcqfi import asymptotic, jc
from jcqfi.errors import AlphaTooSmall, OutOfDomain
from jcqfi.optimize import bracketed_max


class TestLambertW:
    def test_fixed_points(self):
        assert asymptotic.lambert_w0(0.0) == 0.0
        assert asymptotic.lambert_w0(math.e) == pytest.approx(1.0, rel=1e-14)

    def test_residual_at_revival_argument(self):
        x = -1.0 / (math.e * math.pi)
        w = asymptotic.lambert_w0(x)
        assert abs(w * math.exp(w) - x) < 1e-14

    def test_against_scipy(self):
        from scipy.special import lambertw

        for x in (-0.36, -0.2, -0.05, 0.0, 0.3, 1.0, 5.0, 100.0):
            assert asymptotic.lambert_w0(x) == pytest.approx(
                float(lambertw(x).real), rel=1e-12, abs=1e-14
            )

    def test_branch_point(self):
        assert asymptotic.lambert_w0(-math.exp(-1.0)) == pytest.approx(-1.0, abs=1e-7)

    def test_out_of_domain(self):
        with pytest.raises(OutOfDomain):
            asymptotic.lambert_w0(-0.5)


class TestBuildChannel:
    def test_collapse_only_terms(self):
        ch = asymptotic.build_asymptotic_channel(100.0, 1.0)
        fast = {nu: (q, phi) for nu, q, phi in ch.fast_terms}
        assert set(fast) == {0}
        assert fast[0][0] == pytest.approx(math.exp(-0.5))
        assert fast[0][1] == pytest.approx(200.0)
        slow = {nu: (p, om) for nu, p, om in ch.slow_terms}
        assert set(slow) == {0}
        assert slow[0][0] == pytest.approx(1.0, abs=1e-6)
        assert slow[0][1] == pytest.approx(0.005)

    def test_first_revival_amplitude(self):
        ch = asymptotic.build_asymptotic_channel(100.0, 2 * math.pi * 100.0)
        fast = {nu: q for nu, q, _ in ch.fast_terms}
        assert fast[1] == pytest.approx(1.0 / math.sqrt(math.pi))

    def test_late_revival_amplitude(self):
        tau = 8 * math.pi * 100.0**3
        ch = asymptotic.build_asymptotic_channel(100.0, tau)
        slow = {nu: p for nu, p, _ in ch.slow_terms}
        assert slow[1] == pytest.approx(1.0 / math.sqrt(3 * math.pi))

    def test_guard(self):
        with pytest.raises(AlphaTooSmall):
            asymptotic.build_asymptotic_channel(5.0, 1.0)
        assert not asymptotic.build_asymptotic_channel(12.0, 1.0).within_validity
        assert asymptotic.build_asymptotic_channel(25.0, 1.0).within_validity


class TestAsymptoticState:
    def test_short_time_rotation(self):
        st = asymptotic.asymptotic_state(100.0, 1.0, "ground")
        q = math.exp(-0.5)
        # the slow-phase background adds sin(tau/2 alpha) ~ 5e-3 on top of
        # the rotating collapse term
        assert st.x == pytest.approx(q * math.sin(200.0), abs=6e-3)
        assert st.z == pytest.approx(q * math.cos(200.0), abs=1e-12)

    def test_state_transfer_point(self):
        st = asymptotic.asymptotic_state(100.0, math.pi * 100.0, "ground")
        assert abs(st.z) < 1e-12
        assert st.x == pytest.approx(1.0, abs=1e-3)

    def test_against_exact_channel(self):
        st_a = asymptotic.asymptotic_state(20.0, 30.0, "ground")
        st_e = jc.evolve_with_derivative(20.0, 30.0, "ground")
        assert st_a.x == pytest.approx(st_e.x, abs=5e-2)
        assert st_a.z == pytest.approx(st_e.z, abs=5e-2)

    def test_accuracy_scaling(self):
        # (x, z) error within 5/alpha across regimes, both initial states
        for alpha in (20.0, 50.0, 100.0):
            for tau in (0.5, 1.0, 2.0, math.pi * alpha, 2 * math.pi * alpha,
                        2 * math.pi * alpha - math.pi, 2 * math.pi * alpha + math.pi):
                for init in ("ground", "excited"):
                    st_a = asymptotic.asymptotic_state(alpha, tau, init)
                    st_e = jc.evolve_with_derivative(alpha, tau, init)
                    err = max(abs(st_a.x - st_e.x), abs(st_a.z - st_e.z))
                    assert err <= 5.0 / alpha, (alpha, tau, init, err)


class TestRegimeFormulas:
    def test_short_time(self):
        assert asymptotic.qfi_short_time(0.0) == 0.0
        assert asymptotic.qfi_short_time(1.0) == pytest.approx(4.0 / math.e)
        assert asymptotic.qfi_short_time(2.0) == pytest.approx(16.0 * math.exp(-4.0))

    def test_short_time_bound(self):
        taus = np.linspace(0.0, 6.0, 4001)
        vals = 4 * taus**2 * np.exp(-(taus**2))
        assert vals.max() <= 4.0 / math.e + 1e-12

    def test_revival_zero_offset(self):
        assert asymptotic.qfi_revival(100.0, 2 * math.pi * 100.0, 1) == 0.0

    def test_revival_optimum_lambert(self):
        # peak value and location from the closed formula, cross-checked by
        # direct numerical maximization of the printed envelope
        for nu in (1, 2, 4, 10):
            peak, (off_m, off_p) = asymptotic.optimal_revival_qfi(nu)
            _, numeric = bracketed_max(
                lambda r2: 8 * r2 / (math.pi * nu * math.exp(2 * r2) - 1),
                0.0, 4.0, coarse=500, tol=1e-12)
            assert peak == pytest.approx(numeric, abs=1e-10)
            assert off_p == -off_m
        q1, _ = asymptotic.optimal_revival_qfi(1)
        assert q1 == pytest.approx(0.5354962065, abs=1e-9)
        q2, _ = asymptotic.optimal_revival_qfi(2)
        assert q2 == pytest.approx(0.25, abs=0.01)

    def test_revival_large_nu_asymptote(self):
        q10, _ = asymptotic.optimal_revival_qfi(10)
        assert q10 == pytest.approx(0.468 / 10, rel=0.05)

    def test_alphasq_envelope(self):
        alpha = 50.0
        assert asymptotic.qfi_alphasq(alpha, 4 * alpha**2) == pytest.approx(4 / math.e)
        assert asymptotic.qfi_alphasq(alpha, 1e-9) == pytest.approx(0.0, abs=1e-12)

    def test_late_revival_values(self):
        assert asymptotic.qfi_late_revival(20.0, math.pi * (2 * 20.0) ** 3, 1) == pytest.approx(0.0, abs=1e-25)
        q1, (lo, hi) = asymptotic.optimal_late_revival(1, alpha=20.0)
        assert q1 == pytest.approx(-8.0 * asymptotic.lambert_w0(-1 / (3 * math.e * math.pi)), abs=1e-12)
        assert q1 == pytest.approx(0.31, rel=0.05)
        assert lo == pytest.approx(math.pi * 38.0**3)
        assert hi == pytest.approx(math.pi * 42.0**3)
        q2, _ = asymptotic.optimal_late_revival(2)
        assert q2 == pytest.approx(-8.0 * asymptotic.lambert_w0(-1 / (6 * math.e * math.pi)), abs=1e-12)

    def test_population_fi(self):
        # vanishing at Rabi nodes
        alpha = (math.pi / 1.0) * 32.0  # 2 alpha tau = 64 pi at tau = 0.5 -> sin = 0
        assert asymptotic.fi_population_asymptotic(2 * math.pi * 16, 0.5) == pytest.approx(0.0, abs=1e-12)
        # aligned phase reaches the full short-time QFI
        alpha_star = (math.pi / 2 + 63 * math.pi) / 2
        assert asymptotic.fi_population_asymptotic(alpha_star, 1.0) == pytest.approx(4 / math.e, abs=1e-12)

    def test_population_fi_against_exact(self):
        from jcqfi import bloch

        st = jc.evolve_with_derivative(100.0, 1.0, "ground")
        exact = bloch.fi_population(st.z, st.dz)
        asym = asymptotic.fi_population_asymptotic(100.0, 1.0)
        assert exact == pytest.approx(asym, rel=0.03)
