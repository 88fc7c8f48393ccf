import math

import numpy as np
import numpy.testing as npt
import pytest

from jcqfi import bloch, jc, limits


class TestVacuumSeries:
    def test_tau_zero_identity(self):
        vs = limits.vacuum_series(0.0)
        expect = np.zeros((4, 4))
        expect[0, 0] = expect[1, 1] = expect[0, 1] = expect[1, 0] = 1.0
        npt.assert_allclose(vs.g0, expect, atol=1e-15)
        assert np.abs(vs.g1).max() == 0.0
        assert np.abs(vs.g2).max() == 0.0

    def test_tau_pi(self):
        vs = limits.vacuum_series(math.pi)
        assert vs.g0[1, 1] == pytest.approx(1.0)
        assert vs.g0[2, 2] == pytest.approx(0.0, abs=1e-30)

    def test_order_by_order_trace_preservation(self):
        for tau in (0.3, 1.0, 2.7):
            vs = limits.vacuum_series(tau)
            for g in (vs.g1, vs.g2):
                assert abs(g[0, 0] + g[3, 3]) < 1e-14
                assert abs(g[1, 1] + g[2, 2]) < 1e-14
                assert abs(g[0, 2] + g[3, 1]) < 1e-14

    def test_matches_exact_channel_to_cubic_order(self):
        # cubic truncation: measured constant is ~1, so the deviation sits
        # right at alpha^3 = 1.25e-4
        g_exact = jc.gram_matrix(0.05, 2.0).g
        g_series = limits.vacuum_gram(2.0, 0.05)
        assert np.abs(g_exact - g_series).max() < 2e-4


class TestVacuumState:
    def test_ground_at_origin_unchanged(self):
        vs = limits.vacuum_state(1.3, 0.0, "ground")
        npt.assert_allclose(vs.state.r, [0, 0, 1], atol=1e-15)
        assert vs.within_validity

    def test_excited_rabi_population(self):
        # sign convention: ground = +z, so the excited population is -cos(2 tau)
        for tau in (0.4, 1.1, 2.0):
            vs = limits.vacuum_state(tau, 0.0, "excited")
            assert vs.state.z == pytest.approx(-math.cos(2 * tau), abs=1e-14)

    def test_matches_exact_channel(self):
        vs = limits.vacuum_state(2.0, 0.05, "ground")
        st = jc.evolve_with_derivative(0.05, 2.0, "ground")
        assert vs.state.x == pytest.approx(st.x, abs=5e-4)
        assert vs.state.z == pytest.approx(st.z, abs=5e-4)
        assert vs.state.dx == pytest.approx(st.dx, abs=2e-2)
        assert vs.state.dz == pytest.approx(st.dz, abs=2e-2)

    def test_validity_flag(self):
        assert not limits.vacuum_state(1.0, 0.3, "ground").within_validity

    def test_derivatives_match_finite_differences(self):
        h = 1e-6
        for init in ("ground", "excited", (0.4, -0.3)):
            st = limits.vacuum_state(1.2, 0.1, init).state
            rp = limits.vacuum_state(1.2, 0.1 + h, init).state.r
            rm = limits.vacuum_state(1.2, 0.1 - h, init).state.r
            npt.assert_allclose(st.dr, (rp - rm) / (2 * h), atol=1e-6)
            ddr = (rp - 2 * st.r + rm) / (h * h)
            npt.assert_allclose([st.ddx, st.ddy, st.ddz], ddr, atol=1e-2)


class TestVacuumQfi:
    def test_ground_closed_form(self):
        assert limits.vacuum_qfi(math.pi / 2, 0.0, "ground") == pytest.approx(4.0)
        assert limits.vacuum_qfi(1.0, 0.1, "ground") == pytest.approx(4 * math.sin(1.0) ** 2)

    def test_excited_alpha_zero_limit(self):
        for tau in (0.7, 1.3, 2.9):
            expect = 4 * math.sin(tau) ** 2 * math.cos(math.sqrt(2) * tau) ** 2
            assert limits.vacuum_qfi(tau, 0.0, "excited") == pytest.approx(expect, abs=1e-12)

    def test_excited_matches_exact(self):
        got = limits.vacuum_qfi(1.2, 0.05, "excited")
        assert got == pytest.approx(jc.qfi_jc(0.05, 1.2, "excited"), abs=2e-3)

    def test_bounded_by_four(self):
        for tau in np.linspace(0, 2 * math.pi, 64):
            assert limits.vacuum_qfi(float(tau), 0.0, "ground") <= 4.0 + 1e-12
            assert limits.vacuum_qfi(float(tau), 0.0, "excited") <= 4.0 + 1e-12


class TestCovariant:
    def test_identity_at_tau_zero(self):
        ch = limits.covariant_channel(1.0, 0.0)
        npt.assert_allclose(ch.a, np.eye(3), atol=1e-15)

    def test_qfi_peak(self):
        assert limits.covariant_qfi(1.0) == pytest.approx(4.0 / math.e)
        # through the channel derivatives as well
        ch = limits.covariant_channel(2.0, 1.0)
        r, dr = ch.apply_with_derivative(bloch.GROUND.r)
        st = bloch.BlochState(*r).with_derivatives(dr=dr)
        assert bloch.qfi_bloch(st) == pytest.approx(4.0 / math.e, rel=1e-12)

    def test_quadrature_oracle(self):
        ch = limits.covariant_channel(1.5, 0.8)
        quad = limits.covariant_channel_quadrature(1.5, 0.8)
        assert np.abs(ch.a - quad.a).max() < 1e-10
