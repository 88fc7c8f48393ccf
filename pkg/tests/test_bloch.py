import math

import numpy as np
import numpy.testing as npt
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from jcqfi import bloch, jc, oracle
from jcqfi.errors import (
    DegenerateDistribution,
    MissingSecondDerivative,
    NearPureUnbounded,
    RankDeficient,
)

SX = bloch.SIGMA_X


def state(r, dr=None, ddr=None):
    s = bloch.BlochState(*r)
    return s.with_derivatives(dr=dr, ddr=ddr)


class TestQfiBloch:
    def test_pure_rotation(self):
        # pure state rotating at unit angular speed under theta -> 2 theta
        s = state((0, 0, 1), dr=(2, 0, 0), ddr=(0, 0, -4))
        assert bloch.qfi_bloch(s) == pytest.approx(4.0, abs=1e-12)

    def test_maximally_mixed(self):
        for dr in [(1.0, 0.0, 0.0), (0.3, -0.2, 0.7), (0.0, 2.0, 1.0)]:
            s = state((0, 0, 0), dr=dr)
            assert bloch.qfi_bloch(s) == pytest.approx(sum(v * v for v in dr), rel=1e-14)

    def test_matches_bures_oracle_on_jc_family(self):
        # oracle: symmetric fidelity difference 8(1-F)/dtheta^2, dtheta = 1e-4
        h = 1e-4
        st_jc = jc.evolve_with_derivative(2.0, 3.0, "ground")
        rho0 = bloch.DensityMatrix2.from_bloch(bloch.GROUND)
        rm = jc.apply_channel(jc.gram_matrix(2.0 - h / 2, 3.0), rho0)
        rp = jc.apply_channel(jc.gram_matrix(2.0 + h / 2, 3.0), rho0)
        fd = 8.0 * (1.0 - oracle.fidelity2(rm, rp)) / (h * h)
        assert bloch.qfi_bloch(st_jc) == pytest.approx(fd, abs=1e-6)

    def test_divergent_radial_derivative_raises(self):
        s = state((0, 0, 1), dr=(0, 0, -1))
        with pytest.raises(NearPureUnbounded):
            bloch.qfi_bloch(s)

    def test_pure_without_second_derivative_raises(self):
        s = state((0, 0, 1), dr=(1e-6, 0, 0))
        with pytest.raises(MissingSecondDerivative):
            bloch.qfi_bloch(s)

    @given(
        st.tuples(*[st.floats(-1, 1) for _ in range(3)]),
        st.tuples(*[st.floats(-5, 5) for _ in range(3)]),
    )
    @settings(max_examples=300, deadline=None)
    def test_nonnegative(self, r, dr):
        r = np.asarray(r)
        n = np.linalg.norm(r)
        if n >= 1.0:
            r = r * (0.999 / n)
        q = bloch.qfi_bloch(state(tuple(r), dr=dr))
        assert q >= 0.0


class TestPureLimit:
    def test_unitary_rotation(self):
        s = state((0, 0, 1), dr=(2, 0, 0), ddr=(0, 0, -4))
        assert bloch.qfi_pure_limit(s) == pytest.approx(4.0)

    def test_parameter_independent(self):
        s = state((1, 0, 0), dr=(0, 0, 0), ddr=(0, 0, 0))
        assert bloch.qfi_pure_limit(s) == 0.0

    def test_vacuum_ground_peak(self):
        from jcqfi import limits

        vs = limits.vacuum_state(math.pi / 2, 0.0, "ground")
        assert bloch.qfi_bloch(vs.state) == pytest.approx(4.0, abs=1e-12)


class TestSld:
    def test_commuting_case(self):
        rho = bloch.DensityMatrix2(np.eye(2) / 2)
        ell = bloch.sld(rho, SX / 2)
        npt.assert_allclose(ell, SX, atol=1e-12)

    def test_diagonal_case(self):
        rho = bloch.DensityMatrix2(np.diag([0.75, 0.25]).astype(complex))
        ell = bloch.sld(rho, np.diag([0.25, -0.25]).astype(complex))
        npt.assert_allclose(ell, np.diag([1.0 / 3.0, -1.0]), atol=1e-12)

    def test_qfi_consistency_random(self):
        rng = np.random.default_rng(5)
        for _ in range(30):
            r = rng.normal(size=3)
            r *= rng.uniform(0, 0.9) / np.linalg.norm(r)
            dr = rng.normal(size=3)
            rho = bloch.DensityMatrix2.from_bloch(bloch.BlochState(*r))
            drho = bloch.bloch_derivative_matrix(dr)
            ell = bloch.sld(rho, drho)
            resid = np.abs(0.5 * (ell @ rho.matrix + rho.matrix @ ell) - drho).max()
            assert resid < 1e-10
            q = bloch.qfi_bloch(bloch.BlochState(*r).with_derivatives(dr=dr))
            assert np.trace(ell @ ell @ rho.matrix).real == pytest.approx(q, abs=1e-8)

    def test_rank_deficient_raises(self):
        rho = bloch.DensityMatrix2(np.diag([1.0, 0.0]).astype(complex))
        with pytest.raises(RankDeficient):
            bloch.sld(rho, SX / 2)


class TestFiPopulation:
    def test_binomial_half(self):
        assert bloch.fi_population(0.0, 1.0) == 1.0

    def test_direct_value(self):
        assert bloch.fi_population(0.5, 0.2) == pytest.approx(0.04 / 0.75, rel=1e-14)

    def test_zero_sensitivity_is_zero(self):
        assert bloch.fi_population(1.0, 0.0) == 0.0

    def test_degenerate_raises(self):
        with pytest.raises(DegenerateDistribution):
            bloch.fi_population(1.0, 0.5)

    def test_bounded_by_short_time_envelope(self):
        # at alpha = 100, tau = 1 the population FI sits below 4 tau^2 e^{-tau^2},
        # with equality only at aligned Rabi phase
        st_jc = jc.evolve_with_derivative(100.0, 1.0, "ground")
        fi = bloch.fi_population(st_jc.z, st_jc.dz)
        assert fi <= 4.0 * math.exp(-1.0) + 1e-9
        assert fi <= bloch.qfi_bloch(st_jc) + 1e-9


class TestPurity:
    @pytest.mark.parametrize("r,expect", [((0, 0, 0), 0.0), ((0, 0, 1), 1.0)])
    def test_extremes(self, r, expect):
        assert bloch.purity(bloch.BlochState(*r)) == expect

    def test_matches_oracle_reduced_state(self):
        from jcqfi import fock

        st_jc = jc.evolve_with_derivative(2.0, 3.0, "ground")
        f0 = fock.coherent_vector(2.0, fock.choose_cutoff(2.0))
        rho = oracle.reduced_state(oracle.joint_evolve(3.0, "ground", f0))
        assert bloch.purity(st_jc) == pytest.approx(2.0 * rho.purity - 1.0, abs=1e-10)


def test_density_matrix_validation():
    with pytest.raises(ValueError):
        bloch.DensityMatrix2(np.array([[0.5, 0.1], [0.3, 0.5]], dtype=complex))
    with pytest.raises(ValueError):
        bloch.DensityMatrix2(np.array([[0.9, 0.0], [0.0, 0.3]], dtype=complex))
    with pytest.raises(ValueError):
        bloch.DensityMatrix2(np.array([[1.2, 0.0], [0.0, -0.2]], dtype=complex))


def test_bloch_roundtrip():
    s = bloch.BlochState(0.3, -0.2, 0.5)
    back = bloch.DensityMatrix2.from_bloch(s).to_bloch()
    npt.assert_allclose(back.r, s.r, atol=1e-15)
