import math

import numpy as np
import numpy.testing as npt
import pytest

from jcqfi import bloch, fock, jc
from jcqfi.errors import AlphaZero


def wave_vector_gram_oracle(alpha, tau, n_max):
    """Gram matrix from explicit generator vectors f_i(n)|alpha> (oracle)."""
    v = fock.coherent_vector(alpha, n_max).amplitudes
    n = np.arange(n_max + 1, dtype=float)
    f = [
        np.cos(tau * np.sqrt(n)),
        np.cos(tau * np.sqrt(n + 1.0)),
        -np.sqrt(n) / alpha * np.sin(tau * np.sqrt(n)),
        alpha / np.sqrt(n + 1.0) * np.sin(tau * np.sqrt(n + 1.0)),
    ]
    kets = [fi * v for fi in f]
    g = np.zeros((4, 4))
    for i in range(4):
        for j in range(4):
            g[i, j] = math.fsum((kets[i] * kets[j]).tolist())
    return g


class TestGramMatrix:
    def test_identity_at_tau_zero(self):
        g = jc.gram_matrix(1.3, 0.0).g
        expect = np.zeros((4, 4))
        expect[0, 0] = expect[1, 1] = expect[0, 1] = expect[1, 0] = 1.0
        npt.assert_allclose(g, expect, atol=1e-14)

    def test_vacuum_channel(self):
        tau = 1.7
        g = jc.gram_matrix(0.0, tau).g
        assert g[0, 0] == 1.0
        assert g[1, 1] == pytest.approx(math.cos(tau) ** 2)
        assert g[2, 2] == pytest.approx(math.sin(tau) ** 2)
        assert g[0, 1] == pytest.approx(math.cos(tau))
        mask = np.ones((4, 4), bool)
        for i, j in ((0, 0), (1, 1), (2, 2), (0, 1), (1, 0)):
            mask[i, j] = False
        assert np.abs(g[mask]).max() == 0.0

    def test_against_wave_vector_oracle(self):
        n_max = fock.choose_cutoff(2.0)
        g = jc.gram_matrix(2.0, 3.0, n_max).g
        npt.assert_allclose(g, wave_vector_gram_oracle(2.0, 3.0, n_max), atol=1e-10)

    def test_invariants_enforced(self):
        bad = np.eye(4)
        with pytest.raises(ValueError):
            jc.GramMatrix(bad, 1.0, 1.0, 32)  # trace-preservation violated


class TestGramDerivative:
    def test_matches_central_difference(self):
        h = 1e-5
        dg = jc.gram_derivative(2.0, 3.0)
        fd = (jc.gram_matrix(2.0 + h, 3.0).g - jc.gram_matrix(2.0 - h, 3.0).g) / (2 * h)
        assert np.abs(dg - fd).max() < 1e-6

    def test_trace_preservation_derivative(self):
        rng = np.random.default_rng(3)
        for _ in range(5):
            a, t = rng.uniform(0.2, 5.0), rng.uniform(0.0, 20.0)
            dg = jc.gram_derivative(a, t)
            assert abs(dg[0, 0] + dg[3, 3]) < 1e-10
            assert abs(dg[1, 1] + dg[2, 2]) < 1e-10
            assert abs(dg[0, 2] + dg[3, 1]) < 1e-10

    def test_identity_channel_has_zero_derivative(self):
        # zero up to the certified Poisson tail of the truncated moment sums
        assert np.abs(jc.gram_derivative(1.0, 0.0)).max() < 1e-10

    def test_alpha_zero_raises(self):
        with pytest.raises(AlphaZero):
            jc.gram_derivative(0.0, 1.0)


class TestApplyChannel:
    def test_identity_at_tau_zero(self):
        gm = jc.gram_matrix(1.0, 0.0)
        rho = bloch.DensityMatrix2.from_bloch(bloch.BlochState(0.4, 0.1, -0.5))
        out = jc.apply_channel(gm, rho)
        npt.assert_allclose(out.matrix, rho.matrix, atol=1e-14)

    def test_ground_input_formulas(self):
        gm = jc.gram_matrix(1.5, 2.5)
        out = jc.apply_channel(gm, bloch.DensityMatrix2.from_bloch(bloch.GROUND)).to_bloch()
        assert out.x == pytest.approx(2.0 * gm.g[0, 3], abs=1e-12)
        assert out.z == pytest.approx(2.0 * gm.g[0, 0] - 1.0, abs=1e-12)

    def test_excited_matches_oracle_partial_trace(self):
        from jcqfi import oracle

        n_max = fock.choose_cutoff(2.0)
        gm = jc.gram_matrix(2.0, 3.0, n_max)
        out = jc.apply_channel(gm, bloch.DensityMatrix2.from_bloch(bloch.EXCITED))
        f0 = fock.coherent_vector(2.0, n_max)
        ref = oracle.reduced_state(oracle.joint_evolve(3.0, "excited", f0))
        npt.assert_allclose(out.matrix, ref.matrix, atol=1e-10)


class TestEvolveWithDerivative:
    def test_derivatives_match_finite_differences(self):
        h = 1e-5
        st = jc.evolve_with_derivative(2.0, 3.0, "ground")
        rp = jc.gram_to_affine(jc.gram_matrix(2.0 + h, 3.0)).apply(bloch.GROUND.r)
        rm = jc.gram_to_affine(jc.gram_matrix(2.0 - h, 3.0)).apply(bloch.GROUND.r)
        npt.assert_allclose(st.dr, (rp - rm) / (2 * h), atol=1e-6)

    def test_identity_at_tau_zero(self):
        st = jc.evolve_with_derivative(1.0, 0.0, "ground")
        npt.assert_allclose(st.r, [0.0, 0.0, 1.0], atol=1e-14)
        npt.assert_allclose(st.dr, 0.0, atol=1e-14)

    def test_large_alpha_rotation(self):
        st = jc.evolve_with_derivative(100.0, 1.0, "ground")
        q = math.exp(-0.5)
        assert st.x == pytest.approx(q * math.sin(200.0), abs=2e-2)
        assert st.z == pytest.approx(q * math.cos(200.0), abs=2e-2)


class TestQfiJc:
    def test_bounded_by_four(self):
        rng = np.random.default_rng(11)
        for _ in range(40):
            q = jc.qfi_jc(rng.uniform(0.05, 8.0), rng.uniform(0.0, 40.0), "ground")
            assert q <= 4.0 + 1e-8

    def test_vacuum_limit_peak(self):
        assert jc.qfi_jc(0.01, math.pi / 2, "ground") == pytest.approx(4.0, rel=0.01)

    def test_short_time_asymptote(self):
        assert jc.qfi_jc(100.0, 1.0, "ground") == pytest.approx(4.0 / math.e, rel=0.02)

    def test_tau_zero_is_zero(self):
        assert jc.qfi_jc(1.0, 0.0, "ground") == pytest.approx(0.0, abs=1e-12)


class TestAffine:
    def test_identity_at_tau_zero(self):
        ch = jc.gram_to_affine(jc.gram_matrix(0.7, 0.0))
        npt.assert_allclose(ch.a, np.eye(3), atol=1e-14)
        npt.assert_allclose(ch.b, 0.0, atol=1e-14)

    def test_vacuum_amplitude_damping(self):
        # alpha = 0: Kraus pair K0 = sin(tau) sigma-, K1 = |g><g| + cos(tau)|e><e|
        tau = 0.9
        ch = jc.gram_to_affine(jc.gram_matrix(0.0, tau))
        k0 = math.sin(tau) * np.array([[0, 1], [0, 0]], dtype=complex)
        k1 = np.diag([1.0, math.cos(tau)]).astype(complex)
        rng = np.random.default_rng(0)
        for _ in range(5):
            r = rng.normal(size=3)
            r *= rng.uniform(0, 1) / np.linalg.norm(r)
            rho = bloch.DensityMatrix2.from_bloch(bloch.BlochState(*r)).matrix
            ref = k0 @ rho @ k0.conj().T + k1 @ rho @ k1.conj().T
            got = bloch.DensityMatrix2.from_bloch(
                bloch.BlochState(*ch.apply(r))
            ).matrix
            npt.assert_allclose(got, ref, atol=1e-12)

    def test_roundtrip_with_operator_sum(self):
        rng = np.random.default_rng(4)
        axes = [v for i in range(3) for v in (np.eye(3)[i], -np.eye(3)[i])]
        for _ in range(5):
            gm = jc.gram_matrix(rng.uniform(0.1, 5.0), rng.uniform(0.0, 25.0))
            ch = jc.gram_to_affine(gm)
            for ax in axes:
                direct = jc.apply_channel(gm, bloch.DensityMatrix2.from_bloch(bloch.BlochState(*ax)))
                npt.assert_allclose(ch.apply(ax), direct.to_bloch().r, atol=1e-12)


class TestSweep:
    def test_matches_reference_path(self):
        rng = np.random.default_rng(1)
        for _ in range(5):
            a, t = rng.uniform(0.3, 5.0), rng.uniform(0.1, 20.0)
            sw = jc.sweep_ground_excited(a, [t])
            for init, key in (("ground", "g"), ("excited", "e")):
                st = jc.evolve_with_derivative(a, t, init)
                assert sw[f"x_{key}"][0] == pytest.approx(st.x, abs=1e-12)
                assert sw[f"z_{key}"][0] == pytest.approx(st.z, abs=1e-12)
                assert sw[f"dx_{key}"][0] == pytest.approx(st.dx, abs=1e-12)
                assert sw[f"dz_{key}"][0] == pytest.approx(st.dz, abs=1e-12)

    def test_alpha_zero_rejected(self):
        with pytest.raises(AlphaZero):
            jc.sweep_ground_excited(0.0, [1.0])
