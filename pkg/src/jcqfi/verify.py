"""Invariant and oracle-equivalence suite behind `jcqfi verify`.

Every check measures one module invariant and compares it against its stated
tolerance; the CLI renders the results as a JSON report and exits nonzero if
any check fails.  Analytic checks are deterministic; randomized ones draw
from a seeded generator so that reruns (and different seeds) reproduce the
same pass set.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from . import asymptotic, bloch, collision, fock, jc, limits, lindblad, oracle
from .optimize import bracketed_max


@dataclass
class CheckResult:
    name: str
    value: float
    tolerance: float
    passed: bool

    @classmethod
    def le(cls, name, value, tolerance):
        return cls(name, float(value), float(tolerance), bool(value <= tolerance))


def _random_physical_state(rng, max_norm=0.999):
    v = rng.normal(size=3)
    v *= rng.uniform(0.0, max_norm) / np.linalg.norm(v)
    return v


def check_bloch_qfi_nonneg(rng):
    worst = 0.0
    for _ in range(10_000):
        r = _random_physical_state(rng)
        dr = rng.normal(size=3)
        st = bloch.BlochState(*r).with_derivatives(dr=dr)
        worst = min(worst, bloch.qfi_bloch(st))
    return CheckResult.le("bloch_qfi_nonneg", -worst, 1e-12)


def _jc_instances(rng, count, alpha_hi=6.0, tau_hi=30.0):
    for _ in range(count):
        yield rng.uniform(0.05, alpha_hi), rng.uniform(0.0, tau_hi)


def check_bloch_qfi_vs_bures(rng):
    """qfi_bloch against the symmetric fidelity difference, dtheta = 1e-4.

    Centering at theta +- dtheta/2 cancels the odd Bures-expansion term, so
    the estimate carries only the stated O(dtheta^2) bias.
    """
    h, worst = 1e-4, 0.0
    for alpha, tau in _jc_instances(rng, 10):
        init = "ground" if rng.random() < 0.5 else "excited"
        st = jc.evolve_with_derivative(alpha, tau, init)
        if 1.0 - st.r @ st.r <= 1e-6:
            continue
        rho0 = bloch.DensityMatrix2.from_bloch(bloch.initial_bloch(init))
        rho_m = jc.apply_channel(jc.gram_matrix(alpha - h / 2, tau), rho0)
        rho_p = jc.apply_channel(jc.gram_matrix(alpha + h / 2, tau), rho0)
        fd = 8.0 * (1.0 - oracle.fidelity2(rho_m, rho_p)) / (h * h)
        worst = max(worst, abs(fd - bloch.qfi_bloch(st)))
    return CheckResult.le("bloch_qfi_vs_bures_fd", worst, 1e-5)


def check_fi_population_le_qfi(rng):
    worst = -math.inf
    for alpha, tau in _jc_instances(rng, 40):
        for init in ("ground", "excited"):
            st = jc.evolve_with_derivative(alpha, tau, init)
            if 1.0 - st.r @ st.r <= 1e-9:
                continue
            fi = bloch.fi_population(st.z, st.dz)
            worst = max(worst, fi - bloch.qfi_bloch(st))
    return CheckResult.le("fi_population_le_qfi", worst, 1e-9)


def check_sld(rng):
    worst_resid, worst_qfi = 0.0, 0.0
    for _ in range(50):
        r = _random_physical_state(rng, max_norm=0.95)
        dr = rng.normal(size=3)
        rho = bloch.DensityMatrix2.from_bloch(bloch.BlochState(*r))
        drho = bloch.bloch_derivative_matrix(dr)
        ell = bloch.sld(rho, drho)
        resid = np.abs(0.5 * (ell @ rho.matrix + rho.matrix @ ell) - drho).max()
        worst_resid = max(worst_resid, resid)
        q = bloch.qfi_bloch(bloch.BlochState(*r).with_derivatives(dr=dr))
        worst_qfi = max(worst_qfi, abs(np.trace(ell @ ell @ rho.matrix).real - q))
    return [
        CheckResult.le("sld_lyapunov_residual", worst_resid, 1e-10),
        CheckResult.le("sld_qfi_consistency", worst_qfi, 1e-8),
    ]


def check_fock_norm_tail(rng):
    worst = 0.0
    for alpha in (0.0, 0.5, 2.0, 10.0, 25.1, 50.0, 100.0):
        v = fock.coherent_vector(alpha, fock.choose_cutoff(alpha))
        worst = max(worst, abs(v.norm2() + v.tail_mass - 1.0))
    return CheckResult.le("fock_norm_plus_tail", worst, 1e-12)


def check_poisson_moments(rng):
    worst = 0.0
    for alpha in (0.5, 2.0, 10.0, 50.0):
        n_max = fock.choose_cutoff(alpha)
        mu = alpha * alpha
        exact = (1.0, mu, mu * mu + mu)
        for k in (0, 1, 2):
            got = fock.poisson_expect(alpha, lambda n: np.asarray(n, dtype=float) ** k, n_max)
            worst = max(worst, abs(got - exact[k]) / exact[k])
    return CheckResult.le("poisson_raw_moments", worst, 1e-10)


def check_d_alpha_ket(rng):
    worst = 0.0
    for alpha in (0.1, 1.0, 5.0, 20.0):
        n_max = fock.choose_cutoff(alpha)
        coh = fock.coherent_vector(alpha, n_max)
        dk = fock.d_alpha_ket(alpha, n_max)
        worst = max(worst, abs(dk.norm2() - 1.0), abs(dk.inner(coh)))
    return CheckResult.le("d_alpha_ket_orthonormal", worst, 1e-10)


def check_gram_trace_preservation(rng):
    worst = 0.0
    for alpha in np.linspace(0.0, 6.0, 7):
        for tau in np.linspace(0.0, 30.0, 7):
            g = jc.gram_matrix(float(alpha), float(tau)).g
            worst = max(
                worst,
                abs(g[0, 0] + g[3, 3] - 1.0),
                abs(g[1, 1] + g[2, 2] - 1.0),
                abs(g[0, 2] + g[3, 1]),
            )
    return CheckResult.le("gram_trace_preservation", worst, 1e-10)


def check_channel_positivity(rng):
    worst = -1.0
    axis_states = [bloch.BlochState(*v) for v in
                   ([1, 0, 0], [-1, 0, 0], [0, 1, 0], [0, -1, 0], [0, 0, 1], [0, 0, -1])]
    for alpha, tau in _jc_instances(rng, 20):
        gm = jc.gram_matrix(alpha, tau)
        for st in axis_states:
            out = jc.apply_channel(gm, bloch.DensityMatrix2.from_bloch(st))
            ev = bloch.eigvals2(out.matrix)
            worst = max(worst, -ev.min(), ev.max() - 1.0)
    return CheckResult.le("apply_channel_positivity", worst, 1e-10)


def check_qfi_jc_bound(rng):
    worst = 0.0
    for alpha in np.linspace(0.2, 10.0, 50):
        taus = np.linspace(0.0, 50.0, 60)
        sw = jc.sweep_ground_excited(float(alpha), taus)
        for k in ("g", "e"):
            q = jc.qfi_from_xz(sw[f"x_{k}"], sw[f"z_{k}"], sw[f"dx_{k}"], sw[f"dz_{k}"])
            worst = max(worst, float(q.max()))
    return CheckResult.le("qfi_jc_upper_bound", worst - 4.0, 1e-8)


def oracle_equivalence(rng, count=100):
    """Gram-channel state vs joint-evolution partial trace, plus dG/dalpha
    vs central finite differences.  Returns the two worst deviations."""
    worst_state, worst_dg = 0.0, 0.0
    for alpha, tau in _jc_instances(rng, count):
        n_max = fock.choose_cutoff(alpha)
        gm = jc.gram_matrix(alpha, tau, n_max)
        field0 = fock.coherent_vector(alpha, n_max)
        init = "ground" if rng.random() < 0.5 else "excited"
        rho_chan = jc.apply_channel(gm, bloch.DensityMatrix2.from_bloch(bloch.initial_bloch(init)))
        rho_orac = oracle.reduced_state(oracle.joint_evolve(tau, init, field0))
        worst_state = max(worst_state, float(np.abs(rho_chan.matrix - rho_orac.matrix).max()))

        h = 1e-5
        dg = jc.gram_derivative(alpha, tau, n_max)
        fd = (jc.gram_matrix(alpha + h, tau, n_max).g - jc.gram_matrix(max(alpha - h, 1e-12), tau, n_max).g) / (2.0 * h)
        scale = max(1.0, float(np.abs(dg).max()))
        worst_dg = max(worst_dg, float(np.abs(dg - fd).max()) / scale)
    return worst_state, worst_dg


def check_oracle_equivalence(rng):
    worst_state, worst_dg = oracle_equivalence(rng)
    return [
        CheckResult.le("oracle_state_equivalence", worst_state, 1e-10),
        CheckResult.le("gram_derivative_vs_fd", worst_dg, 1e-6),
    ]


def check_joint_norm(rng):
    worst = 0.0
    for alpha, tau in _jc_instances(rng, 10, alpha_hi=4.0):
        f0 = fock.coherent_vector(alpha, fock.choose_cutoff(alpha))
        js = oracle.joint_evolve(tau, "excited", f0)
        worst = max(worst, abs(js.norm2() - 1.0) - js.tail_mass)
    return CheckResult.le("joint_norm_conservation", worst, 1e-10)


def check_expm_vs_block(rng):
    worst = 0.0
    for _ in range(3):
        alpha = rng.uniform(0.2, 3.0)
        tau = rng.uniform(0.0, 10.0)
        f0 = fock.coherent_vector(alpha, fock.choose_cutoff(alpha))
        a = oracle.joint_evolve(tau, "ground", f0)
        b = oracle.joint_evolve_expm(tau, "ground", f0)
        n = min(a.n_max, b.n_max) + 1
        worst = max(
            worst,
            float(np.abs(a.cg[:n] - b.cg[:n]).max()),
            float(np.abs(a.ce[:n] - b.ce[:n]).max()),
        )
    return CheckResult.le("expm_vs_block_propagator", worst, 1e-8)


def check_vacuum_series_scaling(rng):
    errs = []
    for a in (0.02, 0.04, 0.08):
        g_exact = jc.gram_matrix(a, 2.0).g
        errs.append(float(np.abs(g_exact - limits.vacuum_gram(2.0, a)).max()))
    ratio = min(errs[1] / errs[0], errs[2] / errs[1])
    # halving alpha must cut the O(alpha^3) error by >= 8x, 20% slack
    return CheckResult("vacuum_series_cubic_scaling", ratio, 6.4, ratio >= 6.4)


def check_covariant(rng):
    worst_quad, worst_ident = 0.0, 0.0
    for alpha, tau in ((1.5, 0.8), (0.3, 2.0), (4.0, 1.3)):
        cc = limits.covariant_channel(alpha, tau)
        worst_quad = max(worst_quad, float(np.abs(cc.a - limits.covariant_channel_quadrature(alpha, tau).a).max()))
        st = asymptotic.short_time_affine(alpha, tau)
        worst_ident = max(
            worst_ident,
            float(np.abs(cc.a - st.a).max()),
            float(np.abs(cc.da - st.da).max()),
        )
    return [
        CheckResult.le("covariant_vs_quadrature", worst_quad, 1e-10),
        CheckResult.le("covariant_equals_short_time_jc", worst_ident, 1e-12),
    ]


def check_asymptotic_accuracy(rng):
    worst = 0.0  # worst of err*alpha over the probe set
    for alpha in (20.0, 50.0, 100.0):
        taus = (0.5, 1.0, 2.0, math.pi * alpha, 2 * math.pi * alpha,
                2 * math.pi * alpha - math.pi, 2 * math.pi * alpha + math.pi)
        for tau in taus:
            st_a = asymptotic.asymptotic_state(alpha, tau, "ground")
            st_e = jc.evolve_with_derivative(alpha, tau, "ground")
            err = max(abs(st_a.x - st_e.x), abs(st_a.z - st_e.z))
            worst = max(worst, err * alpha)
    return CheckResult.le("asymptotic_state_accuracy_C", worst, 5.0)


def check_qfi_short_time_bound(rng):
    taus = np.linspace(0.0, 5.0, 2001)
    vals = 4.0 * taus**2 * np.exp(-(taus**2))
    cap = 4.0 / math.e
    over = float(vals.max()) - cap
    at_one = abs(asymptotic.qfi_short_time(1.0) - cap)
    return [
        CheckResult.le("qfi_short_time_bound", over, 1e-12),
        CheckResult.le("qfi_short_time_peak_at_one", at_one, 1e-12),
    ]


def check_revival_lambert(rng):
    worst = 0.0
    for nu in (1, 2, 3, 5):
        peak, _ = asymptotic.optimal_revival_qfi(nu)
        _, numeric = bracketed_max(
            lambda r2: 8.0 * r2 / (math.pi * nu * math.exp(2.0 * r2) - 1.0),
            0.0, 4.0, coarse=400, tol=1e-12,
        )
        worst = max(worst, abs(peak - numeric))
    return CheckResult.le("revival_lambert_consistency", worst, 1e-10)


def check_asymptotic_ball(rng):
    worst_amp, worst_ball = 0.0, 0.0
    for alpha in (20.0, 100.0):
        for tau in (0.5, 1.0, math.pi * alpha, 2 * math.pi * alpha, 2 * math.pi * alpha + 2.0):
            ch = asymptotic.build_asymptotic_channel(alpha, tau)
            for _, amp, _ in ch.fast_terms + ch.slow_terms:
                worst_amp = max(worst_amp, amp - 1.0, -amp)
            aff = asymptotic.asymptotic_affine(ch)
            worst_ball = max(worst_ball, aff.ball_violation())
    return [
        CheckResult.le("asymptotic_amplitudes_in_unit", worst_amp, 0.0),
        CheckResult.le("asymptotic_ball_contraction", worst_ball, 1e-6),
    ]


def check_compose_identity(rng):
    ident = jc.AffineChannel(np.eye(3), np.zeros(3), np.zeros((3, 3)), np.zeros(3))
    worst = 0.0
    for n in (1, 7, 40):
        st = collision.compose_n(ident, (0.3, -0.4), n)
        worst = max(worst, float(np.abs(st.r - np.array([0.3, 0.0, -0.4])).max()), float(np.abs(st.dr).max()))
    return CheckResult.le("compose_identity_fixpoint", worst, 1e-14)


def check_composed_bound(rng):
    worst = -math.inf
    for alpha, tau, n in ((50.0, 0.2, 25), (20.0, 0.5, 10), (5.0, 1.0, 4), (2.0, 0.3, 8)):
        ch = jc.gram_to_affine(jc.gram_with_derivative(alpha, tau))
        st = collision.compose_n(ch, "ground", n)
        worst = max(worst, bloch.qfi_bloch(st) - 4.0 * n)
    return CheckResult.le("composed_qfi_le_4n", worst, 1e-6)


def check_collision_argmax(rng):
    worst = 0.0
    for n in (1, 2, 4, 9, 16):
        t_star, _ = bracketed_max(lambda t: collision.qfi_n_closed(t, n), 1e-4, 2.0, coarse=400, tol=1e-10)
        worst = max(worst, abs(t_star - 1.0 / math.sqrt(n)))
    return CheckResult.le("collision_argmax_inv_sqrt_n", worst, 1e-6)


def check_continuous_limits(rng):
    rep1 = collision.continuous_limit_check(1.0, 1.0, 2.0, [0.02, 0.01, 0.005, 0.0025])
    rep2 = collision.infinite_modes_limit(5.0, 1.0, [0.1, 0.05, 0.025, 0.0125])
    ratios = rep1.ratios + rep2.ratios
    lo, hi = min(ratios), max(ratios)
    ok = 1.7 <= lo and hi <= 2.3
    return CheckResult("continuous_limits_first_order", lo, 1.7, ok)


def check_lindblad_physical(rng):
    worst = 0.0
    for _ in range(30):
        eb = rng.uniform(0.0, 5.0)
        s = rng.uniform(0.0, 20.0)
        init = (rng.uniform(-0.7, 0.7), rng.uniform(-0.7, 0.7))
        st = lindblad.evolve_master(eb, s, init)
        worst = max(worst, float(np.linalg.norm(st.r)) - 1.0)
    return CheckResult.le("lindblad_physicality", worst, 1e-10)


def check_lindblad_sensitivity(rng):
    h, worst = 1e-5, 0.0
    for _ in range(20):
        eb = rng.uniform(0.0, 5.0)
        s = rng.uniform(0.1, 20.0)
        init = (rng.uniform(-0.7, 0.7), rng.uniform(-0.7, 0.7))
        st = lindblad.evolve_master(eb, s, init)
        rp = lindblad.evolve_master(eb + h, s, init).r
        rm = lindblad.evolve_master(max(eb - h, 0.0), s, init).r if eb >= h else None
        fd = (rp - rm) / (2 * h) if rm is not None else None
        if fd is None:
            continue
        worst = max(worst, float(np.abs(st.dr - fd).max()))
    return CheckResult.le("lindblad_sensitivity_vs_fd", worst, 1e-6)


def check_lindblad_steady(rng):
    worst = 0.0
    for eb in (0.0, 0.3, 1.0, 3.0):
        st = lindblad.evolve_master(eb, 60.0, "excited")
        worst = max(worst, float(np.linalg.norm(st.r - lindblad.steady_state(eb).r)))
    return CheckResult.le("lindblad_steady_limit", worst, 1e-8)


def check_lindblad_rate_bound(rng):
    worst = 0.0
    for eb in (0.0, 0.5, 1.0, 2.0):
        worst = max(worst, lindblad.qfi_rate(eb, "ground").value)
    return CheckResult.le("lindblad_rate_bound", worst - 4.0, 1e-6)


def check_lindblad_closed_eps0(rng):
    worst = 0.0
    for _ in range(50):
        x0 = rng.uniform(-0.95, 0.95)
        z0 = rng.uniform(-0.95, 0.95)
        if x0 * x0 + z0 * z0 >= 0.95 or (abs(x0) < 1e-3 and abs(z0 - 1.0) < 1e-3):
            continue
        s = rng.uniform(0.05, 20.0)
        got = lindblad.qfi_lindblad(0.0, s, (x0, z0))
        ref = lindblad.qfi_real_initial_closed(s, x0, z0)
        worst = max(worst, abs(got - ref))
    return CheckResult.le("lindblad_closed_form_eps0", worst, 1e-8)


def check_scan_determinism(rng):
    from . import cli

    cfg = cli.SweepConfig(
        mode="scan",
        alpha_range=(0.0, 2.0, 4),
        tau_range=(0.0, 5.0, 6),
    )
    out1 = cli.render_table(*cli.run_scan(cfg), fmt="csv")
    out2 = cli.render_table(*cli.run_scan(cfg), fmt="csv")
    return CheckResult("scan_deterministic_bytes", float(out1 == out2), 1.0, out1 == out2)


ALL_CHECKS = [
    check_bloch_qfi_nonneg,
    check_bloch_qfi_vs_bures,
    check_fi_population_le_qfi,
    check_sld,
    check_fock_norm_tail,
    check_poisson_moments,
    check_d_alpha_ket,
    check_gram_trace_preservation,
    check_channel_positivity,
    check_qfi_jc_bound,
    check_oracle_equivalence,
    check_joint_norm,
    check_expm_vs_block,
    check_vacuum_series_scaling,
    check_covariant,
    check_asymptotic_accuracy,
    check_qfi_short_time_bound,
    check_revival_lambert,
    check_asymptotic_ball,
    check_compose_identity,
    check_composed_bound,
    check_collision_argmax,
    check_continuous_limits,
    check_lindblad_physical,
    check_lindblad_sensitivity,
    check_lindblad_steady,
    check_lindblad_rate_bound,
    check_lindblad_closed_eps0,
    check_scan_determinism,
]


def run_verify(seed: int = 1234) -> dict:
    """Run every registered check; returns a JSON-ready report."""
    results = []
    for fn in ALL_CHECKS:
        rng = np.random.default_rng(seed)
        out = fn(rng)
        results.extend(out if isinstance(out, list) else [out])
    return {
        "schema": "jc-qfi verify v1",
        "seed": seed,
        "all_pass": all(r.passed for r in results),
        "checks": [asdict(r) for r in results],
    }
