"""Large-amplitude channel: collapse, revivals, slow phase, regime QFI formulas.

For alpha >> 1 the atomic channel decomposes into a totally depolarizing part
plus two families of terms: fast-phase terms (nu, Q_nu, Phi_nu) that rotate
and dephase (x, z), reviving near tau = 2 pi alpha nu, and slow-phase terms
(nu, P_nu, Omega_nu) acting on the unit/y components, reviving near
tau = 8 pi nu alpha^3.  Closed amplitude/phase expressions:

    Q_0 = e^{-tau^2/2}                     Phi_0 = 2 alpha tau
    Q_nu = e^{-R_nu^2}/sqrt(pi nu)         Phi_nu = tau^2/(2 pi nu) - pi/4
    P_0 = e^{-tau^2/(32 alpha^4)}          Omega_0 = tau/(2 alpha)
    P_nu = e^{-F_nu^2}/sqrt(3 pi nu)       Omega_nu = (3/2)(pi nu)^{1/3} tau^{2/3} + pi/4

with R_nu = (tau - 2 pi alpha nu)/(sqrt(2) pi nu) and
F_nu = (tau^{1/3} - 2 alpha (pi nu)^{1/3})/(sqrt(2) (pi nu)^{1/3}).
Alpha enters only through Phi_0, R_nu, Omega_0/P_0 and F_nu, so the state
derivative needed for the QFI is available in closed form as well.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bloch import BlochState
from .errors import AlphaTooSmall, OutOfDomain
from .jc import AffineChannel

ALPHA_GUARD = 10.0
ALPHA_COMFORT = 20.0
PRUNE = 1e-14


def lambert_w0(x: float) -> float:
    """Principal branch of the Lambert W function via Halley iteration.

    Valid for x >= -1/e; converges to ~1e-15 relative residual from a
    branch-point / logarithmic seed.
    """
    branch = -math.exp(-1.0)
    if x < branch:
        if x > branch * (1.0 + 1e-12) or math.isclose(x, branch, rel_tol=1e-12):
            return -1.0
        raise OutOfDomain(f"lambert_w0 requires x >= -1/e, got {x}")
    if x == 0.0:
        return 0.0
    if x < -0.3235:
        p = math.sqrt(max(2.0 * (math.e * x + 1.0), 0.0))
        w = -1.0 + p - p * p / 3.0 + 11.0 * p ** 3 / 72.0
        if p < 1e-6:  # essentially at the branch point; Halley would divide by 1+w
            return w
    elif x < 0.5:
        w = x * (1.0 - x)
    else:
        w = math.log(1.0 + x)
    for _ in range(60):
        ew = math.exp(w)
        resid = w * ew - x
        denom = ew * (w + 1.0) - (w + 2.0) * resid / (2.0 * w + 2.0)
        step = resid / denom
        w -= step
        if abs(step) <= 1e-15 * max(1.0, abs(w)):
            break
    return w


def r_nu(alpha: float, tau: float, nu: int) -> float:
    return (tau - 2.0 * math.pi * alpha * nu) / (math.sqrt(2.0) * math.pi * nu)


def f_nu(alpha: float, tau: float, nu: int) -> float:
    scale = (math.pi * nu) ** (1.0 / 3.0)
    return (tau ** (1.0 / 3.0) - 2.0 * alpha * scale) / (math.sqrt(2.0) * scale)


@dataclass(frozen=True)
class AsymptoticChannel:
    """Pruned collapse/revival term sets at one (alpha, tau)."""

    alpha: float
    tau: float
    fast_terms: list  # (nu, Q_nu, Phi_nu)
    slow_terms: list  # (nu, P_nu, Omega_nu)
    nu_max: int
    within_validity: bool


def build_asymptotic_channel(
    alpha: float, tau: float, nu_max: int | None = None
) -> AsymptoticChannel:
    """Assemble all fast/slow terms with amplitude above the pruning floor.

    The default index ranges, ceil(tau/(pi alpha)) + 3 for fast terms and
    ceil(tau/(4 pi alpha^3)) + 3 for slow ones, cover every revival center up
    to twice the current time; the closest index and both neighbors are thus
    always present before pruning.
    """
    if alpha < ALPHA_GUARD:
        raise AlphaTooSmall(f"asymptotic channel needs alpha >= {ALPHA_GUARD}")
    if tau < 0.0:
        raise ValueError("tau must be nonnegative")
    nf = nu_max if nu_max is not None else math.ceil(tau / (math.pi * alpha)) + 3
    ns = nu_max if nu_max is not None else math.ceil(tau / (4.0 * math.pi * alpha ** 3)) + 3

    fast = []
    q0 = math.exp(-0.5 * tau * tau)
    if q0 >= PRUNE:
        fast.append((0, q0, 2.0 * alpha * tau))
    if nf >= 1:
        nu = np.arange(1, nf + 1, dtype=float)
        r = (tau - 2.0 * math.pi * alpha * nu) / (math.sqrt(2.0) * math.pi * nu)
        q = np.exp(-r * r) / np.sqrt(math.pi * nu)
        # (1 - 2R^2)/(2 pi nu) is the next-order stationary-phase term from
        # the curvature of the Poisson envelope; without it the revival-center
        # phase carries a constant O(1/nu) offset that never decays with alpha
        phi = (
            tau * tau / (2.0 * math.pi * nu)
            - math.pi / 4.0
            + (1.0 - 2.0 * r * r) / (2.0 * math.pi * nu)
        )
        keep = q >= PRUNE
        fast.extend(zip(nu[keep].astype(int), q[keep], phi[keep]))

    slow = []
    p0 = math.exp(-tau * tau / (32.0 * alpha ** 4))
    if p0 >= PRUNE:
        slow.append((0, p0, tau / (2.0 * alpha)))
    if ns >= 1:
        nu = np.arange(1, ns + 1, dtype=float)
        scale = (math.pi * nu) ** (1.0 / 3.0)
        f = (tau ** (1.0 / 3.0) - 2.0 * alpha * scale) / (math.sqrt(2.0) * scale)
        p = np.exp(-f * f) / np.sqrt(3.0 * math.pi * nu)
        omega = 1.5 * scale * tau ** (2.0 / 3.0) + math.pi / 4.0
        keep = p >= PRUNE
        slow.extend(zip(nu[keep].astype(int), p[keep], omega[keep]))

    return AsymptoticChannel(
        alpha, tau, fast, slow, max(nf, ns), within_validity=alpha >= ALPHA_COMFORT
    )


def _term_sums(ch: AsymptoticChannel):
    """Fast/slow sums and their alpha derivatives.

    Returns (cq, sq, dcq, dsq) for sum Q cos(Phi) / sum Q (-1)^nu sin(Phi)
    style sums, and the same for the slow family.
    """
    alpha, tau = ch.alpha, ch.tau
    qc = qs_alt = qc_alt = qs = 0.0
    dqc = dqs_alt = dqc_alt = dqs = 0.0
    for nu, q, phi in ch.fast_terms:
        sgn = -1.0 if nu % 2 else 1.0
        c, s = math.cos(phi), math.sin(phi)
        if nu == 0:
            dq, dphi = 0.0, 2.0 * tau
        else:
            r = r_nu(alpha, tau, nu)
            dq = 2.0 * math.sqrt(2.0) * r * q
            dphi = 2.0 * math.sqrt(2.0) * r / (math.pi * nu)  # envelope-curvature term
        qc += q * c
        qs += q * s
        qc_alt += sgn * q * c
        qs_alt += sgn * q * s
        dqc += dq * c - q * s * dphi
        dqs += dq * s + q * c * dphi
        dqc_alt += sgn * (dq * c - q * s * dphi)
        dqs_alt += sgn * (dq * s + q * c * dphi)

    ps_alt = pc_alt = 0.0
    dps_alt = dpc_alt = 0.0
    for nu, p, omega in ch.slow_terms:
        sgn = -1.0 if nu % 2 else 1.0
        c, s = math.cos(omega), math.sin(omega)
        if nu == 0:
            dp = (tau * tau / (8.0 * alpha ** 5)) * p
            domega = -tau / (2.0 * alpha * alpha)
        else:
            dp = 2.0 * math.sqrt(2.0) * f_nu(alpha, tau, nu) * p
            domega = 0.0
        ps_alt += sgn * p * s
        pc_alt += sgn * p * c
        dps_alt += sgn * (dp * s + p * c * domega)
        dpc_alt += sgn * (dp * c - p * s * domega)
    return (qc, qs, qc_alt, qs_alt, dqc, dqs, dqc_alt, dqs_alt,
            ps_alt, pc_alt, dps_alt, dpc_alt)


def asymptotic_affine(ch: AsymptoticChannel) -> AffineChannel:
    """Bloch-affine form of the asymptotic channel, with alpha derivatives."""
    (qc, qs, qc_alt, qs_alt, dqc, dqs, dqc_alt, dqs_alt,
     ps_alt, pc_alt, dps_alt, dpc_alt) = _term_sums(ch)
    a = np.array(
        [[qc_alt, 0.0, qs_alt], [0.0, pc_alt, 0.0], [-qs, 0.0, qc]]
    )
    b = np.array([ps_alt, 0.0, 0.0])
    da = np.array(
        [[dqc_alt, 0.0, dqs_alt], [0.0, dpc_alt, 0.0], [-dqs, 0.0, dqc]]
    )
    db = np.array([dps_alt, 0.0, 0.0])
    return AffineChannel(a, b, da, db)


def short_time_affine(alpha: float, tau: float) -> AffineChannel:
    """The nu = 0 (collapse-only) channel: rotation by 2 alpha tau with
    dephasing e^{-tau^2/2}; algebraically identical to the quadrature-coupling
    channel of jcqfi.limits."""
    q = math.exp(-0.5 * tau * tau)
    c, s = math.cos(2.0 * alpha * tau), math.sin(2.0 * alpha * tau)
    a = np.array([[q * c, 0.0, q * s], [0.0, 1.0, 0.0], [-q * s, 0.0, q * c]])
    da = 2.0 * tau * q * np.array([[-s, 0.0, c], [0.0, 0.0, 0.0], [-c, 0.0, -s]])
    return AffineChannel(a, np.zeros(3), da, np.zeros(3))


def asymptotic_state(
    alpha: float, tau: float, initial: str, nu_max: int | None = None
) -> BlochState:
    """Evolved Bloch vector and alpha derivative from the asymptotic channel."""
    if initial == "ground":
        sgn = 1.0
    elif initial == "excited":
        sgn = -1.0
    else:
        raise ValueError("initial must be 'ground' or 'excited'")
    ch = build_asymptotic_channel(alpha, tau, nu_max)
    (qc, qs, qc_alt, qs_alt, dqc, dqs, dqc_alt, dqs_alt,
     ps_alt, pc_alt, dps_alt, dpc_alt) = _term_sums(ch)
    x = ps_alt + sgn * qs_alt
    z = sgn * qc
    dx = dps_alt + sgn * dqs_alt
    dz = sgn * dqc
    n = math.hypot(x, z)
    if n > 1.0:  # asymptotic terms can overshoot the ball by O(1/alpha)
        x, z = x / n, z / n
    return BlochState(x, 0.0, z, dx=dx, dy=0.0, dz=dz)


def qfi_short_time(tau: float) -> float:
    """Collapse-regime QFI 4 tau^2 e^{-tau^2}, bounded by 4/e (at tau = 1)."""
    if tau < 0.0:
        raise ValueError("tau must be nonnegative")
    return 4.0 * tau * tau * math.exp(-tau * tau)


def qfi_revival(alpha: float, tau: float, nu: int) -> float:
    """Envelope QFI near the fast revival nu: 8 R^2/(pi nu e^{2R^2} - 1)."""
    if nu < 1:
        raise ValueError("nu must be >= 1")
    r2 = r_nu(alpha, tau, nu) ** 2
    if r2 == 0.0:
        return 0.0
    return 8.0 * r2 / (math.pi * nu * math.exp(2.0 * r2) - 1.0)


def optimal_revival_qfi(nu: int):
    """Peak revival QFI -4 W0(-1/(e pi nu)) and the two optimal tau offsets
    (relative to the revival center 2 pi alpha nu)."""
    if nu < 1:
        raise ValueError("nu must be >= 1")
    w = lambert_w0(-1.0 / (math.e * math.pi * nu))
    offset = math.pi * nu * math.sqrt(1.0 + w)
    return -4.0 * w, (-offset, offset)


def qfi_alphasq(alpha: float, tau: float) -> float:
    """Slow-phase envelope QFI (tau^2/4 alpha^4) e^{-tau^2/(16 alpha^4)};
    peaks at 4/e for tau = 4 alpha^2."""
    u = tau * tau / (16.0 * alpha ** 4)
    return 4.0 * u * math.exp(-u)


def qfi_late_revival(alpha: float, tau: float, nu: int) -> float:
    """Envelope QFI near the slow revival nu: 8 F^2/(3 pi nu e^{2F^2} - 1)."""
    if nu < 1:
        raise ValueError("nu must be >= 1")
    f2 = f_nu(alpha, tau, nu) ** 2
    if f2 == 0.0:
        return 0.0
    return 8.0 * f2 / (3.0 * math.pi * nu * math.exp(2.0 * f2) - 1.0)


def optimal_late_revival(nu: int, alpha: float | None = None):
    """Late-revival peak QFI -8 W0(-1/(3 e pi nu)) with its bracketing times.

    The peak value is the one the exact channel reaches numerically around
    tau ~ pi nu (2 alpha +- 2)^3; it sits a factor ~2 above the supremum of
    the printed single-term envelope, the remainder being carried by the
    dense overlapping fast revivals at those times (their contribution decays
    only as the envelope itself does).  With alpha given, the returned
    bracket is (pi nu (2 alpha - 2)^3, pi nu (2 alpha + 2)^3); otherwise the
    two F offsets are returned in place of absolute times.
    """
    if nu < 1:
        raise ValueError("nu must be >= 1")
    w = lambert_w0(-1.0 / (3.0 * math.e * math.pi * nu))
    qfi = -8.0 * w
    if alpha is None:
        off = math.sqrt(1.0 + w)
        return qfi, (-off, off)
    lo = math.pi * nu * (2.0 * alpha - 2.0) ** 3
    hi = math.pi * nu * (2.0 * alpha + 2.0) ** 3
    return qfi, (lo, hi)


def fi_population_asymptotic(alpha: float, tau: float) -> float:
    """Population-measurement FI in the collapse or fast-revival regime.

    Collapse: 4 tau^2 sin^2(2 alpha tau)/(e^{tau^2} - cos^2(2 alpha tau));
    revivals: 8 R^2 cos^2(Phi)/(pi nu e^{2R^2} - cos^2(Phi)).  Bounded by the
    corresponding QFI, with equality at favorable phases.
    """
    nu = int(round(tau / (2.0 * math.pi * alpha)))
    if nu == 0:
        s2 = math.sin(2.0 * alpha * tau) ** 2
        return 4.0 * tau * tau * s2 / (math.exp(tau * tau) - (1.0 - s2))
    r2 = r_nu(alpha, tau, nu) ** 2
    c2 = math.cos(tau * tau / (2.0 * math.pi * nu) - math.pi / 4.0) ** 2
    if c2 == 0.0:
        return 0.0
    return 8.0 * r2 * c2 / (math.pi * nu * math.exp(2.0 * r2) - c2)
