"""Closed-form small-amplitude expansion and the quadrature-coupling encoding.

The vacuum expansion writes the channel matrix as
G = G0 + alpha G1 + alpha^2 G2 + O(alpha^3), with G0 the spontaneous-decay
channel.  The expansion carries exact alpha derivatives, which is what makes
it the correct tool at alpha = 0 where the exact Gram derivative expressions
break down.

The quadrature coupling rotates the probe by an angle proportional to the
field x quadrature; averaging the rotation over the coherent Gaussian gives
a dephased rotation identical to the short-time Jaynes-Cummings channel,
with QFI 4 tau^2 e^{-tau^2} for either pole state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bloch import BlochState, initial_bloch, qfi_bloch
from .jc import AffineChannel

VACUUM_VALIDITY_ALPHA = 0.2


@dataclass(frozen=True)
class VacuumSeries:
    """Channel-matrix expansion coefficients G0, G1, G2 at fixed tau."""

    g0: np.ndarray
    g1: np.ndarray
    g2: np.ndarray
    tau: float


def vacuum_series(tau: float) -> VacuumSeries:
    """Expansion of the channel matrix around the vacuum, exact through alpha^2."""
    c, s = math.cos(tau), math.sin(tau)
    c2, s2 = math.cos(2.0 * tau), math.sin(2.0 * tau)
    cr, sr = math.cos(math.sqrt(2.0) * tau), math.sin(math.sqrt(2.0) * tau)
    g0 = np.array(
        [
            [1.0, c, 0.0, 0.0],
            [c, c * c, 0.0, 0.0],
            [0.0, 0.0, s * s, 0.0],
            [0.0, 0.0, 0.0, 0.0],
        ]
    )
    g1 = np.array(
        [
            [0.0, 0.0, -0.5 * s2, s],
            [0.0, 0.0, -s * cr, 0.5 * s2],
            [-0.5 * s2, -s * cr, 0.0, 0.0],
            [s, 0.5 * s2, 0.0, 0.0],
        ]
    )
    g2 = np.array(
        [
            [c * c - 1.0, c * (cr - 1.0), 0.0, 0.0],
            [c * (cr - 1.0), cr * cr - c * c, 0.0, 0.0],
            [0.0, 0.0, sr * sr - s * s, -s * sr / math.sqrt(2.0)],
            [0.0, 0.0, -s * sr / math.sqrt(2.0), s * s],
        ]
    )
    return VacuumSeries(g0, g1, g2, tau)


def vacuum_gram(tau: float, alpha: float) -> np.ndarray:
    vs = vacuum_series(tau)
    return vs.g0 + alpha * vs.g1 + alpha * alpha * vs.g2


@dataclass(frozen=True)
class VacuumState:
    """Closed-form evolved state; within_validity is False past alpha = 0.2."""

    state: BlochState
    within_validity: bool


def vacuum_state(tau: float, alpha: float, initial) -> VacuumState:
    """Evolved Bloch vector with exact first and second alpha derivatives.

    Truncation error of the underlying expansion is O(alpha^3); callers are
    expected to stay at small alpha (flagged beyond 0.2).
    """
    init = initial_bloch(initial)
    x0, z0 = init.x, init.z
    c, s = math.cos(tau), math.sin(tau)
    s2 = math.sin(2.0 * tau)
    c2 = math.cos(2.0 * tau)
    cr, sr = math.cos(math.sqrt(2.0) * tau), math.sin(math.sqrt(2.0) * tau)
    c2r = math.cos(2.0 * math.sqrt(2.0) * tau)
    a = alpha

    x = x0 * c * (a * a * cr - a * a + 1.0) + 0.5 * a * s * (
        -math.sqrt(2.0) * a * x0 * sr + 2.0 * (z0 - 1.0) * cr + 2.0 * z0 + 2.0
    )
    z = 0.5 * (
        -2.0 * a * x0 * s2
        + a * a * (z0 - 1.0) * c2r
        + c2 * (2.0 * a * a + z0 - 1.0)
        - (a * a - 1.0) * (z0 + 1.0)
    )
    dx = 2.0 * a * x0 * c * (cr - 1.0) + 0.5 * s * (
        2.0 * (z0 - 1.0) * cr + 2.0 * z0 + 2.0 - 2.0 * math.sqrt(2.0) * a * x0 * sr
    )
    dz = 0.5 * (
        -2.0 * x0 * s2 + 2.0 * a * (z0 - 1.0) * c2r + 4.0 * a * c2 - 2.0 * a * (z0 + 1.0)
    )
    ddx = 2.0 * x0 * c * (cr - 1.0) - math.sqrt(2.0) * x0 * s * sr
    ddz = (z0 - 1.0) * c2r + 2.0 * c2 - (z0 + 1.0)

    n = math.hypot(x, z)
    if n > 1.0:
        # the truncated map can overshoot the ball by O(alpha^4); project it
        # back differentiably so the attached derivatives stay consistent
        dn = (x * dx + z * dz) / n
        ddn = (dx * dx + dz * dz + x * ddx + z * ddz - dn * dn) / n
        ddx = ddx / n - 2.0 * dx * dn / n**2 - x * ddn / n**2 + 2.0 * x * dn * dn / n**3
        ddz = ddz / n - 2.0 * dz * dn / n**2 - z * ddn / n**2 + 2.0 * z * dn * dn / n**3
        dx, dz = dx / n - x * dn / n**2, dz / n - z * dn / n**2
        x, z = x / n, z / n
    state = BlochState(x, 0.0, z, dx=dx, dy=0.0, dz=dz, ddx=ddx, ddy=0.0, ddz=ddz)
    return VacuumState(state, within_validity=alpha <= VACUUM_VALIDITY_ALPHA)


def vacuum_qfi(tau: float, alpha: float, initial: str) -> float:
    """Small-alpha QFI: 4 sin^2(tau) for the ground state, the closed rational
    form for the excited one.

    The rational expression is 0/0 wherever the evolved state is pure to
    O(alpha^2) (e.g. tau = pi/2); those points fall back to the general
    Bloch-vector evaluation of the expanded state, which handles the pure
    limit through second derivatives.
    """
    if initial == "ground":
        return 4.0 * math.sin(tau) ** 2
    if initial != "excited":
        raise ValueError("initial must be 'ground' or 'excited'")
    a = alpha
    c2 = math.cos(2.0 * tau)
    c2r = math.cos(2.0 * math.sqrt(2.0) * tau)
    s = math.sin(tau)
    cr = math.cos(math.sqrt(2.0) * tau)
    den = 1.0 - ((a * a - 1.0) * c2 - a * a * c2r) ** 2 - 4.0 * a * a * s * s * cr * cr
    if abs(den) < 1e-9:
        return qfi_bloch(vacuum_state(tau, alpha, "excited").state)
    num = (
        (2.0 * a * c2 - 2.0 * a * c2r) ** 2
        + 4.0 * s * s * cr * cr
        - 4.0 * s * s * cr * cr * ((a * a + 1.0) * c2 - a * a * c2r) ** 2
    )
    return num / den


def covariant_channel(alpha: float, tau: float) -> AffineChannel:
    """Gaussian-averaged controlled rotation: rotate (x, z) by 2*alpha*tau,
    damp by e^{-tau^2/2}, leave y untouched; derivatives are analytic."""
    q = math.exp(-0.5 * tau * tau)
    c, s = math.cos(2.0 * alpha * tau), math.sin(2.0 * alpha * tau)
    a = np.array([[q * c, 0.0, q * s], [0.0, 1.0, 0.0], [-q * s, 0.0, q * c]])
    da = 2.0 * tau * q * np.array(
        [[-s, 0.0, c], [0.0, 0.0, 0.0], [-c, 0.0, -s]]
    )
    return AffineChannel(a, np.zeros(3), da, np.zeros(3))


def covariant_channel_quadrature(alpha: float, tau: float, order: int = 64) -> AffineChannel:
    """Oracle for covariant_channel: Gauss-Hermite average of the rotation.

    The integrand is a Gaussian times bounded trigonometrics, so order 64 is
    spectrally converged for every (alpha, tau) used here.
    """
    nodes, weights = np.polynomial.hermite.hermgauss(order)
    a = np.zeros((3, 3))
    for y, w in zip(nodes, weights):
        phi = tau * (y + math.sqrt(2.0) * alpha) / math.sqrt(2.0)
        c, s = math.cos(2.0 * phi), math.sin(2.0 * phi)
        a += (w / math.sqrt(math.pi)) * np.array(
            [[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]]
        )
    return AffineChannel(a, np.zeros(3))


def covariant_qfi(tau: float) -> float:
    """QFI of the quadrature encoding for either pole state: 4 tau^2 e^{-tau^2}."""
    return 4.0 * tau * tau * math.exp(-tau * tau)
