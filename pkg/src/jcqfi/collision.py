"""Sequential (collision-model) interactions and their continuous limits.

A stream of identically prepared coherent modes hits the atom one per step;
the reduced dynamics is the N-fold composition of the single-mode affine
channel.  Because every step carries the same parameter dependence, the
state derivative propagates exactly by the chain rule
    r  <- A r + b,      r' <- A' r + A r' + b'.

Closed-form results in the collapse regime: QFI = 4 N^2 tau^2 e^{-N tau^2},
best interaction time tau = 1/sqrt(N) with QFI 4N/e, and composing never
helps at revivals.  Two scaling limits are provided as convergence checks:
the infinite-modes limit (tau = dt, fixed alpha) approaching the coherent
Rabi value 4 t^2, and the continuous-field limit (tau = sqrt(kappa dt),
alpha = eps sqrt(dt)) approaching the driven-dissipative master equation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import lindblad
from .bloch import BlochState, DensityMatrix2, initial_bloch
from .fock import choose_cutoff, coherent_vector, d_alpha_ket
from .jc import AffineChannel, gram_to_affine, gram_with_derivative
from .optimize import bracketed_max
from .asymptotic import lambert_w0
from .oracle import qfi_finite_difference


@dataclass
class ComposedEvolution:
    """Running (r, dr) pair under repeated application of one channel."""

    channel: AffineChannel
    r: np.ndarray
    dr: np.ndarray
    steps: int = 0

    def step(self):
        self.r, self.dr = self.channel.apply_with_derivative(self.r, self.dr)
        self.steps += 1
        norm = float(np.linalg.norm(self.r))
        if norm > 1.0 + 1e-10:
            raise ValueError(f"composition left the Bloch ball, |r| = {norm!r}")
        return self


def compose_n(channel: AffineChannel, initial, n: int) -> BlochState:
    """Apply the channel n times, propagating the parameter derivative."""
    init = initial_bloch(initial)
    ev = ComposedEvolution(channel, init.r.astype(float), np.zeros(3))
    for _ in range(n):
        ev.step()
    r = ev.r
    norm = float(np.linalg.norm(r))
    if norm > 1.0:
        r = r / norm
    return BlochState(*map(float, r)).with_derivatives(dr=ev.dr)


def qfi_n_closed(tau: float, n: int) -> float:
    """Collapse-regime QFI after n collisions: 4 n^2 tau^2 e^{-n tau^2}.

    Increasing n beyond one helps only for tau <= sqrt(log 4).
    """
    return 4.0 * n * n * tau * tau * math.exp(-n * tau * tau)


def optimal_sequence(n: int):
    """Best per-collision time and QFI: (1/sqrt(n), 4n/e)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return 1.0 / math.sqrt(n), 4.0 * n / math.e


def revival_composition_qfi(nu: int, n: int):
    """Composed QFI at fast revival nu, maximized over the revival offset.

    Returns (lambert_bound, numeric_max) for
    8 n^2 R^2 / ((pi nu)^n e^{2 n R^2} - 1) <= -4 n W0(-1/(e (pi nu)^n)).
    """
    if nu < 1 or n < 1:
        raise ValueError("nu and n must be >= 1")
    c = (math.pi * nu) ** n
    bound = -4.0 * n * lambert_w0(-1.0 / (math.e * c))

    def value(r2):
        if r2 <= 0.0:
            return 0.0
        return 8.0 * n * n * r2 / (c * math.exp(2.0 * n * r2) - 1.0)

    _, numeric = bracketed_max(value, 0.0, 4.0 / n, coarse=400, tol=1e-10)
    return bound, numeric


@dataclass
class ConvergenceRow:
    dt: float
    n: int
    value: float
    error: float


@dataclass
class ConvergenceReport:
    rows: list[ConvergenceRow] = field(default_factory=list)

    @property
    def ratios(self) -> list[float]:
        errs = [row.error for row in self.rows]
        return [errs[i] / errs[i + 1] for i in range(len(errs) - 1) if errs[i + 1] > 0]

    def first_order(self, lo: float = 1.7, hi: float = 2.3) -> bool:
        """True when every dt-halving shrinks the error by a first-order ratio."""
        rr = self.ratios
        return bool(rr) and all(lo <= r <= hi for r in rr)


def infinite_modes_limit(alpha: float, t_total: float, dt_list) -> ConvergenceReport:
    """Compose exact channels with tau = dt, N = t/dt and track QFI -> 4 t^2.

    The per-step energy is held fixed (alpha constant), so the limit is the
    coherent Rabi dynamics; deviations shrink linearly in dt.
    """
    from .bloch import qfi_bloch

    report = ConvergenceReport()
    target = 4.0 * t_total * t_total
    for dt in dt_list:
        n = int(round(t_total / dt))
        if n == 0:
            report.rows.append(ConvergenceRow(dt, 0, 0.0, target))
            continue
        ch = gram_to_affine(gram_with_derivative(alpha, dt))
        state = compose_n(ch, "ground", n)
        q = qfi_bloch(state)
        report.rows.append(ConvergenceRow(dt, n, q, abs(q - target)))
    return report


def continuous_limit_check(
    kappa: float, epsilon: float, t_total: float, dt_list, initial="ground"
) -> ConvergenceReport:
    """Compose exact channels with tau = sqrt(kappa dt), alpha = eps sqrt(dt)
    and compare against the master-equation solution at (eps/sqrt(kappa),
    s = kappa t).

    The reference uses the master equation exactly as the collision expansion
    produces it (convention="generator"); errors are measured on the Bloch
    vector and shrink linearly in dt.
    """
    eps_bar = epsilon / math.sqrt(kappa)
    ref = lindblad.evolve_master(
        eps_bar, kappa * t_total, initial, convention="generator"
    )
    report = ConvergenceReport()
    for dt in dt_list:
        n = int(round(t_total / dt))
        tau = math.sqrt(kappa * dt)
        alpha = epsilon * math.sqrt(dt)
        if alpha == 0.0:
            ch = _vacuum_affine_with_derivative(tau)
        else:
            ch = gram_to_affine(gram_with_derivative(alpha, tau))
        state = compose_n(ch, initial, n)
        err = float(np.linalg.norm(state.r - ref.r))
        report.rows.append(ConvergenceRow(dt, n, err, err))
    return report


def _vacuum_affine_with_derivative(tau: float) -> AffineChannel:
    # the exact Gram derivative is singular at alpha = 0; the vacuum expansion
    # supplies the well-defined first-order coefficient instead
    from .jc import _affine_parts
    from .limits import vacuum_series

    vs = vacuum_series(tau)
    a, b = _affine_parts(vs.g0)
    da, db = _affine_parts(vs.g1, constant=0.0)
    return AffineChannel(a, b, da, db)


def _embed(atom_index: int, field_vec: np.ndarray, dim_field: int) -> np.ndarray:
    out = np.zeros(2 * dim_field)
    out[atom_index * dim_field : (atom_index + 1) * dim_field] = field_vec
    return out


def optimal_encoding_check(alpha: float, n: int, n_max: int | None = None) -> float:
    """Probe QFI after the fine-tuned step-dependent swap sequence.

    Builds the unitaries V_1..V_N explicitly on atom x truncated mode from
    |alpha> and the orthogonal derivative ket: step m swaps the subspace
    carrying the accumulated sensitivity, sqrt(m-1)|e,alpha> + |g,d alpha>,
    into the probe's excited state.  The finite-difference Bures QFI of the
    final atom then saturates 4N.  At alpha = 0 the derivative ket is |1>
    and step one reduces to the plain two-level swap.
    """
    if n_max is None:
        n_max = choose_cutoff(max(alpha, 1.0))
    dim = n_max + 1
    coh = coherent_vector(alpha, n_max).amplitudes
    dket = d_alpha_ket(alpha, n_max).amplitudes
    e_coh = _embed(1, coh, dim)
    g_dot = _embed(0, dket, dim)

    swaps = []
    for m in range(1, n + 1):
        psi = (math.sqrt(m - 1.0) * e_coh + g_dot) / math.sqrt(float(m))
        psi_perp = (e_coh - math.sqrt(m - 1.0) * g_dot) / math.sqrt(float(m))
        v = (
            np.eye(2 * dim)
            - np.outer(g_dot, g_dot)
            - np.outer(e_coh, e_coh)
            + np.outer(e_coh, psi)
            + np.outer(g_dot, psi_perp)
        )
        swaps.append(v)

    def final_atom(a: float) -> DensityMatrix2:
        mode = coherent_vector(a, n_max).amplitudes
        mode_proj = np.outer(mode, mode)
        rho_atom = np.array([[1.0, 0.0], [0.0, 0.0]])
        for v in swaps:
            joint = np.kron(rho_atom, mode_proj)
            joint = v @ joint @ v.T
            rho_atom = np.array(
                [
                    [
                        np.trace(joint[i * dim : (i + 1) * dim, j * dim : (j + 1) * dim])
                        for j in range(2)
                    ]
                    for i in range(2)
                ]
            )
            rho_atom /= np.trace(rho_atom)
        return DensityMatrix2(rho_atom.astype(complex))

    return qfi_finite_difference(final_atom, alpha, h=1e-2)
