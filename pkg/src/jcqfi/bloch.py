"""Two-level probe states and their (quantum) Fisher information.

A qubit state is parameterized by its Bloch vector r = (x, y, z) through
rho = (1 + r.sigma)/2.  The basis ordering is (|g>, |e>), so the *ground*
state sits at z = +1; this convention is fixed once and for all by the
vacuum decay channel (sigma_- maps |e> to |g>) and is asserted in the tests.

For a differentiable family r_theta the QFI is

    QFI = (|r'|^2 - |r' x r|^2) / (1 - |r|^2),

finite for mixed states.  At a pure point the formula is replaced by the
second-derivative limit |r''_parallel| provided the radial first derivative
vanishes; otherwise the QFI genuinely diverges and we raise instead of
returning infinity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
import scipy.linalg

from .errors import (
    DegenerateDistribution,
    MissingSecondDerivative,
    NearPureUnbounded,
    RankDeficient,
)

# 1 - |r|^2 below PURE_THRESHOLD is treated as pure; radial first derivatives
# up to sqrt(PURE_THRESHOLD) are considered vanishing.
PURE_THRESHOLD = 1e-9

_PHYS_TOL = 1e-12

SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)


@dataclass(frozen=True)
class BlochState:
    """Bloch vector with optional first/second parameter derivatives."""

    x: float
    y: float
    z: float
    dx: float | None = None
    dy: float | None = None
    dz: float | None = None
    ddx: float | None = None
    ddy: float | None = None
    ddz: float | None = None

    def __post_init__(self):
        n2 = self.x * self.x + self.y * self.y + self.z * self.z
        if not n2 <= 1.0 + _PHYS_TOL:
            raise ValueError(f"unphysical Bloch vector, |r|^2 = {n2!r}")
        for name in ("dx", "dy", "dz", "ddx", "ddy", "ddz"):
            v = getattr(self, name)
            if v is not None and not math.isfinite(v):
                raise ValueError(f"non-finite derivative {name} = {v!r}")

    @property
    def r(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])

    @property
    def has_first(self) -> bool:
        return self.dx is not None and self.dy is not None and self.dz is not None

    @property
    def has_second(self) -> bool:
        return self.ddx is not None and self.ddy is not None and self.ddz is not None

    @property
    def dr(self) -> np.ndarray:
        if not self.has_first:
            raise ValueError("first derivatives not attached")
        return np.array([self.dx, self.dy, self.dz])

    @property
    def ddr(self) -> np.ndarray:
        if not self.has_second:
            raise MissingSecondDerivative("second derivatives not attached")
        return np.array([self.ddx, self.ddy, self.ddz])

    def with_derivatives(self, dr=None, ddr=None) -> "BlochState":
        kw = {}
        if dr is not None:
            kw.update(dx=float(dr[0]), dy=float(dr[1]), dz=float(dr[2]))
        if ddr is not None:
            kw.update(ddx=float(ddr[0]), ddy=float(ddr[1]), ddz=float(ddr[2]))
        return replace(self, **kw)


GROUND = BlochState(0.0, 0.0, 1.0)
EXCITED = BlochState(0.0, 0.0, -1.0)


def initial_bloch(spec) -> BlochState:
    """Resolve 'ground' / 'excited' / (x0, z0) into a real BlochState."""
    if isinstance(spec, BlochState):
        return spec
    if spec == "ground":
        return GROUND
    if spec == "excited":
        return EXCITED
    x0, z0 = spec
    return BlochState(float(x0), 0.0, float(z0))


@dataclass(frozen=True)
class DensityMatrix2:
    """2x2 density matrix (Hermitian, unit trace, positive)."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (2, 2):
            raise ValueError("expected a 2x2 matrix")
        object.__setattr__(self, "matrix", m)
        if np.abs(m - m.conj().T).max() > 1e-12:
            raise ValueError("matrix is not Hermitian")
        if abs(m[0, 0].real + m[1, 1].real - 1.0) > 1e-12:
            raise ValueError("trace differs from one")
        if eigvals2(m).min() < -1e-12:
            raise ValueError("matrix has a negative eigenvalue")

    @classmethod
    def from_bloch(cls, state: BlochState) -> "DensityMatrix2":
        m = 0.5 * (np.eye(2) + state.x * SIGMA_X + state.y * SIGMA_Y + state.z * SIGMA_Z)
        return cls(m)

    def to_bloch(self) -> BlochState:
        m = self.matrix
        return BlochState(
            x=float((m[0, 1] + m[1, 0]).real),
            y=float((1j * (m[0, 1] - m[1, 0])).real),
            z=float((m[0, 0] - m[1, 1]).real),
        )

    @property
    def purity(self) -> float:
        return float(np.trace(self.matrix @ self.matrix).real)


def eigvals2(m: np.ndarray) -> np.ndarray:
    """Eigenvalues of a Hermitian 2x2 matrix, closed form."""
    tr = (m[0, 0] + m[1, 1]).real
    det = (m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]).real
    disc = max(tr * tr / 4.0 - det, 0.0)
    s = math.sqrt(disc)
    return np.array([tr / 2.0 - s, tr / 2.0 + s])


def bloch_derivative_matrix(dr) -> np.ndarray:
    """drho/dtheta for a Bloch-derivative vector (traceless Hermitian)."""
    return 0.5 * (dr[0] * SIGMA_X + dr[1] * SIGMA_Y + dr[2] * SIGMA_Z)


def qfi_bloch(state: BlochState) -> float:
    """QFI of a qubit family from the Bloch vector and its first derivative.

    Mixed states use (|r'|^2 - |r' x r|^2)/(1 - |r|^2).  Within the pure
    threshold the second-derivative limit takes over (second derivatives must
    be attached); a non-vanishing radial first derivative there raises
    NearPureUnbounded.
    """
    r = state.r
    dr = state.dr
    gap = 1.0 - float(r @ r)
    if gap > PURE_THRESHOLD:
        cross = np.cross(dr, r)
        val = (float(dr @ dr) - float(cross @ cross)) / gap
        return max(val, 0.0)
    radial = abs(float(dr @ r))  # |r| ~ 1 so no normalization needed
    if radial > math.sqrt(PURE_THRESHOLD):
        raise NearPureUnbounded(
            f"pure state with radial derivative {radial:.3e}: QFI diverges"
        )
    return qfi_pure_limit(state)


def qfi_pure_limit(state: BlochState) -> float:
    """Pure-state QFI limit |r''_parallel| (needs second derivatives)."""
    if not state.has_second:
        raise MissingSecondDerivative(
            "state is (numerically) pure; attach second derivatives"
        )
    r = state.r
    n = float(r @ r)
    if n == 0.0:
        return 0.0
    return abs(float(state.ddr @ r)) / math.sqrt(n)


def sld(rho: DensityMatrix2, drho: DensityMatrix2 | np.ndarray) -> np.ndarray:
    """Symmetric logarithmic derivative L solving (L rho + rho L)/2 = drho.

    Returns the Hermitian 2x2 matrix L; QFI = tr(L^2 rho).  Requires rho to
    be full rank (min eigenvalue > 1e-12).
    """
    r = rho.matrix
    d = drho.matrix if isinstance(drho, DensityMatrix2) else np.asarray(drho, dtype=complex)
    if eigvals2(r).min() <= 1e-12:
        raise RankDeficient("rho is rank deficient; SLD is not unique")
    ell = scipy.linalg.solve_continuous_lyapunov(r, 2.0 * d)
    return 0.5 * (ell + ell.conj().T)  # symmetrize away roundoff


def qfi_sld(rho: DensityMatrix2, drho) -> float:
    """QFI via tr(L^2 rho) with L from the Lyapunov equation."""
    ell = sld(rho, drho)
    return float(np.trace(ell @ ell @ rho.matrix).real)


def fi_population(z: float, dz: float) -> float:
    """Fisher information of the atomic population measurement, dz^2/(1-z^2)."""
    if abs(z) > 1.0 + _PHYS_TOL:
        raise ValueError(f"|z| = {abs(z)!r} exceeds 1")
    if dz * dz <= 1e-12:
        return 0.0
    gap = 1.0 - z * z
    if gap <= 1e-12:
        raise DegenerateDistribution(
            "deterministic population with nonzero sensitivity: FI diverges"
        )
    return dz * dz / gap


def purity(state: BlochState) -> float:
    """|r|^2 = 2 tr(rho^2) - 1; also 1 - purity measures probe-field entanglement."""
    return float(state.r @ state.r)
