"""Exception types raised by the jcqfi library."""


class JcqfiError(Exception):
    """Base class for all jcqfi errors."""


class NearPureUnbounded(JcqfiError):
    """QFI diverges: state is pure but the Bloch derivative has a radial part.

    This is the nonphysical limit where the naive two-level QFI formula is
    genuinely unbounded; raised instead of returning infinity so that sweeps
    cannot be silently poisoned.
    """


class MissingSecondDerivative(JcqfiError):
    """Pure-state QFI limit requested without second derivatives attached."""


class RankDeficient(JcqfiError):
    """SLD requested for a (numerically) rank-deficient density matrix."""


class DegenerateDistribution(JcqfiError):
    """Population Fisher information at a deterministic outcome with dz != 0."""


class Underflow(JcqfiError):
    """Coherent amplitudes cannot be represented even through the log-space path."""


class AlphaZero(JcqfiError):
    """Gram-matrix alpha derivative requested at alpha = 0.

    The derivative expressions divide by alpha; use the vacuum expansion
    (jcqfi.limits) at the origin instead.
    """


class CutoffTooSmall(JcqfiError):
    """Dense-exponential and block propagators keep disagreeing after a cutoff doubling."""


class NoConvergence(JcqfiError):
    """Richardson refinement of a finite-difference QFI failed to settle."""


class AlphaTooSmall(JcqfiError):
    """Asymptotic (large-amplitude) channel requested below its validity guard."""


class OutOfDomain(JcqfiError):
    """Argument outside the function's real domain (e.g. Lambert W below -1/e)."""


class DefectiveDrift(JcqfiError):
    """Drift matrix is defective; kept for API completeness.

    The solver uses the exact matrix exponential of the augmented affine
    system, which is insensitive to defective eigenstructure, so this is
    never raised by the bundled implementation.
    """


class NoInteriorMax(JcqfiError):
    """Scalar maximization hit the bracket edge while still increasing."""


class InvalidRange(JcqfiError):
    """Malformed or empty sweep range specification."""
