"""Quantum Fisher information of a two-level atom probing a coherent field.

Subpackages mirror the physics: exact channel (jc), brute-force oracle
(oracle), small- and large-amplitude limits (limits, asymptotic), repeated
interactions (collision) and the driven-dissipative continuum (lindblad),
with bloch/fock providing the probe-state and field-state substrate.
"""

from . import asymptotic, bloch, collision, fock, jc, limits, lindblad, oracle
from .bloch import BlochState, DensityMatrix2, fi_population, purity, qfi_bloch, sld
from .fock import FockVector, choose_cutoff, coherent_vector, d_alpha_ket, poisson_expect
from .jc import AffineChannel, GramMatrix, gram_matrix, qfi_jc

__version__ = "0.1.0"

__all__ = [
    "AffineChannel",
    "BlochState",
    "DensityMatrix2",
    "FockVector",
    "GramMatrix",
    "asymptotic",
    "bloch",
    "choose_cutoff",
    "coherent_vector",
    "collision",
    "d_alpha_ket",
    "fi_population",
    "fock",
    "gram_matrix",
    "jc",
    "limits",
    "lindblad",
    "oracle",
    "poisson_expect",
    "purity",
    "qfi_bloch",
    "qfi_jc",
    "sld",
]
