"""Quantum multipartite maskers, one-erasure codes and their numerical checks."""

from .masker import Masker, latin_masker, tilde_masker
from .mols import MolsPair, LatinSquare, mols_pair, verify_mols
from .verifier import equivalence_report, kl_check, universal_masking_check

__version__ = "0.1.0"

__all__ = [
    "Masker",
    "latin_masker",
    "tilde_masker",
    "MolsPair",
    "LatinSquare",
    "mols_pair",
    "verify_mols",
    "equivalence_report",
    "kl_check",
    "universal_masking_check",
]
