"""Numerical toolkit for Bloch maps on the unit disc and their Hilbert-space factorisations."""

__version__ = "0.1.0"

from .blochcore import (BlochFunc, GridSpec, Kernel, Monomial, SeminormBracket, bloch_seminorm,
                        self_map_blaschke)
from .domination import canonicalize, contraction_witness, decide, pointwise_mass_dominates
from .duality import VecMolecule, vec_pairing, w2_lb, w2_ub
from .errors import BlochError
from .factor import (build_factorization, kwapien_lb, pietsch_ub, psum2_ub, rank_one,
                     unitary_criterion_check)
from .molecules import Molecule, WeightedSeq, molecule_norm_lb, molecule_norm_opt

__all__ = [
    "BlochError", "BlochFunc", "GridSpec", "Kernel", "Molecule", "Monomial", "SeminormBracket",
    "VecMolecule", "WeightedSeq", "bloch_seminorm", "build_factorization", "canonicalize",
    "contraction_witness", "decide", "kwapien_lb", "molecule_norm_lb", "molecule_norm_opt",
    "pietsch_ub", "pointwise_mass_dominates", "psum2_ub", "rank_one", "self_map_blaschke",
    "unitary_criterion_check", "vec_pairing", "w2_lb", "w2_ub",
]
