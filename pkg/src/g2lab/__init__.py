"""Numerical toolkit for nearly parallel G2 structures with three-torus symmetry."""

from ._backend import BACKEND
from .exterior import (
    ContractViolation,
    FormTriple,
    FrameAlgebra,
    KForm,
    SForm,
    exterior_derivative,
    hodge_star,
    interior,
    wedge,
    wedge_square,
)
from .g2 import G2Structure, metric_from_three_form, standard_g2, standard_phi, standard_star_phi

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "ContractViolation",
    "FormTriple",
    "FrameAlgebra",
    "G2Structure",
    "KForm",
    "SForm",
    "exterior_derivative",
    "hodge_star",
    "interior",
    "metric_from_three_form",
    "standard_g2",
    "standard_phi",
    "standard_star_phi",
    "wedge",
    "wedge_square",
]
