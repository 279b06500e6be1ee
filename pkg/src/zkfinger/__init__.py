"""Keyed cancelable fingerprint templates with zero-knowledge threshold authentication."""

from .circuit import build_threshold_circuit
from .matching import FixedPointLSM, decide, gms, similarity, to_fixed_point
from .minutiae import Minutia, MinutiaKind, load_minutiae, save_minutiae
from .template import CancelableTemplate, TemplateParams, make_template

__version__ = "0.1.0"

__all__ = [
    "CancelableTemplate",
    "FixedPointLSM",
    "Minutia",
    "MinutiaKind",
    "TemplateParams",
    "build_threshold_circuit",
    "decide",
    "gms",
    "load_minutiae",
    "make_template",
    "save_minutiae",
    "similarity",
    "to_fixed_point",
    "__version__",
]
