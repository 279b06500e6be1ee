"""Algebraic foundations: scalar field, BN254 groups, pairing, polynomials."""

from .fields import FieldElement, P, R, BN_X
from .curve import (
    GroupError,
    G1_GEN,
    G2_GEN,
    g1_add,
    g1_neg,
    g1_mul,
    g1_msm,
    g1_is_on_curve,
    g1_to_bytes,
    g1_from_bytes,
    g2_add,
    g2_neg,
    g2_msm,
    g2_mul,
    g2_is_on_curve,
    g2_in_subgroup,
    g2_to_bytes,
    g2_from_bytes,
)
from .pairing import (
    PairingError,
    TargetElement,
    pairing,
    pairing_product,
    precompute_g2,
    miller_product,
    final_exponentiation,
    final_exponentiation_naive,
)
from .poly import Polynomial, InterpolationError

__all__ = [
    "FieldElement",
    "P",
    "R",
    "BN_X",
    "GroupError",
    "G1_GEN",
    "G2_GEN",
    "g1_add",
    "g1_neg",
    "g1_mul",
    "g1_msm",
    "g1_is_on_curve",
    "g1_to_bytes",
    "g1_from_bytes",
    "g2_add",
    "g2_neg",
    "g2_msm",
    "g2_mul",
    "g2_is_on_curve",
    "g2_in_subgroup",
    "g2_to_bytes",
    "g2_from_bytes",
    "PairingError",
    "TargetElement",
    "pairing",
    "pairing_product",
    "precompute_g2",
    "miller_product",
    "final_exponentiation",
    "final_exponentiation_naive",
    "Polynomial",
    "InterpolationError",
]
