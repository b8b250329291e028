"""Exact bordered and involutive knot Floer homology calculator."""

from .algebra import AlgebraElement, compose_word, element, multiply
from .cfk import CFKComplex, LaurentPoly, euler_characteristic, genus, phi, psi, sarkar
from .simplify import cancel_edge, isomorphic, reduce_type_d
from .structures import TypeA, TypeD, TypeDD, required_expansion_bound
from .tensor import box_tensor_A_D, box_tensor_A_DD, concatenate_edges

__all__ = [
    "AlgebraElement",
    "CFKComplex",
    "LaurentPoly",
    "TypeA",
    "TypeD",
    "TypeDD",
    "box_tensor_A_D",
    "box_tensor_A_DD",
    "cancel_edge",
    "compose_word",
    "concatenate_edges",
    "element",
    "euler_characteristic",
    "genus",
    "isomorphic",
    "multiply",
    "phi",
    "psi",
    "reduce_type_d",
    "required_expansion_bound",
    "sarkar",
]
