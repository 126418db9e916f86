"""Numerical laboratory for isometries between invertible groups of Banach algebras."""

from .algebra import Algebra, Element, NormRule, norm, validate_algebra
from .catalog import (catalog_algebras, make_dame_pair, make_function_algebra, make_hoo_scenario,
                      make_map, make_matrix_algebra, random_invertible, random_unitary)
from .engine import PartialIsometry, check_partial_isometry, extend_isometry
from .errors import IsolabError, VerdictError
from .radical import dickson_radical, numerical_radius, radical_test_spectral, sup_im_numrange
from .spectral import (FULL_GROUP, PRINCIPAL, SubgroupDescriptor, gelfand_radius, in_omega, invert,
                       spectral_radius, spectrum)

__all__ = [
    "Algebra", "Element", "NormRule", "norm", "validate_algebra",
    "catalog_algebras", "make_dame_pair", "make_function_algebra", "make_hoo_scenario",
    "make_map", "make_matrix_algebra", "random_invertible", "random_unitary",
    "PartialIsometry", "check_partial_isometry", "extend_isometry",
    "IsolabError", "VerdictError",
    "dickson_radical", "numerical_radius", "radical_test_spectral", "sup_im_numrange",
    "FULL_GROUP", "PRINCIPAL", "SubgroupDescriptor", "gelfand_radius", "in_omega", "invert",
    "spectral_radius", "spectrum",
]
