"""Exact operator orderings, contractions and the Wick relation for canonical generators."""

from .algebra import LADDER, QP, LinearCombination, OperatorPolynomial, commutator_scalar, normal_form
from .errors import WickError
from .gwt import (
    ContractionReport,
    Ordering,
    contraction_matrix,
    general_contraction,
    gwt_verify,
    swap_replay,
)
from .orderings import (
    Decomposition,
    MixedScheme,
    OrderedCollection,
    apply_monomial,
    apply_scheme,
    builtin_ordering,
    decompose,
    ordered_exp_taylor,
)
from .scalar import Gaussian, Scalar
from .sordering import ChiPath, path_contraction, s_of_chi, s_ordered_value, scheme_weights, verify_scheme

__all__ = [
    "LADDER", "QP", "LinearCombination", "OperatorPolynomial", "commutator_scalar", "normal_form",
    "WickError", "ContractionReport", "Ordering", "contraction_matrix", "general_contraction",
    "gwt_verify", "swap_replay", "Decomposition", "MixedScheme", "OrderedCollection",
    "apply_monomial", "apply_scheme", "builtin_ordering", "decompose", "ordered_exp_taylor",
    "Gaussian", "Scalar", "ChiPath", "path_contraction", "s_of_chi", "s_ordered_value",
    "scheme_weights", "verify_scheme",
]

__version__ = "0.1.0"
