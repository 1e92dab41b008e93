"""
Модуль для вычислений с расширениями эллиптических конических операторов.
Предоставляет граничный спектр, сингулярные цепочки, спаривание [·,·]_A и решётку областей.
"""

from .errors import ConeError, SUITE_FAILURE_EXIT
from .series import LaurentGerm
from .pencil_core import (
    MatrixPolynomial, ConeModel, SpectralPoint, eval, boundary_spectrum,
    formal_adjoint, symmetry_check, positivity_check, local_multiplicity
)
from .model_io import load_model, parse_model
from .local_chains import (
    SingularChainBasis, kernel_range_split, schur_family, singular_chains,
    partial_multiplicities, adjoint_chains, reduce_germ, holomorphic_gram_schmidt
)
from .pairing_engine import (
    PAIRING_PHASE, ConjugationMap, PairingGram, iota, residue_pairing_local,
    contour_pairing, pairing_gram, contour_gram, nondegeneracy_check
)
from .extension_calculus import (
    DomainSubspace, ExtendedBasis, strip_spectrum, extended_basis, build_extended_basis,
    dual_extended_basis, min_equals_max, adjoint_domain, is_selfadjoint, sigma_action,
    dilation_action, saturation_check, saturate_decompose, half_domain, friedrichs_domain,
    relative_index, domain_stability, friedrichs_stability, selfadjoint_family, dictionary_matrix,
    point_basis
)
from .mellin_numeric import (
    CutoffProfile, ModelFunction, ModelTerm, phi, phi_taylor, mellin_germ,
    adaptive_quad, weighted_inner, apply_model, green_pairing_direct
)
from .chain_cache import ChainCache, cache_scope
