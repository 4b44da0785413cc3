"""Approximation of real-primitive Dirichlet L-functions by finite Dirichlet
series interpolated at generalized Gram points or initial zeros, with
critical-line zero discovery, in arbitrary precision."""

from .characters import (
    RealPrimitiveCharacter,
    character_from_discriminant,
    chi,
    epsilon_factor,
    gauss_sum,
    is_fundamental_discriminant,
    kronecker_symbol,
)
from .gramzero import (
    BracketError,
    GramTable,
    ZeroCountError,
    ZeroTable,
    find_zeros,
    gram_point,
    gram_table,
    refine_root,
)
from .interp import (
    Approximant,
    DiscoveredZero,
    IndexScheme,
    InterpolationSystem,
    assemble_approximant,
    build_system_full,
    build_system_gram,
    coprime_indices,
    discover_zeros,
    evaluate,
    evaluate_derivative,
    node_residuals,
)
from .lref import (
    LValue,
    L_value,
    functional_equation_residual,
    hardy_z,
    hurwitz_zeta,
    theta,
)
from .mpnum import (
    PrecisionContext,
    PrecisionFault,
    complex_log,
    exp_i,
    log_gamma,
    pi,
    pow_int_neg_s,
)
from .solve import (
    SingularMatrixError,
    SolveOptions,
    SolveReport,
    gmres_solve,
    lu_solve,
    residual_norm,
)

__version__ = "0.1.0"
