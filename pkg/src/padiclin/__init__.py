"""Exact p-adic linear algebra with optimal precision tracking."""

from .errors import (
    DegreeExceedsBound,
    DiscriminantZero,
    DivisionByIndistinguishableZero,
    InsufficientPrecision,
    NegativeValuation,
    NonMonicModulus,
    NonUnitConstantTerm,
    NotCyclic,
    NotSimpleEigenvalue,
    NotSimpleRoot,
    PadicError,
    PrecisionLossInGcd,
    RandomizationExhausted,
    SingularToPrecision,
)
from .padic import INF, InversionAudit, PadicCtx, PadicElem, random_padic, reduce_mod_p
from .polyring import (
    PPoly,
    TruncSeries,
    derivative,
    eval_at,
    parse_poly,
    poly_mul,
    poly_rem,
    reciprocal,
    series_inv,
    xgcd_mod,
)
from .matops import (
    HessenbergForm,
    PMatrix,
    PrecisionSpec,
    SNFDecomp,
    adjugate_factored,
    adjugate_hessenberg,
    berkowitz_charpoly,
    companion_matrix,
    gauss_inverse,
    hessenberg,
    inverse_via_snf,
    mat_mul,
    mat_vec,
    oracle_adjugate,
    oracle_charpoly,
    snf,
    x_minus_m,
)
from .compact import CompactAdjugate, compact_form, conjugate_compact, expand_compact, krylov_matrix
from .precision import (
    EigenPrecision,
    PrecisionReport,
    ValidityReport,
    charpoly_optimal,
    cyclic_mod_p,
    eigenvalue_precision,
    eigenvalues_precision_batch,
    hensel_lift_eigenvalue,
    optimal_jagged_charpoly,
    simple_residue_roots,
    validity_check,
)
from .bench import ExperimentConfig, ExperimentRow, gen_random_matrix, run_experiment, run_trial
from .cli import cli_main

__version__ = "0.1.0"
