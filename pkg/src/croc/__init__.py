"""Distribution-free confidence sets for the earliest-changing stream of a panel."""

from .conformal import (
    PValueTable,
    RootPValues,
    aggregate_root,
    conch_pvalue,
    pvalue,
    pvalue_exact,
    pvalue_mc,
    pvalue_randomized,
    pvalue_table,
)
from .core import (
    ConfidenceSet,
    ConstraintSet,
    RootIndexSets,
    StreamPanel,
    build_constraint_common,
    build_constraint_explicit,
    build_constraint_full_grid,
    build_constraint_one_early,
    root_index_sets,
)
from .densities import (
    GaussianModel,
    KdeModel,
    LogitModel,
    MleEstimate,
    fit_gaussian_model,
    fit_kde_model,
    mle_changepoints,
)
from .engine import AnalysisResult, GroupPartition, run, run_conch_agg, run_croc, run_croc_dep
from .errors import CrocError, EnumerationTooLarge, ValidationError
from .permute import RngSeed, SplitPermutation, apply, enumerate_group, group_size, sample_uniform
from .scores import (
    CppScore,
    constant_score,
    frozen_score,
    gaussian_score,
    kde_score,
    learned_score,
    logit_score,
    oracle_opt_score,
    oracle_score,
    table_score,
    wrapper_score,
)

__version__ = "0.1.0"
