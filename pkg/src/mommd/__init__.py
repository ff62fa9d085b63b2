"""Outlier-robust kernel MMD and mean-embedding estimation.

Median-of-means block statistics make the estimators resistant to adversarial
contamination while keeping the optimal root-n error rate; block-coordinate
ascent over the RKHS unit ball makes them computable.
"""

from .datagen import (
    ContaminationSpec,
    SpliceRecord,
    contaminate,
    load_splice,
    sample_gaussian,
    sample_pareto,
)
from .errors import (
    DataFormatError,
    DomainMismatchError,
    EstimationError,
    HyperparameterError,
    MommdError,
    NotPositiveSemidefiniteError,
    PartitionError,
    ShapeError,
)
from .kernels import (
    AggregatedGram,
    Kernel,
    aggregated_gram,
    gram,
    kernel_eval,
    kernel_spec,
    linear,
    parse_kernel_spec,
    polynomial,
    rbf,
    ssk_backend,
    ssk_eval,
    string_subsequence,
)
from .linalg import CholeskyFactor, cholesky_psd, weighted_norm
from .mmd import (
    BoundDiagnostics,
    CoefExpansion,
    Estimator,
    MmdEstimate,
    analytic_mmd_gaussian,
    block_objectives,
    combine_diagnostics,
    cov_diagnostics,
    empirical_embedding,
    mmd_ustat,
    mmd_vstat,
    monk_bcd,
    monk_bcd_fast,
    monk_bcd_fast_from_gram,
    monk_mean_embedding,
    rkhs_distance,
    theorem_bound,
)
from .mon import BlockPartition, make_partition, median_block, mon_estimate
from .twosample import TestResult, bootstrap_quantile, empirical_quantile, tune_kernel, two_sample_test

__version__ = "0.1.0"
