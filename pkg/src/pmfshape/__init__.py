"""Shape tests for finitely supported count distributions.

Given an i.i.d. sample of non-negative integers, the package tests whether
the underlying probability mass function is monotone non-increasing, convex,
or more generally k-monotone, using Monte-Carlo-calibrated asymptotic
critical values.  It ships the empirical-difference machinery, closed-form
limit covariances, monotone/convex least-squares projections, knot selection,
the limit-law samplers, a simulation harness, and a CLI.
"""

__version__ = "0.1.0"

from .covariance import (
    CovMatrix,
    covariance_convex,
    covariance_general,
    covariance_monotone,
    limit_cov_multinomial,
    null_diag_variance,
)
from .distributions import (
    DistributionSpec,
    ExplicitPmf,
    ShapeFlags,
    TriangularMixture,
    TruncatedBinomial,
    TruncatedPoisson,
    classify,
    parse_spec,
    pmf,
    sample_iid,
    spec_label,
)
from .harness import (
    Scenario,
    StudyConfig,
    StudyRow,
    bootstrap_min_distribution,
    knot_consistency_curve,
    run_study,
    write_manifest,
    write_study_csv,
)
from .knots import SelectionOutcome, select, select_method1, select_method2, select_method3
from .limits import (
    DrawSet,
    empirical_quantile,
    p_value,
    sample_convex_limit,
    sample_gaussian,
    sample_grenander_limit,
    sample_min_statistic,
    save_draws_csv,
    shape_blocks,
)
from .pmf import (
    CountSample,
    DiffSupport,
    EmpiricalPmf,
    IndexSet,
    argmin_set,
    build_empirical_pmf,
    difference_matrix,
    forward_difference,
    forward_difference_vector,
    is_k_monotone,
    min_difference,
)
from .projections import (
    CumSumDiagram,
    NonConvergenceError,
    ProjectionResult,
    check_convex_lse_characterization,
    convex_lse,
    grenander,
    lcm_left_slopes,
    pava_nonincreasing,
    project_convex_block,
    project_monotone_block,
)
from .shape_tests import (
    TestConfig,
    TestResult,
    calibration_draws,
    run_configured_test,
    test_convex_projection,
    test_k_monotone_min,
    test_monotone_projection,
)

__all__ = [
    "__version__",
    "CountSample", "EmpiricalPmf", "DiffSupport", "IndexSet",
    "build_empirical_pmf", "forward_difference", "forward_difference_vector",
    "difference_matrix", "min_difference", "argmin_set", "is_k_monotone",
    "CovMatrix", "covariance_general", "covariance_monotone", "covariance_convex",
    "null_diag_variance", "limit_cov_multinomial",
    "ProjectionResult", "CumSumDiagram", "NonConvergenceError",
    "pava_nonincreasing", "lcm_left_slopes", "grenander", "convex_lse",
    "check_convex_lse_characterization", "project_monotone_block", "project_convex_block",
    "SelectionOutcome", "select", "select_method1", "select_method2", "select_method3",
    "DrawSet", "sample_gaussian", "sample_min_statistic", "sample_grenander_limit",
    "sample_convex_limit", "empirical_quantile", "p_value", "shape_blocks", "save_draws_csv",
    "TestConfig", "TestResult", "test_k_monotone_min", "test_monotone_projection",
    "test_convex_projection", "run_configured_test", "calibration_draws",
    "TruncatedPoisson", "TruncatedBinomial", "TriangularMixture", "ExplicitPmf",
    "DistributionSpec", "ShapeFlags", "pmf", "classify", "sample_iid", "parse_spec", "spec_label",
    "Scenario", "StudyConfig", "StudyRow", "run_study", "write_study_csv",
    "write_manifest", "bootstrap_min_distribution", "knot_consistency_curve",
]
