"""Shapley data valuation with model-induced locality.

Training points are valued by their Shapley contribution to per-test-point
utility. Models whose predictions depend only on a small support set around
each test point induce a localized game; the reuse schedule in here fits
every distinct coalition exactly once across all test points, and a
sampling variant does the same for Monte Carlo estimates.
"""

from ._kernels import BACKEND
from .analysis import (METHODS, CostLadder, Instance, ScalingStudy,
                       SelectionCurve, UndefinedCorrelationError, cost_ladder,
                       pearson, rank_by_value, run_method, scaling_study,
                       selection_curve, spearman)
from .core import (EMPTY_COALITION, Coalition, Dataset, ReverseIndex,
                   SizeLimitError, SupportMap, TestPoint, TrainingPoint,
                   UtilityCache, ValidationError, ValuationResult,
                   build_reverse_index, eligible_tests, pivot)
from .data import ParseError, generate_synthetic, ingest_csv, write_csv
from .exact import (SubsetFamily, enumerate_distinct_subsets,
                    global_shapley_brute, local_baseline, lsmr, shapley_weight,
                    subset_centric, subset_count_bound)
from .models import (FAMILY_KINDS, KernelFamily, TreeFamily, WKNNFamily,
                     build_support_map, make_family)
from .oracles import ModelOracle, ProjectedOracle, TableOracle
from .sampling import (SamplerConfig, SamplingTrace, VarianceSummary, comple_s,
                       convergence_criterion, convergence_monitor,
                       draw_prefix_subset, global_mc, local_mc, lsmr_a,
                       test_stream, tmc, variance_study)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "Coalition",
    "EMPTY_COALITION",
    "CostLadder",
    "Dataset",
    "FAMILY_KINDS",
    "Instance",
    "KernelFamily",
    "METHODS",
    "ModelOracle",
    "ParseError",
    "ProjectedOracle",
    "ReverseIndex",
    "SamplerConfig",
    "SamplingTrace",
    "ScalingStudy",
    "SelectionCurve",
    "SizeLimitError",
    "SubsetFamily",
    "SupportMap",
    "TableOracle",
    "TestPoint",
    "TrainingPoint",
    "TreeFamily",
    "UndefinedCorrelationError",
    "UtilityCache",
    "ValidationError",
    "ValuationResult",
    "VarianceSummary",
    "WKNNFamily",
    "build_reverse_index",
    "build_support_map",
    "comple_s",
    "convergence_criterion",
    "convergence_monitor",
    "cost_ladder",
    "draw_prefix_subset",
    "eligible_tests",
    "enumerate_distinct_subsets",
    "generate_synthetic",
    "global_mc",
    "global_shapley_brute",
    "ingest_csv",
    "local_baseline",
    "local_mc",
    "lsmr",
    "lsmr_a",
    "make_family",
    "pearson",
    "pivot",
    "rank_by_value",
    "run_method",
    "scaling_study",
    "selection_curve",
    "shapley_weight",
    "spearman",
    "subset_centric",
    "subset_count_bound",
    "test_stream",
    "tmc",
    "variance_study",
    "write_csv",
]
