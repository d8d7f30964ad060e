"""Wasserstein conditional independence testing with finite-sample error bounds."""

from .binning import BinGrid, LipschitzConstants, assign, build_grid, estimate_bin_count, required_diameter
from .bounds import Bound, BoundParams, EpsBarSolve
from .ci_test import CIConfig, CIReport, InfeasibleError, aggregate_type1, aggregate_type2, run_ci_test
from .lipschitz import LipschitzEstimate, plugin_lipschitz
from .measures import (
    DataError,
    Dataset,
    DiscreteMeasure,
    SplitPair,
    empirical_measure,
    product_measure,
    qth_moment,
    read_csv,
    split_for_independence,
    write_csv,
)
from .ot import OTResult, SolverConfig, TransportPlan, wasserstein, wasserstein_1d, wasserstein_entropic, wasserstein_exact
from .two_sample import TwoSampleResult, run_two_sample

__all__ = [
    "BinGrid", "Bound", "BoundParams", "CIConfig", "CIReport", "DataError", "Dataset",
    "DiscreteMeasure", "EpsBarSolve", "InfeasibleError", "LipschitzConstants", "LipschitzEstimate",
    "OTResult", "SolverConfig", "SplitPair", "TransportPlan", "TwoSampleResult",
    "aggregate_type1", "aggregate_type2", "assign", "build_grid", "empirical_measure",
    "estimate_bin_count", "plugin_lipschitz", "product_measure", "qth_moment", "read_csv",
    "required_diameter", "run_ci_test", "run_two_sample", "split_for_independence",
    "wasserstein", "wasserstein_1d", "wasserstein_entropic", "wasserstein_exact", "write_csv",
]
