"""Weighted-ensemble estimation of nonlinear density functionals.

Plug-in estimators built on boundary-truncated uniform-kernel density
estimates are combined with convex-optimized, data-independent weights
that cancel the leading bias terms, restoring the parametric MSE rate.
"""

from ._kernels import BACKEND, set_threads
from .baselines import HistogramConfig, default_bins, histogram_plugin, knn_functional
from .density import (DensityEstimate, KernelWindow, count_in_window, density_at,
                      sorted_distances, truncated_volume, truncated_volumes,
                      window_counts)
from .functionals import FunctionalSpec, g_eval, uniform_value
from .harness import (EstimatorOptions, SweepSpec, TestSpec, auc_vs_delta, deflection,
                      ensemble_weights_for, panel_estimates, roc_auc,
                      run_distribution_test, run_mse_sweep)
from .mixtures import (MissingTruthError, MixtureParams, TruthCache, TruthEstimate,
                       mixture_pdf, sample, true_functional)
from .plugin import (EstimateRecord, SplitConfig, optimal_k, plugin_estimate, split,
                     split_sizes)
from .weights import (EnsembleConfig, WeightSolution, basis_matrix, default_lbar,
                      ensemble_estimate, eta_exact, k_of_l, solve_exact, solve_relaxed)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "DensityEstimate",
    "EnsembleConfig",
    "EstimateRecord",
    "EstimatorOptions",
    "FunctionalSpec",
    "HistogramConfig",
    "KernelWindow",
    "MissingTruthError",
    "MixtureParams",
    "SplitConfig",
    "SweepSpec",
    "TestSpec",
    "TruthCache",
    "TruthEstimate",
    "WeightSolution",
    "auc_vs_delta",
    "basis_matrix",
    "count_in_window",
    "default_bins",
    "default_lbar",
    "deflection",
    "density_at",
    "ensemble_estimate",
    "ensemble_weights_for",
    "eta_exact",
    "g_eval",
    "histogram_plugin",
    "k_of_l",
    "knn_functional",
    "mixture_pdf",
    "optimal_k",
    "panel_estimates",
    "plugin_estimate",
    "roc_auc",
    "run_distribution_test",
    "run_mse_sweep",
    "sample",
    "set_threads",
    "solve_exact",
    "solve_relaxed",
    "sorted_distances",
    "split",
    "split_sizes",
    "true_functional",
    "truncated_volume",
    "truncated_volumes",
    "uniform_value",
    "window_counts",
]
