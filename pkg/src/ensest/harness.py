"""Monte-Carlo experiment driver: MSE sweeps and distribution testing.

Every experiment is a pure function of its spec (seeds included): trials
use the deterministic schedule seed = base_seed + trial index, estimator
panels share one sample split and one window-count pass per trial, and
aggregation runs in trial order, so re-runs are bit-identical.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from scipy.stats import rankdata, spearmanr

from .baselines import HistogramConfig, histogram_plugin, knn_functional
from .density import truncated_volumes
from ._kernels import window_counts
from .functionals import FunctionalSpec
from .mixtures import MixtureParams, TruthCache, sample
from .plugin import SplitConfig, optimal_k, plugin_values_from_counts, split
from .weights import (EnsembleConfig, WeightSolution, default_lbar,
                      ensemble_bandwidths, solve_relaxed)

KERNEL_ESTIMATORS = ("standard", "truncated", "weighted")
ESTIMATORS = KERNEL_ESTIMATORS + ("histogram", "knn")


@dataclass(frozen=True)
class EstimatorOptions:
    """Shared hyperparameters for the estimator panel.

    eta = None resolves to 3d/L, the norm cap that makes the weighted
    estimator dominate the plug-ins at desk-scale sample sizes.  (The
    solver-level default of 3d admits weight vectors whose amplified
    residual bias loses to the plain truncated plug-in for T up to 10^4;
    dividing by the grid size keeps the weights near-uniform while still
    cancelling the leading bias terms.)
    """

    alpha_frac: float = 0.5
    ensemble_size: int = 50
    eta: float | None = None          # None -> 3d/L
    lbar: tuple[float, ...] | None = None  # None -> default grid
    knn_k: int = 5
    bins_per_dim: int | None = None   # None -> ceil(T^(1/(d+2)))

    def effective_lbar(self) -> np.ndarray:
        if self.lbar is not None:
            return np.asarray(self.lbar, dtype=np.float64)
        return default_lbar(self.ensemble_size)

    def effective_eta(self, d: int) -> float:
        if self.eta is not None:
            return float(self.eta)
        return 3.0 * d / self.effective_lbar().size


def ensemble_weights_for(d: int, t: int, options: EstimatorOptions) -> WeightSolution:
    """Relaxed-optimal weights for dimension d and sample size T.

    Data independent: depends only on (lbar, d, T, eta).
    """
    cfg = EnsembleConfig(lbar=tuple(options.effective_lbar()), d=d, t=t)
    return solve_relaxed(cfg, options.effective_eta(d))


def _check_panel(estimators) -> tuple[str, ...]:
    panel = tuple(estimators)
    unknown = [e for e in panel if e not in ESTIMATORS]
    if unknown:
        raise ValueError(f"unknown estimators {unknown}; available: {ESTIMATORS}")
    if not panel:
        raise ValueError("estimator panel is empty")
    return panel


def panel_estimates(g: FunctionalSpec, samples: np.ndarray, estimators,
                    options: EstimatorOptions, seed: int,
                    weights: WeightSolution | None = None) -> dict[str, float]:
    """Evaluate every requested estimator on one sample set.

    The kernel estimators (standard, truncated, weighted) share a single
    split and a single window-count pass; each value is bit-identical to
    the corresponding standalone library call.
    """
    panel = _check_panel(estimators)
    samples = np.asarray(samples, dtype=np.float64)
    t, d = samples.shape
    out: dict[str, float] = {}

    kernel_panel = [e for e in panel if e in KERNEL_ESTIMATORS]
    if kernel_panel:
        eval_part, density_part = split(samples, SplitConfig(options.alpha_frac, seed))
        m = density_part.shape[0]
        ks = [optimal_k(m, d)]
        if "weighted" in kernel_panel:
            if weights is None:
                raise ValueError("weighted estimator requested without a weight solution")
            ks.extend(ensemble_bandwidths(options.effective_lbar(), m))
        ks = np.asarray(ks)
        d_ks = (ks / m) ** (1.0 / d)
        counts = window_counts(eval_part, density_part, d_ks / 2.0)
        need_vols = "truncated" in kernel_panel or "weighted" in kernel_panel
        vols = truncated_volumes(eval_part, d_ks) if need_vols else None

        if "standard" in kernel_panel:
            out["standard"] = plugin_values_from_counts(g, counts[:, 0], ks[0], m, None)
        if "truncated" in kernel_panel:
            out["truncated"] = plugin_values_from_counts(g, counts[:, 0], ks[0], m, vols[:, 0])
        if "weighted" in kernel_panel:
            w = weights.as_array()
            value = 0.0
            for j in range(1, ks.size):
                comp = plugin_values_from_counts(g, counts[:, j], ks[j], m, vols[:, j])
                value += w[j - 1] * comp
            out["weighted"] = value

    if "histogram" in panel:
        cfg = HistogramConfig(options.bins_per_dim) if options.bins_per_dim else None
        out["histogram"] = histogram_plugin(g, samples, cfg, seed=seed).value
    if "knn" in panel:
        out["knn"] = knn_functional(g, samples, k=options.knn_k, seed=seed).value
    return out


@dataclass(frozen=True)
class SweepSpec:
    """MSE sweep over sample size T (axis="T") or dimension d (axis="d")."""

    functional: FunctionalSpec
    params: MixtureParams
    estimators: tuple[str, ...]
    axis: str
    values: tuple[int, ...]
    trials: int
    base_seed: int
    t_fixed: int | None = None
    options: EstimatorOptions = field(default_factory=EstimatorOptions)
    adapt_q: bool = True  # Panter-Dite quantizer dimension follows d on the d axis
    truth_n_mc: int = 10_000_000
    truth_seed: int = 101

    def __post_init__(self):
        _check_panel(self.estimators)
        if self.axis not in ("T", "d"):
            raise ValueError('axis must be "T" or "d"')
        if self.axis == "d" and self.t_fixed is None:
            raise ValueError("axis d requires t_fixed")
        if self.trials < 2:
            raise ValueError("need at least 2 trials")
        if not self.values:
            raise ValueError("sweep needs at least one axis value")

    def point(self, x: int) -> tuple[MixtureParams, FunctionalSpec, int]:
        """(params, functional, T) for one axis value."""
        if self.axis == "T":
            return self.params, self.functional, int(x)
        params = replace(self.params, d=int(x))
        functional = self.functional
        if self.adapt_q and functional.kind == "panter_dite":
            functional = replace(functional, q=int(x))
        return params, functional, int(self.t_fixed)


@dataclass(frozen=True)
class SweepRow:
    estimator_id: str
    axis: str
    x: int
    mse: float
    bias_sq: float
    variance: float
    mse_stderr: float
    trials: int
    truth: float
    truth_stderr: float


def run_mse_sweep(spec: SweepSpec, truth_cache: TruthCache) -> list[SweepRow]:
    """One row per (axis value, estimator): MSE with its bias^2 + variance split.

    The decomposition uses the population variance over trials, so
    mse = bias_sq + variance holds exactly.  Raises MissingTruthError if
    the cache lacks a ground-truth entry for some sweep point.
    """
    rows: list[SweepRow] = []
    for x in spec.values:
        params, functional, t = spec.point(x)
        truth = truth_cache.get(params, functional, spec.truth_n_mc, spec.truth_seed)
        weights = None
        if "weighted" in spec.estimators:
            weights = ensemble_weights_for(params.d, t, spec.options)
        estimates = {e: np.empty(spec.trials) for e in spec.estimators}
        for r in range(spec.trials):
            seed = spec.base_seed + r
            pts = sample(params, t, seed)
            vals = panel_estimates(functional, pts, spec.estimators, spec.options,
                                   seed, weights)
            for e in spec.estimators:
                estimates[e][r] = vals[e]
        for e in spec.estimators:
            err = estimates[e] - truth.value
            mse = float(np.mean(err ** 2))
            mean_est = float(np.mean(estimates[e]))
            bias_sq = (mean_est - truth.value) ** 2
            variance = float(np.mean((estimates[e] - mean_est) ** 2))
            mse_stderr = float(np.std(err ** 2, ddof=1) / np.sqrt(spec.trials))
            rows.append(SweepRow(e, spec.axis, int(x), mse, bias_sq, variance,
                                 mse_stderr, spec.trials, truth.value, truth.stderr))
    return rows


@dataclass(frozen=True)
class TestSpec:
    """Two-hypothesis distribution test driven by functional estimates."""

    __test__ = False  # not a pytest class, despite the name

    null_a: float
    null_b: float
    alt_a: float
    alt_b: float
    p: float
    d: int
    experiments: int
    samples_per_experiment: int
    estimators: tuple[str, ...] = KERNEL_ESTIMATORS
    functional: FunctionalSpec = field(default_factory=FunctionalSpec.shannon)
    base_seed: int = 0
    options: EstimatorOptions = field(default_factory=EstimatorOptions)
    direction: str = "higher-is-alt"

    def __post_init__(self):
        _check_panel(self.estimators)
        if self.experiments < 2:
            raise ValueError("need at least 2 experiments per hypothesis")
        if self.samples_per_experiment < 2:
            raise ValueError("need at least 2 samples per experiment")
        if self.direction not in ("higher-is-alt", "lower-is-alt"):
            raise ValueError('direction must be "higher-is-alt" or "lower-is-alt"')

    @property
    def null_params(self) -> MixtureParams:
        return MixtureParams(self.null_a, self.null_b, self.p, self.d)

    @property
    def alt_params(self) -> MixtureParams:
        return MixtureParams(self.alt_a, self.alt_b, self.p, self.d)


@dataclass(frozen=True)
class DistTestResult:
    estimates: dict          # estimator -> {"null": (E,) array, "alt": (E,) array}
    deflections: dict        # estimator -> float
    rocs: dict               # estimator -> (K, 2) array of (FPR, TPR)
    aucs: dict               # estimator -> float


def deflection(null_estimates, alt_estimates) -> float:
    """|mu1 - mu0| / sqrt(s0^2 + s1^2) with unbiased standard deviations."""
    e0 = np.asarray(null_estimates, dtype=np.float64)
    e1 = np.asarray(alt_estimates, dtype=np.float64)
    if e0.size < 2 or e1.size < 2:
        raise ValueError("deflection needs at least 2 estimates per hypothesis")
    pooled = float(np.var(e0, ddof=1) + np.var(e1, ddof=1))
    if pooled == 0.0:
        raise ValueError("deflection undefined: both estimate sets are constant")
    return float(abs(np.mean(e1) - np.mean(e0)) / np.sqrt(pooled))


def roc_auc(null_scores, alt_scores, direction: str = "higher-is-alt"):
    """ROC curve and rank-statistic AUC (ties counted half).

    Returns (curve, auc) where curve is a (K, 2) array of (FPR, TPR)
    points from (0, 0) to (1, 1), one step per distinct threshold.
    """
    s0 = np.asarray(null_scores, dtype=np.float64)
    s1 = np.asarray(alt_scores, dtype=np.float64)
    if s0.size == 0 or s1.size == 0:
        raise ValueError("score lists must be nonempty")
    if direction == "lower-is-alt":
        s0, s1 = -s0, -s1
    elif direction != "higher-is-alt":
        raise ValueError('direction must be "higher-is-alt" or "lower-is-alt"')

    ranks = rankdata(np.concatenate([s0, s1]))
    r1 = float(np.sum(ranks[s0.size:]))
    n0, n1 = s0.size, s1.size
    auc = (r1 - n1 * (n1 + 1) / 2.0) / (n0 * n1)

    thresholds = np.unique(np.concatenate([s0, s1]))[::-1]
    curve = [(0.0, 0.0)]
    for thr in thresholds:
        curve.append((float(np.mean(s0 >= thr)), float(np.mean(s1 >= thr))))
    return np.asarray(curve), float(auc)


def run_distribution_test(spec: TestSpec) -> DistTestResult:
    """E experiments per hypothesis; per-estimator deflection, ROC and AUC.

    Seed schedule: null experiment e uses base_seed + e, alternate
    experiment e uses base_seed + E + e.
    """
    weights = None
    if "weighted" in spec.estimators:
        weights = ensemble_weights_for(spec.d, spec.samples_per_experiment, spec.options)
    estimates = {e: {"null": np.empty(spec.experiments), "alt": np.empty(spec.experiments)}
                 for e in spec.estimators}
    for label, params, offset in (("null", spec.null_params, 0),
                                  ("alt", spec.alt_params, spec.experiments)):
        for e in range(spec.experiments):
            seed = spec.base_seed + offset + e
            pts = sample(params, spec.samples_per_experiment, seed)
            vals = panel_estimates(spec.functional, pts, spec.estimators, spec.options,
                                   seed, weights)
            for est in spec.estimators:
                estimates[est][label][e] = vals[est]

    deflections, rocs, aucs = {}, {}, {}
    for est in spec.estimators:
        deflections[est] = deflection(estimates[est]["null"], estimates[est]["alt"])
        curve, auc = roc_auc(estimates[est]["null"], estimates[est]["alt"], spec.direction)
        rocs[est], aucs[est] = curve, auc
    return DistTestResult(estimates=estimates, deflections=deflections, rocs=rocs, aucs=aucs)


@dataclass(frozen=True)
class AucDeltaRow:
    delta: float
    estimator_id: str
    auc: float


def auc_vs_delta(base: TestSpec, deltas) -> tuple[list[AucDeltaRow], dict]:
    """AUC as the alternate parameters slide away from the null.

    For each delta the alternate hypothesis is (a0 - delta, b0 - delta)
    against the null (a0, b0) taken from ``base``.  Each delta gets a
    disjoint seed block.  Returns the rows plus a per-estimator Spearman
    rank correlation of AUC against delta as a monotone-trend diagnostic.
    """
    deltas = [float(v) for v in deltas]
    if any(base.null_a - v <= 0 or base.null_b - v <= 0 for v in deltas):
        raise ValueError("delta too large: alternate beta shapes must stay positive")
    rows: list[AucDeltaRow] = []
    series: dict[str, list[float]] = {e: [] for e in base.estimators}
    for j, delta in enumerate(deltas):
        spec = replace(base, alt_a=base.null_a - delta, alt_b=base.null_b - delta,
                       base_seed=base.base_seed + 2 * base.experiments * j)
        result = run_distribution_test(spec)
        for est in base.estimators:
            rows.append(AucDeltaRow(delta, est, result.aucs[est]))
            series[est].append(result.aucs[est])
    trends = {}
    for est, values in series.items():
        if len(deltas) >= 3:
            rho = spearmanr(deltas, values).statistic
            trends[est] = float(rho) if np.isfinite(rho) else 0.0
        else:
            trends[est] = float("nan")
    return rows, trends
