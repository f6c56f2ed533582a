"""Comparison estimators: histogram plug-in and k-NN functional estimators."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree
from scipy.special import digamma, gammaln

from .functionals import FunctionalSpec, g_eval
from .plugin import EstimateRecord


@dataclass(frozen=True)
class HistogramConfig:
    bins_per_dim: int

    def __post_init__(self):
        if self.bins_per_dim < 1:
            raise ValueError("bins_per_dim must be >= 1")


def default_bins(t: int, d: int) -> int:
    """MSE-order-balancing default: ceil(T^(1/(d+2))) bins per dimension."""
    return int(math.ceil(t ** (1.0 / (d + 2))))


def histogram_plugin(g: FunctionalSpec, samples: np.ndarray,
                     cfg: HistogramConfig | None = None, seed: int = 0) -> EstimateRecord:
    """Histogram density plug-in: average g over per-cell density estimates.

    No data splitting; every sample is evaluated against the histogram
    built from all T samples.
    """
    samples = np.asarray(samples, dtype=np.float64)
    t, d = samples.shape
    bins = cfg.bins_per_dim if cfg is not None else default_bins(t, d)
    idx = np.minimum((samples * bins).astype(np.int64), bins - 1)
    flat = np.ravel_multi_index(idx.T, (bins,) * d)
    counts = np.bincount(flat, minlength=bins ** d)
    cell_volume = float(bins) ** (-d)
    dens = counts[flat] / (t * cell_volume)
    value = float(np.mean(g_eval(g, dens)))
    return EstimateRecord(value=value, estimator_id="histogram", n_eval=t, m_density=t,
                          seed=seed, detail={"bins_per_dim": int(bins)})


def _unit_ball_log_volume(d: int) -> float:
    # Euclidean unit ball in d dimensions.
    return (d / 2.0) * math.log(math.pi) - gammaln(d / 2.0 + 1.0)


def knn_functional(g: FunctionalSpec, samples: np.ndarray, k: int = 5,
                   seed: int = 0) -> EstimateRecord:
    """k-NN estimators of Shannon, Renyi and Panter-Dite functionals.

    Shannon uses the digamma-corrected log-distance estimator; Renyi and
    Panter-Dite use the power-distance estimator of the integral
    E[f^(alpha-1)], with Panter-Dite scaled by n^(-2/q) at
    alpha = q/(q+2).
    """
    samples = np.asarray(samples, dtype=np.float64)
    t, d = samples.shape
    if not (1 <= k < t):
        raise ValueError(f"need 1 <= k < T={t}, got k={k}")
    if g.kind == "quadratic":
        raise ValueError("k-NN estimator supports shannon, renyi and panter_dite only")

    dists, _ = cKDTree(samples).query(samples, k=k + 1)
    eps = dists[:, k]  # distance to the k-th neighbor, self excluded
    if np.any(eps == 0.0):
        raise ValueError("duplicate sample points give a zero k-NN distance")

    log_vd = _unit_ball_log_volume(d)
    if g.kind == "shannon":
        value = float(digamma(t) - digamma(k) + log_vd + d * np.mean(np.log(eps)))
        return EstimateRecord(value=value, estimator_id="knn", n_eval=t, m_density=t,
                              seed=seed, detail={"k": int(k)})

    if g.kind == "renyi":
        alpha, prefactor = g.alpha, 1.0
    else:  # panter_dite
        alpha = g.q / (g.q + 2.0)
        prefactor = g.n ** (-2.0 / g.q)
    if k + 1.0 - alpha <= 0:
        raise ValueError(f"power-distance estimator needs k > alpha - 1 = {alpha - 1.0}")
    # E[f^(alpha-1)] estimate: mean of ((T-1) V_d eps^d)^(1-alpha), bias
    # corrected by Gamma(k) / Gamma(k + 1 - alpha).
    log_base = math.log(t - 1) + log_vd + d * np.log(eps)
    correction = math.exp(gammaln(k) - gammaln(k + 1.0 - alpha))
    integral = correction * float(np.mean(np.exp((1.0 - alpha) * log_base)))
    return EstimateRecord(value=prefactor * integral, estimator_id="knn", n_eval=t,
                          m_density=t, seed=seed, detail={"k": int(k)})
