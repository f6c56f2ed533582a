"""Uniform (box) kernel density estimation with optional boundary truncation.

A window of "size" k (any positive real, k <= M) around a query point x is
the l-infinity cube of side d_k = (k/M)^(1/d).  The truncated estimator
divides the in-window sample count by M times the volume of the window
clipped to the unit cube; the standard estimator always divides by k,
i.e. pretends the window never leaves the support.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._kernels import BACKEND, set_threads, window_counts  # noqa: F401 (re-export)

VARIANTS = ("truncated", "standard")


@dataclass(frozen=True)
class KernelWindow:
    """Bandwidth k over M samples in dimension d; side length d_k = (k/M)^(1/d)."""

    k: float
    m: int
    d: int

    def __post_init__(self):
        if not (0 < self.k <= self.m):
            raise ValueError(f"need 0 < k <= M, got k={self.k}, M={self.m}")
        if self.d < 1:
            raise ValueError("dimension must be >= 1")

    @property
    def d_k(self) -> float:
        return (self.k / self.m) ** (1.0 / self.d)

    @property
    def half_width(self) -> float:
        return self.d_k / 2.0


@dataclass(frozen=True)
class DensityEstimate:
    value: float
    count: int
    volume: float


def sorted_distances(x, samples) -> np.ndarray:
    """All l-infinity distances from ``x`` to the samples, nondecreasing.

    One sort serves every window size: the count for any half-width h is
    ``np.searchsorted(dists, h, side="right")``, bit-identical to direct
    counting.
    """
    x = np.asarray(x, dtype=np.float64)
    samples = np.asarray(samples, dtype=np.float64)
    return np.sort(np.max(np.abs(samples - x), axis=1))


def count_in_window(x, samples, window: KernelWindow) -> int:
    """Number of samples with ||x - y||_inf <= d_k/2 (boundary inclusive)."""
    x = np.asarray(x, dtype=np.float64)
    samples = np.asarray(samples, dtype=np.float64)
    dists = np.max(np.abs(samples - x), axis=1)
    return int(np.count_nonzero(dists <= window.half_width))


def truncated_volume(x, window: KernelWindow) -> float:
    """Volume of the window around ``x`` clipped to the unit cube."""
    x = np.asarray(x, dtype=np.float64)
    if np.any(x < 0.0) or np.any(x > 1.0):
        raise ValueError("query point outside the support [0, 1]^d")
    h = window.half_width
    return float(np.prod(np.minimum(x + h, 1.0) - np.maximum(x - h, 0.0)))


def truncated_volumes(points: np.ndarray, d_ks: np.ndarray) -> np.ndarray:
    """Batch of clipped window volumes, shape (N, L) for L side lengths."""
    points = np.asarray(points, dtype=np.float64)
    h = np.asarray(d_ks, dtype=np.float64) / 2.0
    lo = np.maximum(points[:, None, :] - h[None, :, None], 0.0)
    hi = np.minimum(points[:, None, :] + h[None, :, None], 1.0)
    return np.prod(hi - lo, axis=2)


def density_at(x, samples, window: KernelWindow, variant: str = "truncated") -> DensityEstimate:
    """Kernel density estimate at one query point.

    ``truncated`` divides by the clipped window volume, ``standard`` by the
    nominal k/M volume; the two agree exactly whenever the window lies
    fully inside the support.
    """
    if variant not in VARIANTS:
        raise ValueError(f"variant must be one of {VARIANTS}")
    samples = np.asarray(samples, dtype=np.float64)
    m = samples.shape[0]
    if m != window.m:
        raise ValueError(f"window was built for M={window.m}, got {m} samples")
    count = count_in_window(x, samples, window)
    if variant == "truncated":
        vol = truncated_volume(x, window)
        value = count / (m * vol)
    else:
        vol = window.k / m
        value = count / window.k
    return DensityEstimate(value=float(value), count=count, volume=float(vol))
