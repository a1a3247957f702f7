"""Exact RBF kernel machinery and the neighborhood kernel-mean Gram.

The neighborhood Gram ``D^-1 A K A D^-1`` holds the inner products between
per-node kernel means of neighbor attribute values; it is what lets the
exact test path treat a neighborhood-aggregated variable like any other.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist, pdist

from .errors import BadBandwidthError, BadParamsError, DimensionMismatchError
from .relgraph import Graph

# Exact-path ceiling: dense n x n Grams beyond this must use random features.
DENSE_GUARDRAIL = 2000

_MEDIAN_SUBSAMPLE = 1000


@dataclass(frozen=True)
class KernelMatrix:
    """An n x n RBF Gram together with the bandwidth that produced it."""

    values: np.ndarray
    bandwidth: float


def _as_matrix(x) -> np.ndarray:
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2:
        raise BadParamsError(f"expected a vector or 2-d array, got shape {arr.shape}")
    return arr


def _values(k) -> np.ndarray:
    if isinstance(k, KernelMatrix):
        return k.values
    return np.asarray(k, dtype=np.float64)


def median_bandwidth(x, max_points: int = _MEDIAN_SUBSAMPLE) -> float:
    """Median pairwise Euclidean distance, on a deterministic subsample of
    at most ``max_points`` points.

    A zero median (common for binary columns) falls back to the median of
    the positive distances; fully degenerate input falls back to 1.0 with
    a warning.
    """
    arr = _as_matrix(x)
    n = arr.shape[0]
    if n < 2:
        raise BadParamsError(f"need at least 2 points, got {n}")
    if n > max_points:
        idx = np.unique(np.linspace(0, n - 1, max_points).astype(np.int64))
        arr = arr[idx]
    d = pdist(arr)
    med = float(np.median(d))
    if med <= 0.0:
        positive = d[d > 0]
        if positive.size == 0:
            warnings.warn("all points identical; falling back to bandwidth 1.0", stacklevel=2)
            return 1.0
        med = float(np.median(positive))
    return med


def rbf_gram(x, bandwidth: float) -> KernelMatrix:
    """Gaussian kernel matrix ``exp(-|xi - xj|^2 / (2 bandwidth^2))``."""
    if not np.isfinite(bandwidth) or bandwidth <= 0:
        raise BadBandwidthError(f"bandwidth must be positive and finite, got {bandwidth}")
    arr = _as_matrix(x)
    sq = cdist(arr, arr, "sqeuclidean")
    k = np.exp(-sq / (2.0 * bandwidth**2))
    return KernelMatrix(k, float(bandwidth))


def center(k) -> np.ndarray:
    """Double centering ``H K H`` without materializing H."""
    v = _values(k)
    if v.ndim != 2 or v.shape[0] != v.shape[1]:
        raise DimensionMismatchError(f"expected a square matrix, got shape {v.shape}")
    row = v.mean(axis=1, keepdims=True)
    col = v.mean(axis=0, keepdims=True)
    grand = v.mean()
    return v - row - col + grand


def relational_gram(k, g: Graph) -> np.ndarray:
    """Inner products between neighborhood kernel means: ``D^-1 A K A D^-1``.

    Entry (i, j) averages ``K[m, p]`` over all neighbor pairs
    ``m in N(i), p in N(j)``.
    """
    v = _values(k)
    if v.shape != (g.n, g.n):
        raise DimensionMismatchError(f"kernel shape {v.shape} does not match n={g.n}")
    a = g.adjacency
    ak = a @ v
    aka = a @ ak.T  # A K A for symmetric A, K
    deg = g.degrees.astype(np.float64)
    return aka / np.outer(deg, deg)


def min_eigenvalue(k) -> float:
    """Smallest eigenvalue of a symmetric matrix (numerical PSD check)."""
    v = _values(k)
    return float(np.linalg.eigvalsh((v + v.T) / 2.0)[0])
