"""Random Fourier feature approximation of the RBF kernel and of the
neighborhood kernel mean.

Features use paired cos/sin columns, so ``num_features`` frequency draws
yield ``2 * num_features`` columns and every raw feature row has unit
squared norm. Averaging feature rows over a node's neighbors approximates
the neighborhood kernel mean explicitly, which keeps the large-sample test
path free of any n x n matrix.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import BadBandwidthError, BadParamsError, DimensionMismatchError
from .kernels import _as_matrix
from .relgraph import Graph


class FeatureKind(enum.Enum):
    RAW = "raw"
    RELATIONAL_MEAN = "relational_mean"
    RESIDUAL = "residual"


@dataclass(frozen=True)
class RFFConfig:
    """Feature-map parameters.

    ``bandwidth=None`` means "use the median heuristic on the data at test
    time"; ``seed=None`` means "derive from the enclosing test's seed".
    Sampling frequencies requires both to be concrete.
    """

    num_features: int
    bandwidth: float | None = None
    seed: int | None = None

    def __post_init__(self):
        if self.num_features < 1:
            raise BadParamsError(f"num_features must be >= 1, got {self.num_features}")


@dataclass(frozen=True)
class FeatureMatrix:
    """Explicit n x d feature representation used by both test paths."""

    values: np.ndarray
    kind: FeatureKind = FeatureKind.RAW

    @property
    def n(self) -> int:
        return self.values.shape[0]


def _feature_values(z) -> np.ndarray:
    if isinstance(z, FeatureMatrix):
        return z.values
    return np.asarray(z, dtype=np.float64)


def sample_frequencies(cfg: RFFConfig, input_dim: int) -> np.ndarray:
    """Draw ``num_features`` Gaussian frequency rows with scale 1/bandwidth,
    so feature inner products approximate the RBF kernel at that bandwidth."""
    if input_dim < 1:
        raise BadParamsError(f"input_dim must be >= 1, got {input_dim}")
    if cfg.bandwidth is None or not np.isfinite(cfg.bandwidth) or cfg.bandwidth <= 0:
        raise BadBandwidthError(f"bandwidth must be positive and finite, got {cfg.bandwidth}")
    if cfg.seed is None:
        raise BadParamsError("RFFConfig.seed must be resolved before drawing frequencies")
    rng = np.random.default_rng(cfg.seed)
    return rng.normal(0.0, 1.0 / cfg.bandwidth, size=(cfg.num_features, input_dim))


def rff_map(x, freqs: np.ndarray) -> FeatureMatrix:
    """Map inputs to interleaved cos/sin features scaled by sqrt(2/d)."""
    arr = _as_matrix(x)
    w = np.asarray(freqs, dtype=np.float64)
    if w.ndim != 2 or w.shape[1] != arr.shape[1]:
        raise DimensionMismatchError(
            f"frequencies shape {w.shape} does not match input dim {arr.shape[1]}"
        )
    proj = arr @ w.T
    d = 2 * w.shape[0]
    out = np.empty((arr.shape[0], d), dtype=np.float64)
    scale = np.sqrt(2.0 / d)
    out[:, 0::2] = np.cos(proj)
    out[:, 1::2] = np.sin(proj)
    out *= scale
    return FeatureMatrix(out, FeatureKind.RAW)


def relational_rff_mean(z, g: Graph) -> FeatureMatrix:
    """Average feature rows over each node's neighborhood: ``D^-1 A Z``."""
    v = _feature_values(z)
    if v.shape[0] != g.n:
        raise DimensionMismatchError(f"feature rows {v.shape[0]} do not match n={g.n}")
    mean = (g.adjacency @ v) / g.degrees[:, None]
    return FeatureMatrix(mean, FeatureKind.RELATIONAL_MEAN)
