"""Marginal dependence statistic between two variables, either of which may
be neighborhood-aggregated.

The statistic is the biased HSIC estimate ``trace(Kx H Ky H) / n^2``. A
neighborhood-aggregated side swaps its raw Gram for the neighborhood
kernel-mean Gram (exact path) or its feature rows for neighborhood-averaged
rows (random-feature path); everything downstream is unchanged.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from .attrgen import AttributeTable
from .errors import BadParamsError, DimensionMismatchError, PathTooLargeError
from .kernels import DENSE_GUARDRAIL, center, median_bandwidth, rbf_gram, relational_gram
from .relgraph import Graph, PathPredicate
from .rff import FeatureMatrix, RFFConfig, rff_map, relational_rff_mean, sample_frequencies, _feature_values
from .seeding import seed_for

EXACT = "exact"
RFF = "rff"

DEFAULT_MARGINAL_FEATURES = 20


@dataclass(frozen=True)
class VariableRef:
    """An attribute name, optionally aggregated over the node neighborhood."""

    name: str
    relational: bool = False
    predicate: PathPredicate = PathPredicate.DIRECT_NEIGHBORS

    def describe(self) -> str:
        return f"rel({self.name})" if self.relational else self.name


@dataclass(frozen=True)
class MarginalSpec:
    """A marginal hypothesis: lhs independent of rhs."""

    lhs: VariableRef
    rhs: VariableRef
    method: str = RFF
    rff_lhs: RFFConfig | None = None
    rff_rhs: RFFConfig | None = None

    def __post_init__(self):
        if self.method not in (EXACT, RFF):
            raise BadParamsError(f"method must be {EXACT!r} or {RFF!r}, got {self.method!r}")

    def describe(self) -> str:
        return f"{self.lhs.describe()} _||_ {self.rhs.describe()}"


def hsic_exact(kx, ky) -> float:
    """Biased HSIC estimate ``trace(Kx H Ky H) / n^2`` from square Grams."""
    x = np.asarray(getattr(kx, "values", kx), dtype=np.float64)
    y = np.asarray(getattr(ky, "values", ky), dtype=np.float64)
    if x.ndim != 2 or x.shape[0] != x.shape[1]:
        raise DimensionMismatchError(f"lhs Gram must be square, got {x.shape}")
    if y.shape != x.shape:
        raise DimensionMismatchError(f"Gram shapes differ: {x.shape} vs {y.shape}")
    n = x.shape[0]
    if n == 1:
        return 0.0
    return float(np.sum(center(x) * center(y)) / n**2)


def hsic_rff(zx, zy) -> float:
    """HSIC from explicit features: squared Frobenius norm of
    ``Zx^T H Zy / n``; never materializes an n x n matrix."""
    x = _feature_values(zx)
    y = _feature_values(zy)
    if x.ndim != 2 or y.ndim != 2 or x.shape[0] != y.shape[0]:
        raise DimensionMismatchError(f"feature row counts differ: {x.shape} vs {y.shape}")
    n = x.shape[0]
    cross = x.T @ (y - y.mean(axis=0)) / n
    return float(np.sum(cross * cross))


def _resolve_rff(cfg: RFFConfig | None, column: np.ndarray, seed: int, label: str) -> RFFConfig:
    """Fill in defaults: feature count, median bandwidth, substream seed."""
    if cfg is None:
        cfg = RFFConfig(DEFAULT_MARGINAL_FEATURES)
    if cfg.seed is None:
        cfg = dataclasses.replace(cfg, seed=seed_for(seed, "freq", label))
    if cfg.bandwidth is None:
        cfg = dataclasses.replace(cfg, bandwidth=median_bandwidth(column))
    return cfg


class PreparedMarginal:
    """A marginal statistic with precomputed representations.

    One side is held fixed; ``permuted`` re-evaluates the statistic with
    the other side's node assignment shuffled. The shuffled side is always
    the designated non-relational one (the rhs when both sides are alike),
    and random-feature frequencies are drawn once and shared across all
    permutation replicates.
    """

    def __init__(self, g: Graph, table: AttributeTable, spec: MarginalSpec, seed: int = 0):
        if spec.method == EXACT and g.n > DENSE_GUARDRAIL:
            raise PathTooLargeError(
                f"exact path materializes an n x n Gram; n={g.n} exceeds {DENSE_GUARDRAIL}. "
                "Use the random-feature method."
            )
        self.g = g
        self.n = g.n
        self.method = spec.method
        # Permute the designated non-relational side; swap so it sits on
        # the "perm" slot. HSIC is symmetric in its arguments.
        if spec.rhs.relational and not spec.lhs.relational:
            fixed, perm = spec.rhs, spec.lhs
            fixed_cfg, perm_cfg = spec.rff_rhs, spec.rff_lhs
            fixed_label, perm_label = "rhs", "lhs"
        else:
            fixed, perm = spec.lhs, spec.rhs
            fixed_cfg, perm_cfg = spec.rff_lhs, spec.rff_rhs
            fixed_label, perm_label = "lhs", "rhs"
        self.perm_relational = perm.relational
        fixed_col = table[fixed.name]
        perm_col = table[perm.name]

        if spec.method == EXACT:
            kf = rbf_gram(fixed_col, median_bandwidth(fixed_col)).values
            if fixed.relational:
                kf = relational_gram(kf, g)
            self._fixed_centered = center(kf)
            kp = rbf_gram(perm_col, median_bandwidth(perm_col)).values
            self._perm_raw = kp if self.perm_relational else None
            self._perm_repr = relational_gram(kp, g) if self.perm_relational else kp
        else:
            cfg_f = _resolve_rff(fixed_cfg, fixed_col, seed, fixed_label)
            cfg_p = _resolve_rff(perm_cfg, perm_col, seed, perm_label)
            zf = rff_map(fixed_col, sample_frequencies(cfg_f, 1)).values
            if fixed.relational:
                zf = relational_rff_mean(zf, g).values
            self._fixed_centered = zf - zf.mean(axis=0)
            zp = rff_map(perm_col, sample_frequencies(cfg_p, 1)).values
            self._perm_raw = zp if self.perm_relational else None
            self._perm_repr = relational_rff_mean(zp, g).values if self.perm_relational else zp

    def observed(self) -> float:
        return self._evaluate(self._perm_repr)

    def permuted(self, perm: np.ndarray) -> float:
        if self.method == EXACT:
            if self.perm_relational:
                shuffled = relational_gram(self._perm_raw[np.ix_(perm, perm)], self.g)
            else:
                shuffled = self._perm_repr[np.ix_(perm, perm)]
        else:
            if self.perm_relational:
                shuffled = relational_rff_mean(self._perm_raw[perm], self.g).values
            else:
                shuffled = self._perm_repr[perm]
        return self._evaluate(shuffled)

    def _evaluate(self, perm_repr: np.ndarray) -> float:
        if self.method == EXACT:
            return float(np.sum(self._fixed_centered * perm_repr) / self.n**2)
        cross = self._fixed_centered.T @ perm_repr / self.n
        return float(np.sum(cross * cross))


def prepare_marginal(g: Graph, table: AttributeTable, spec: MarginalSpec, seed: int = 0) -> PreparedMarginal:
    return PreparedMarginal(g, table, spec, seed)


def marginal_statistic(g: Graph, table: AttributeTable, spec: MarginalSpec, seed: int = 0) -> float:
    """Observed marginal statistic for ``spec`` on ``(g, table)``."""
    return PreparedMarginal(g, table, spec, seed).observed()
