"""Conditional dependence statistic via ridge-regression residuals.

Feature maps of the test variables are regressed on feature maps of the
conditioning variable with a ridge penalty; the statistic is the marginal
HSIC of the two residual representations. The x side targets the features
of the concatenated pair (x, z) so that interactions with the conditioner
are kept in play. A neighborhood-aggregated conditioner contributes the
neighborhood mean of its feature rows; a neighborhood-aggregated test
variable is residualized member-wise and the residual rows are averaged
over each node's neighborhood.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .attrgen import AttributeTable, relational_mean_all
from .errors import BadParamsError, DimensionMismatchError, PathTooLargeError
from .kernels import DENSE_GUARDRAIL, center, median_bandwidth, rbf_gram, relational_gram
from .marginal import EXACT, RFF, VariableRef
from .relgraph import Graph
from .rff import (
    FeatureKind,
    FeatureMatrix,
    RFFConfig,
    _feature_values,
    relational_rff_mean,
    rff_map,
    sample_frequencies,
)
from .seeding import seed_for

DEFAULT_CONDITIONAL_FEATURES = 50

# Ridge penalty scales with sample size when not given explicitly.
LAMBDA_PER_SAMPLE = 1e-3


@dataclass(frozen=True)
class ConditionalSpec:
    """A conditional hypothesis: x independent of y given z."""

    x: VariableRef
    y: VariableRef
    z: VariableRef
    ridge_lambda: float | None = None
    method: str = RFF
    rff_x: RFFConfig | None = None
    rff_y: RFFConfig | None = None
    rff_z: RFFConfig | None = None

    def __post_init__(self):
        if self.method not in (EXACT, RFF):
            raise BadParamsError(f"method must be {EXACT!r} or {RFF!r}, got {self.method!r}")
        if self.ridge_lambda is not None and self.ridge_lambda <= 0:
            raise BadParamsError(f"ridge_lambda must be > 0, got {self.ridge_lambda}")

    def describe(self) -> str:
        return f"{self.x.describe()} _||_ {self.y.describe()} | {self.z.describe()}"

    def resolved_lambda(self, n: int) -> float:
        return self.ridge_lambda if self.ridge_lambda is not None else LAMBDA_PER_SAMPLE * n


@dataclass(frozen=True)
class RidgeFit:
    """Coefficients of a multi-output ridge regression."""

    coefficients: np.ndarray
    ridge_lambda: float

    def predict(self, phi_z) -> np.ndarray:
        return _feature_values(phi_z) @ self.coefficients

    def residuals(self, phi_z, phi_t) -> np.ndarray:
        return _feature_values(phi_t) - self.predict(phi_z)


def ridge_fit(phi_z, phi_t, ridge_lambda: float) -> RidgeFit:
    """Solve ``(Phi_z^T Phi_z + lambda I) beta = Phi_z^T Phi_t``."""
    z = _feature_values(phi_z)
    t = _feature_values(phi_t)
    if z.ndim != 2 or t.ndim != 2 or z.shape[0] != t.shape[0]:
        raise DimensionMismatchError(f"row counts differ: {z.shape} vs {t.shape}")
    if ridge_lambda <= 0:
        raise BadParamsError(f"ridge_lambda must be > 0, got {ridge_lambda}")
    gram = z.T @ z
    gram[np.diag_indices_from(gram)] += ridge_lambda
    beta = scipy.linalg.solve(gram, z.T @ t, assume_a="pos")
    return RidgeFit(beta, float(ridge_lambda))


def _resolve_rff(cfg: RFFConfig | None, data, seed: int, label: str) -> RFFConfig:
    if cfg is None:
        cfg = RFFConfig(DEFAULT_CONDITIONAL_FEATURES)
    if cfg.seed is None:
        cfg = dataclasses.replace(cfg, seed=seed_for(seed, "freq", label))
    if cfg.bandwidth is None:
        cfg = dataclasses.replace(cfg, bandwidth=median_bandwidth(data))
    return cfg


def _conditioner_scalar(g: Graph, table: AttributeTable, spec: ConditionalSpec) -> np.ndarray:
    """Scalar stand-in for the conditioner used in the (x, z) concatenation:
    the raw column, or its neighborhood mean when z is relational."""
    z_raw = table[spec.z.name]
    return relational_mean_all(g, z_raw) if spec.z.relational else z_raw


def _x_target_input(g: Graph, table: AttributeTable, spec: ConditionalSpec) -> np.ndarray:
    """Input whose features form the x-side regression target.

    Propositional x: the 2-column concatenation with the conditioner's
    scalar stand-in. Relational x: the raw member values (aggregation
    happens after residualization).
    """
    x_raw = table[spec.x.name]
    if spec.x.relational:
        return x_raw[:, None]
    return np.column_stack([x_raw, _conditioner_scalar(g, table, spec)])


def residualize(
    g: Graph, table: AttributeTable, spec: ConditionalSpec, seed: int = 0
) -> tuple[FeatureMatrix, FeatureMatrix]:
    """Feature-space residuals of the x side and the y side given z.

    Feature columns are centered before the ridge fit (an unpenalized
    intercept), so with an uninformative conditioner the residuals reduce
    to centered raw features.
    """
    lam = spec.resolved_lambda(g.n)
    z_raw = table[spec.z.name]
    cfg_z = _resolve_rff(spec.rff_z, z_raw, seed, "z")
    phi_z = rff_map(z_raw, sample_frequencies(cfg_z, 1)).values
    if spec.z.relational:
        phi_z = relational_rff_mean(phi_z, g).values

    x_input = _x_target_input(g, table, spec)
    cfg_x = _resolve_rff(spec.rff_x, x_input, seed, "x")
    phi_x = rff_map(x_input, sample_frequencies(cfg_x, x_input.shape[1])).values

    y_raw = table[spec.y.name]
    cfg_y = _resolve_rff(spec.rff_y, y_raw, seed, "y")
    phi_y = rff_map(y_raw, sample_frequencies(cfg_y, 1)).values

    phi_z = phi_z - phi_z.mean(axis=0)
    phi_x = phi_x - phi_x.mean(axis=0)
    phi_y = phi_y - phi_y.mean(axis=0)

    rx = ridge_fit(phi_z, phi_x, lam).residuals(phi_z, phi_x)
    ry = ridge_fit(phi_z, phi_y, lam).residuals(phi_z, phi_y)
    if spec.x.relational:
        rx = relational_rff_mean(rx, g).values
    return (
        FeatureMatrix(rx, FeatureKind.RESIDUAL),
        FeatureMatrix(ry, FeatureKind.RESIDUAL),
    )


def _exact_residual_grams(
    g: Graph, table: AttributeTable, spec: ConditionalSpec
) -> tuple[np.ndarray, np.ndarray]:
    """Kernelized residual Grams for the exact path.

    With centered features the residual map is ``R = lam (Kc + lam I)^-1``
    applied to the target features, so the residual Gram of a target with
    centered Gram ``Kt`` is ``W Kt W`` with ``W = lam (Kzc + lam I)^-1``.
    """
    lam = spec.resolved_lambda(g.n)
    z_raw = table[spec.z.name]
    kz = rbf_gram(z_raw, median_bandwidth(z_raw)).values
    if spec.z.relational:
        kz = relational_gram(kz, g)
    kzc = center(kz)
    kzc[np.diag_indices_from(kzc)] += lam
    w = lam * scipy.linalg.inv(kzc)

    x_input = _x_target_input(g, table, spec)
    kx = center(rbf_gram(x_input, median_bandwidth(x_input)).values)
    y_raw = table[spec.y.name]
    ky = center(rbf_gram(y_raw, median_bandwidth(y_raw)).values)

    kx_res = w @ kx @ w.T
    ky_res = w @ ky @ w.T
    if spec.x.relational:
        kx_res = relational_gram(kx_res, g)
    return kx_res, ky_res


class PreparedConditional:
    """A conditional statistic with residuals computed once.

    Permutation replicates shuffle the node assignment of the y-side
    residual rows (exchangeable under the null), leaving the graph, the
    conditioner, and the x-side representation fixed.
    """

    def __init__(self, g: Graph, table: AttributeTable, spec: ConditionalSpec, seed: int = 0):
        if spec.method == EXACT and g.n > DENSE_GUARDRAIL:
            raise PathTooLargeError(
                f"exact path materializes an n x n Gram; n={g.n} exceeds {DENSE_GUARDRAIL}. "
                "Use the random-feature method."
            )
        self.n = g.n
        self.method = spec.method
        if spec.method == EXACT:
            kx_res, ky_res = _exact_residual_grams(g, table, spec)
            self._fixed_centered = center(kx_res)
            self._perm_repr = ky_res
        else:
            rx, ry = residualize(g, table, spec, seed)
            zx = rx.values
            self._fixed_centered = zx - zx.mean(axis=0)
            self._perm_repr = ry.values

    def observed(self) -> float:
        return self._evaluate(self._perm_repr)

    def permuted(self, perm: np.ndarray) -> float:
        if self.method == EXACT:
            return self._evaluate(self._perm_repr[np.ix_(perm, perm)])
        return self._evaluate(self._perm_repr[perm])

    def _evaluate(self, perm_repr: np.ndarray) -> float:
        if self.method == EXACT:
            return float(np.sum(self._fixed_centered * perm_repr) / self.n**2)
        cross = self._fixed_centered.T @ perm_repr / self.n
        return float(np.sum(cross * cross))


def prepare_conditional(
    g: Graph, table: AttributeTable, spec: ConditionalSpec, seed: int = 0
) -> PreparedConditional:
    return PreparedConditional(g, table, spec, seed)


def conditional_statistic(
    g: Graph, table: AttributeTable, spec: ConditionalSpec, seed: int = 0
) -> float:
    """Observed conditional statistic for ``spec`` on ``(g, table)``."""
    return PreparedConditional(g, table, spec, seed).observed()
