"""Permutation null distribution, p-values, and accept/reject decisions.

The null is estimated by shuffling the node assignment of the designated
non-aggregated variable, which preserves its marginal distribution while
severing any cross-dependence. The add-one p-value
``(1 + #{replicates >= observed}) / (B + 1)`` is valid for any B.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .attrgen import AttributeTable
from .conditional import ConditionalSpec, prepare_conditional
from .errors import BadParamsError
from .marginal import MarginalSpec, prepare_marginal
from .relgraph import Graph
from .seeding import seed_for

DEFAULT_PERMUTATIONS = 1000
DEFAULT_ALPHA = 0.05


@dataclass(frozen=True)
class TestResult:
    """Outcome of one hypothesis test."""

    statistic: float
    p_value: float
    reject: bool
    num_permutations: int
    alpha: float
    seed: int
    method: str
    hypothesis: str


def permutation_pvalue(
    stat_fn: Callable[[np.ndarray], float],
    observed: float,
    num_permutations: int,
    n: int,
    seed: int = 0,
) -> float:
    """Add-one permutation p-value.

    ``stat_fn`` receives a length-``n`` permutation and returns the
    replicate statistic. Each replicate draws its permutation from its own
    substream, so the result is independent of evaluation order.
    """
    if num_permutations < 19:
        raise BadParamsError(f"need at least 19 permutations, got {num_permutations}")
    if n < 2:
        raise BadParamsError(f"need at least 2 nodes, got {n}")
    exceed = 0
    for child in np.random.SeedSequence(seed).spawn(num_permutations):
        perm = np.random.default_rng(child).permutation(n)
        if stat_fn(perm) >= observed:
            exceed += 1
    return (1 + exceed) / (num_permutations + 1)


def run_test(
    g: Graph,
    table: AttributeTable,
    spec: MarginalSpec | ConditionalSpec,
    num_permutations: int = DEFAULT_PERMUTATIONS,
    alpha: float = DEFAULT_ALPHA,
    seed: int = 0,
) -> TestResult:
    """Compute the observed statistic, its permutation p-value, and the
    decision at level ``alpha``. Fully deterministic under ``seed``."""
    if not 0.0 < alpha < 1.0:
        raise BadParamsError(f"alpha must be in (0, 1), got {alpha}")
    if isinstance(spec, MarginalSpec):
        prepared = prepare_marginal(g, table, spec, seed)
    elif isinstance(spec, ConditionalSpec):
        prepared = prepare_conditional(g, table, spec, seed)
    else:
        raise BadParamsError(f"unsupported spec type {type(spec).__name__}")
    observed = prepared.observed()
    p = permutation_pvalue(
        prepared.permuted, observed, num_permutations, g.n, seed_for(seed, "perm")
    )
    return TestResult(
        statistic=observed,
        p_value=p,
        reject=p <= alpha,
        num_permutations=num_permutations,
        alpha=alpha,
        seed=seed,
        method=spec.method,
        hypothesis=spec.describe(),
    )
