"""Synthetic node attributes for the four dependence scenarios plus a
linear-threshold diffusion simulator.

Generators are pure functions of ``(Graph, config)``: the same seed yields
the same table. Outcome equations follow a polynomial dependence model
with a squared neighborhood-mean term scaled by ``beta_d`` and a squared
confounder term scaled by ``beta_c``.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import BadCaseError, BadParamsError, UnknownColumnError
from .relgraph import Graph

NULL = "null"
ALTERNATE = "alternate"


@dataclass(frozen=True)
class GenConfig:
    """Parameters for one synthetic attribute draw."""

    case: int
    hypothesis: str = ALTERNATE
    beta_d: float = 0.5
    beta_c: float = 1.0
    noise_sd: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.case not in (1, 2, 3, 4):
            raise BadCaseError(f"case must be 1..4, got {self.case}")
        if self.hypothesis not in (NULL, ALTERNATE):
            raise BadParamsError(f"hypothesis must be {NULL!r} or {ALTERNATE!r}")
        if self.beta_d < 0:
            raise BadParamsError(f"beta_d must be >= 0, got {self.beta_d}")
        if self.noise_sd < 0:
            raise BadParamsError(f"noise_sd must be >= 0, got {self.noise_sd}")


@dataclass(frozen=True)
class DiffusionConfig:
    """Parameters for the linear-threshold diffusion draw."""

    steps: int
    p_init: float = 0.1
    seed: int = 0

    def __post_init__(self):
        if self.steps < 1:
            raise BadParamsError(f"steps must be >= 1, got {self.steps}")
        if not 0.0 < self.p_init < 1.0:
            raise BadParamsError(f"p_init must be in (0, 1), got {self.p_init}")


class AttributeTable:
    """Named per-node attribute columns, all of length ``n``."""

    __slots__ = ("columns", "n")

    def __init__(self, columns: dict[str, np.ndarray], n: int):
        self.columns = {}
        for name, col in columns.items():
            arr = np.asarray(col, dtype=np.float64)
            if arr.shape != (n,):
                raise BadParamsError(f"column {name!r} has shape {arr.shape}, expected ({n},)")
            self.columns[name] = arr
        self.n = n

    def __getitem__(self, name: str) -> np.ndarray:
        try:
            return self.columns[name]
        except KeyError:
            raise UnknownColumnError(name) from None

    def __contains__(self, name: str) -> bool:
        return name in self.columns

    def names(self) -> list[str]:
        return list(self.columns)

    def __eq__(self, other) -> bool:
        if not isinstance(other, AttributeTable):
            return NotImplemented
        return (
            self.n == other.n
            and self.names() == other.names()
            and all(np.array_equal(self.columns[k], other.columns[k]) for k in self.columns)
        )

    def __repr__(self) -> str:
        return f"AttributeTable(n={self.n}, columns={self.names()})"


def relational_mean(g: Graph, column: np.ndarray, i: int) -> float:
    """Mean of ``column`` over the direct neighbors of node ``i``."""
    col = np.asarray(column, dtype=np.float64)
    if col.shape != (g.n,):
        raise BadParamsError(f"column length {col.shape} does not match n={g.n}")
    return float(col[g.neighbor_array(i)].mean())


def relational_mean_all(g: Graph, column: np.ndarray) -> np.ndarray:
    """Neighborhood mean of ``column`` at every node: ``D^-1 A column``."""
    col = np.asarray(column, dtype=np.float64)
    if col.shape != (g.n,):
        raise BadParamsError(f"column length {col.shape} does not match n={g.n}")
    return (g.adjacency @ col) / g.degrees


def binarize(values: np.ndarray) -> np.ndarray:
    """Median split: 1 above the column median, 0 otherwise."""
    v = np.asarray(values, dtype=np.float64)
    return (v > np.median(v)).astype(np.float64)


def gen_case1(g: Graph, cfg: GenConfig) -> AttributeTable:
    """Treatment X (binary) and outcome Y; under the alternate, Y responds
    to the squared neighborhood mean of X."""
    if cfg.case != 1:
        raise BadCaseError(f"expected case 1 config, got case {cfg.case}")
    rng = np.random.default_rng(cfg.seed)
    x = binarize(rng.uniform(size=g.n))
    if cfg.hypothesis == NULL:
        y = rng.uniform(size=g.n)
    else:
        eps = rng.normal(0.0, cfg.noise_sd, size=g.n)
        y = cfg.beta_d * relational_mean_all(g, x) ** 2 + eps
    return AttributeTable({"X": x, "Y": y}, g.n)


def gen_case2(g: Graph, cfg: GenConfig) -> AttributeTable:
    """Propositional confounder: Z drives both X and Y; under the alternate
    Y additionally responds to the neighborhood mean of X."""
    if cfg.case != 2:
        raise BadCaseError(f"expected case 2 config, got case {cfg.case}")
    rng = np.random.default_rng(cfg.seed)
    z = rng.uniform(size=g.n)
    eps_x = rng.normal(0.0, cfg.noise_sd, size=g.n)
    x = binarize(cfg.beta_c * z**2 + eps_x)
    eps_y = rng.normal(0.0, cfg.noise_sd, size=g.n)
    y = cfg.beta_c * z**2 + eps_y
    if cfg.hypothesis == ALTERNATE:
        y = cfg.beta_d * relational_mean_all(g, x) ** 2 + y
    return AttributeTable({"Z": z, "X": x, "Y": y}, g.n)


def gen_case3(g: Graph, cfg: GenConfig) -> AttributeTable:
    """Relational confounder: the neighborhood mean of Z drives both X and
    Y; under the alternate Y additionally responds to X itself."""
    if cfg.case != 3:
        raise BadCaseError(f"expected case 3 config, got case {cfg.case}")
    rng = np.random.default_rng(cfg.seed)
    z = rng.uniform(size=g.n)
    relz_sq = relational_mean_all(g, z) ** 2
    eps_x = rng.normal(0.0, cfg.noise_sd, size=g.n)
    x = binarize(cfg.beta_c * relz_sq + eps_x)
    eps_y = rng.normal(0.0, cfg.noise_sd, size=g.n)
    y = cfg.beta_c * relz_sq + eps_y
    if cfg.hypothesis == ALTERNATE:
        y = cfg.beta_d * x**2 + y
    return AttributeTable({"Z": z, "X": x, "Y": y}, g.n)


def gen_case4(g: Graph, cfg: GenConfig) -> AttributeTable:
    """Common cause without a direct edge: each node's Z influences its
    neighbors' X (through the neighborhood mean) and its own Y, so the
    neighborhood mean of X and Y are dependent only through Z.

    The hypothesis label does not change the equations; there is no
    dependence term to add.
    """
    if cfg.case != 4:
        raise BadCaseError(f"expected case 4 config, got case {cfg.case}")
    rng = np.random.default_rng(cfg.seed)
    z = rng.uniform(size=g.n)
    eps_x = rng.normal(0.0, cfg.noise_sd, size=g.n)
    x = binarize(cfg.beta_c * relational_mean_all(g, z) ** 2 + eps_x)
    eps_y = rng.normal(0.0, cfg.noise_sd, size=g.n)
    y = cfg.beta_c * z**2 + eps_y
    return AttributeTable({"Z": z, "X": x, "Y": y}, g.n)


_GENERATORS = {1: gen_case1, 2: gen_case2, 3: gen_case3, 4: gen_case4}


def gen_table(g: Graph, cfg: GenConfig) -> AttributeTable:
    """Dispatch to the generator for ``cfg.case``."""
    return _GENERATORS[cfg.case](g, cfg)


def draw_noise_sd(rng: np.random.Generator) -> float:
    """Per-trial noise level for the varied-noise mode: the noise variance
    is drawn from N(1, 0.2^2) and clipped below at 0.05."""
    return float(np.sqrt(max(rng.normal(1.0, 0.2), 0.05)))


def threshold_dynamics(
    g: Graph, thresholds: np.ndarray, x0: np.ndarray, steps: int
) -> tuple[np.ndarray, np.ndarray]:
    """Run the threshold map ``x <- 1(neighborhood mean of x > T)`` for
    ``steps`` iterations from ``x0``; returns (X, Y) where Y is one further
    application of the map to the final X."""
    if steps < 1:
        raise BadParamsError(f"steps must be >= 1, got {steps}")
    t = np.asarray(thresholds, dtype=np.float64)
    x = np.asarray(x0, dtype=np.float64)
    if t.shape != (g.n,) or x.shape != (g.n,):
        raise BadParamsError("thresholds and x0 must have length n")
    for _ in range(steps):
        x = (relational_mean_all(g, x) > t).astype(np.float64)
    y = (relational_mean_all(g, x) > t).astype(np.float64)
    return x, y


def diffuse_linear_threshold(g: Graph, cfg: DiffusionConfig) -> AttributeTable:
    """Linear-threshold diffusion: thresholds are uniform, the initial
    activation is Bernoulli(p_init), treatments are reassigned at each step
    from the previous step's neighborhood mean, and the outcome Y applies
    the same rule once more to the final treatment X."""
    rng = np.random.default_rng(cfg.seed)
    thresholds = rng.uniform(size=g.n)
    x0 = (rng.uniform(size=g.n) < cfg.p_init).astype(np.float64)
    x, y = threshold_dynamics(g, thresholds, x0, cfg.steps)
    return AttributeTable({"X": x, "Y": y}, g.n)


def write_attribute_csv(table: AttributeTable, path) -> None:
    """One header row of column names, one row per node in id order.

    Floats are written with ``repr`` so a read-back is value-exact.
    """
    names = table.names()
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(names)
        cols = [table.columns[name] for name in names]
        for i in range(table.n):
            writer.writerow([repr(float(col[i])) for col in cols])


def read_attribute_csv(path) -> AttributeTable:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            names = next(reader)
        except StopIteration:
            raise BadParamsError(f"{path}: empty attribute file") from None
        rows = [[float(v) for v in row] for row in reader if row]
    data = np.asarray(rows, dtype=np.float64)
    if data.ndim != 2 or data.shape[1] != len(names):
        raise BadParamsError(f"{path}: ragged attribute rows")
    return AttributeTable({name: data[:, k] for k, name in enumerate(names)}, data.shape[0])
