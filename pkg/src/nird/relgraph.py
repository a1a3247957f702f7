"""Undirected graph model, structural validation, and synthetic generators.

Graphs are stored as a symmetric sparse CSR adjacency with unit edge
weights plus a dense integer degree vector. Construction validates the
structural requirements the rest of the package relies on: symmetry, no
self-loops, and minimum degree one.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import (
    BadParamsError,
    IsolatedNodeError,
    OutOfRangeError,
    SelfLoopError,
)


class PathPredicate(enum.Enum):
    """Which related nodes feed a neighborhood-aggregated variable.

    Only the direct (1-hop) neighborhood is implemented; the enum is the
    extension point for multi-hop or query-style selectors.
    """

    DIRECT_NEIGHBORS = "direct_neighbors"


@dataclass(frozen=True)
class GraphGenConfig:
    """Parameters for one synthetic network draw."""

    model: str  # "ba" | "er"
    n: int
    ba_m: int = 1
    er_p: float = 0.01
    seed: int = 0

    @property
    def model_param(self) -> float:
        return float(self.ba_m) if self.model == "ba" else float(self.er_p)


class Graph:
    """Immutable undirected graph over node ids ``0..n-1``.

    Attributes
    ----------
    n : int
        Node count.
    adjacency : scipy.sparse.csr_matrix
        Symmetric 0/1 adjacency with zero diagonal.
    degrees : np.ndarray
        Integer degree per node, all >= 1.
    """

    __slots__ = ("n", "adjacency", "degrees")

    def __init__(self, adjacency: sp.spmatrix):
        a = sp.csr_matrix(adjacency, dtype=np.float64)
        if a.shape[0] != a.shape[1]:
            raise BadParamsError(f"adjacency must be square, got {a.shape}")
        a.eliminate_zeros()
        a.sum_duplicates()
        diag = a.diagonal()
        if np.any(diag != 0):
            raise SelfLoopError(int(np.flatnonzero(diag)[0]))
        if (a != a.T).nnz != 0:
            raise BadParamsError("adjacency must be symmetric")
        degrees = np.diff(a.indptr)
        if a.shape[0] == 0 or degrees.min() < 1:
            isolated = int(np.argmin(degrees)) if a.shape[0] else 0
            raise IsolatedNodeError(isolated)
        self.n = a.shape[0]
        self.adjacency = a
        self.degrees = degrees.astype(np.int64)

    def neighbor_array(self, i: int) -> np.ndarray:
        """Sorted neighbor ids of node ``i`` as an array."""
        if not 0 <= i < self.n:
            raise OutOfRangeError(f"node id {i} not in [0, {self.n})")
        a = self.adjacency
        return a.indices[a.indptr[i] : a.indptr[i + 1]].copy()

    def edge_array(self) -> np.ndarray:
        """Edges as an (m, 2) array with i < j, sorted lexicographically."""
        coo = sp.triu(self.adjacency, k=1).tocoo()
        edges = np.column_stack([coo.row, coo.col]).astype(np.int64)
        order = np.lexsort((edges[:, 1], edges[:, 0]))
        return edges[order]

    def num_edges(self) -> int:
        return self.adjacency.nnz // 2

    def __eq__(self, other) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return self.n == other.n and (self.adjacency != other.adjacency).nnz == 0

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, edges={self.num_edges()})"


def build_graph(edges, n: int) -> Graph:
    """Build a validated graph from an iterable of node-id pairs.

    Pairs may appear in either orientation and may repeat; duplicates
    collapse to a single unit-weight edge.
    """
    if n < 1:
        raise BadParamsError(f"need n >= 1, got {n}")
    arr = np.asarray(list(edges), dtype=np.int64)
    if arr.size == 0:
        arr = arr.reshape(0, 2)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise BadParamsError("edges must be pairs of node ids")
    if arr.size and (arr.min() < 0 or arr.max() >= n):
        bad = arr[(arr < 0).any(axis=1) | (arr >= n).any(axis=1)][0]
        raise OutOfRangeError(f"edge {tuple(bad)} references ids outside [0, {n})")
    loops = arr[:, 0] == arr[:, 1]
    if loops.any():
        raise SelfLoopError(int(arr[loops][0, 0]))
    i = np.concatenate([arr[:, 0], arr[:, 1]])
    j = np.concatenate([arr[:, 1], arr[:, 0]])
    a = sp.csr_matrix((np.ones(i.size), (i, j)), shape=(n, n))
    a.data[:] = 1.0  # summed duplicates back to unit weight
    return Graph(a)


def neighbors(g: Graph, i: int) -> set[int]:
    """Direct-neighbor ids of node ``i`` (the 1-hop path predicate)."""
    return set(int(v) for v in g.neighbor_array(i))


def predicate_members(g: Graph, i: int, predicate: PathPredicate = PathPredicate.DIRECT_NEIGHBORS) -> np.ndarray:
    """Node ids selected by ``predicate`` at node ``i``."""
    if predicate is not PathPredicate.DIRECT_NEIGHBORS:
        raise BadParamsError(f"unsupported path predicate {predicate}")
    return g.neighbor_array(i)


def generate_ba(n: int, m: int, seed: int = 0) -> Graph:
    """Preferential-attachment graph: clique seed on ``m`` nodes, then each
    new node attaches to ``m`` distinct existing nodes with probability
    proportional to degree."""
    if m < 1:
        raise BadParamsError(f"need m >= 1, got {m}")
    if n <= m:
        raise BadParamsError(f"need n > m, got n={n}, m={m}")
    rng = np.random.default_rng(seed)
    src = []
    dst = []
    degree = np.zeros(n, dtype=np.float64)
    for a in range(m):
        for b in range(a + 1, m):
            src.append(a)
            dst.append(b)
            degree[a] += 1
            degree[b] += 1
    for v in range(m, n):
        total = degree[:v].sum()
        if total == 0:  # m == 1: lone seed node, attach uniformly
            targets = rng.choice(v, size=m, replace=False)
        else:
            targets = rng.choice(v, size=m, replace=False, p=degree[:v] / total)
        for t in targets:
            src.append(v)
            dst.append(int(t))
            degree[v] += 1
            degree[t] += 1
    return build_graph(np.column_stack([src, dst]), n)


def _er_edge_sample(n: int, p: float, rng: np.random.Generator) -> np.ndarray:
    """Raw G(n, p) edge sample as an (m, 2) array, before any repair."""
    rows = []
    for i in range(n - 1):
        hits = np.flatnonzero(rng.random(n - 1 - i) < p)
        if hits.size:
            rows.append(np.column_stack([np.full(hits.size, i), i + 1 + hits]))
    if not rows:
        return np.empty((0, 2), dtype=np.int64)
    return np.concatenate(rows).astype(np.int64)


def generate_er(n: int, p: float, seed: int = 0) -> Graph:
    """G(n, p) sample with isolated nodes repaired by attaching each to one
    uniformly random other node."""
    if n < 2:
        raise BadParamsError(f"need n >= 2, got {n}")
    if not 0.0 < p < 1.0:
        raise BadParamsError(f"need 0 < p < 1, got {p}")
    rng = np.random.default_rng(seed)
    edges = _er_edge_sample(n, p, rng)
    degree = np.zeros(n, dtype=np.int64)
    if edges.size:
        np.add.at(degree, edges[:, 0], 1)
        np.add.at(degree, edges[:, 1], 1)
    extra = []
    for v in np.flatnonzero(degree == 0):
        other = int(rng.integers(n - 1))
        if other >= v:
            other += 1
        extra.append((int(v), other))
        degree[v] += 1
        degree[other] += 1
    if extra:
        edges = np.concatenate([edges, np.asarray(extra, dtype=np.int64)])
    return build_graph(edges, n)


def generate_graph(cfg: GraphGenConfig) -> Graph:
    """Dispatch on ``cfg.model``."""
    if cfg.model == "ba":
        return generate_ba(cfg.n, cfg.ba_m, cfg.seed)
    if cfg.model == "er":
        return generate_er(cfg.n, cfg.er_p, cfg.seed)
    raise BadParamsError(f"unknown graph model {cfg.model!r}")


def induced_subgraph(g: Graph, nodes, rng: np.random.Generator | None = None) -> Graph:
    """Induced subgraph on ``nodes`` (relabeled to 0..k-1 in sorted order).

    Nodes left isolated by the restriction are attached to one uniformly
    random other sampled node, mirroring the G(n, p) repair, so the result
    satisfies the minimum-degree requirement.
    """
    idx = np.unique(np.asarray(nodes, dtype=np.int64))
    if idx.size < 2:
        raise BadParamsError("need at least 2 sampled nodes")
    if idx.min() < 0 or idx.max() >= g.n:
        raise OutOfRangeError("sampled node ids outside [0, n)")
    sub = g.adjacency[idx][:, idx].tocsr()
    k = idx.size
    degree = np.diff(sub.indptr)
    isolated = np.flatnonzero(degree == 0)
    if isolated.size:
        if rng is None:
            rng = np.random.default_rng(0)
        extra = []
        for v in isolated:
            other = int(rng.integers(k - 1))
            if other >= v:
                other += 1
            extra.append((int(v), other))
        rows = np.concatenate([sp.triu(sub, k=1).tocoo().row, [e[0] for e in extra]])
        cols = np.concatenate([sp.triu(sub, k=1).tocoo().col, [e[1] for e in extra]])
        return build_graph(np.column_stack([rows, cols]).astype(np.int64), k)
    return Graph(sub)


def read_edge_list(path, n: int | None = None) -> Graph:
    """Read a whitespace-separated edge list; ``#`` lines are comments.

    Node count is ``max id + 1`` unless overridden.
    """
    edges = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            parts = text.split()
            if len(parts) != 2:
                raise BadParamsError(f"{path}:{lineno}: expected two node ids, got {text!r}")
            try:
                edges.append((int(parts[0]), int(parts[1])))
            except ValueError as exc:
                raise BadParamsError(f"{path}:{lineno}: non-integer node id in {text!r}") from exc
    if n is None:
        if not edges:
            raise BadParamsError(f"{path}: empty edge list and no node count given")
        n = int(max(max(e) for e in edges)) + 1
    return build_graph(edges, n)


def write_edge_list(g: Graph, path) -> None:
    """Write one ``i j`` line per undirected edge (i < j, sorted)."""
    with open(path, "w", encoding="utf-8") as fh:
        for i, j in g.edge_array():
            fh.write(f"{i} {j}\n")
