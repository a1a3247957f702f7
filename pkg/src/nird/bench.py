"""Monte-Carlo experiment harness: error-rate studies over synthetic
networks, diffusion detection, and timing sweeps, all emitting one CSV
schema.

Every trial draws a fresh graph and fresh attributes from its own seed
substream, so results are bitwise reproducible from the master seed and
independent of worker scheduling. Type I rates come only from
null-generated trials and Type II rates only from alternate-generated
ones; the aggregation asserts that provenance.
"""

from __future__ import annotations

import csv
import dataclasses
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .attrgen import (
    ALTERNATE,
    NULL,
    AttributeTable,
    DiffusionConfig,
    GenConfig,
    diffuse_linear_threshold,
    draw_noise_sd,
    gen_table,
)
from .conditional import ConditionalSpec
from .errors import BadParamsError
from .marginal import RFF, MarginalSpec, VariableRef
from .nullperm import run_test
from .relgraph import Graph, GraphGenConfig, generate_graph, induced_subgraph
from .rff import RFFConfig
from .seeding import rng_for, seed_for

CSV_COLUMNS = [
    "experiment_id",
    "case",
    "model",
    "model_param",
    "beta_d",
    "n",
    "steps",
    "trials",
    "type1",
    "type2",
    "mean_stat",
    "mean_runtime_ms",
    "seed",
]


@dataclass(frozen=True)
class ExperimentGrid:
    """Fully specified Monte-Carlo sweep."""

    graph_configs: tuple[GraphGenConfig, ...]
    cases: tuple[int, ...]
    beta_grid: tuple[float, ...]
    trials: int
    num_permutations: int = 1000
    alpha: float = 0.05
    method: str = RFF
    marginal_features: int = 20
    conditional_features: int = 50
    beta_c: float = 1.0
    noise_sd: float = 1.0
    noise_mode: str = "fixed"  # "fixed" | "varied"
    network_beta_d: float = 0.5
    master_seed: int = 0
    workers: int = 1

    def __post_init__(self):
        if self.trials < 1:
            raise BadParamsError(f"trials must be >= 1, got {self.trials}")
        if self.noise_mode not in ("fixed", "varied"):
            raise BadParamsError(f"noise_mode must be 'fixed' or 'varied', got {self.noise_mode!r}")


@dataclass(frozen=True)
class TrialRecord:
    """Provenance-tagged outcome of a single trial."""

    hypothesis: str
    reject: bool
    statistic: float
    runtime_ms: float


@dataclass(frozen=True)
class ReportRow:
    experiment_id: str
    case: int
    model: str
    model_param: float
    beta_d: float | None
    n: int
    steps: int | None
    trials: int
    type1: float | None
    type2: float | None
    mean_stat: float
    mean_runtime_ms: float
    seed: int


@dataclass
class ErrorReport:
    rows: list[ReportRow]

    def write_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(CSV_COLUMNS)
            for row in self.rows:
                writer.writerow(
                    [
                        row.experiment_id,
                        row.case,
                        row.model,
                        repr(row.model_param),
                        "" if row.beta_d is None else repr(row.beta_d),
                        row.n,
                        "" if row.steps is None else row.steps,
                        row.trials,
                        "" if row.type1 is None else repr(row.type1),
                        "" if row.type2 is None else repr(row.type2),
                        repr(row.mean_stat),
                        repr(row.mean_runtime_ms),
                        row.seed,
                    ]
                )

    @classmethod
    def read_csv(cls, path) -> "ErrorReport":
        rows = []
        with open(path, "r", encoding="utf-8", newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            if header != CSV_COLUMNS:
                raise BadParamsError(f"{path}: unexpected CSV header {header}")
            for rec in reader:
                if not rec:
                    continue
                rows.append(
                    ReportRow(
                        experiment_id=rec[0],
                        case=int(rec[1]),
                        model=rec[2],
                        model_param=float(rec[3]),
                        beta_d=None if rec[4] == "" else float(rec[4]),
                        n=int(rec[5]),
                        steps=None if rec[6] == "" else int(rec[6]),
                        trials=int(rec[7]),
                        type1=None if rec[8] == "" else float(rec[8]),
                        type2=None if rec[9] == "" else float(rec[9]),
                        mean_stat=float(rec[10]),
                        mean_runtime_ms=float(rec[11]),
                        seed=int(rec[12]),
                    )
                )
        return cls(rows)


def _row_key(row: ReportRow):
    return (
        row.experiment_id,
        row.case,
        row.model,
        row.model_param,
        -1.0 if row.beta_d is None else row.beta_d,
        row.n,
        -1 if row.steps is None else row.steps,
    )


def case_spec(
    case: int,
    method: str = RFF,
    marginal_features: int = 20,
    conditional_features: int = 50,
) -> MarginalSpec | ConditionalSpec:
    """The hypothesis each dependence case is tested with."""
    rel_x = VariableRef("X", relational=True)
    x = VariableRef("X")
    y = VariableRef("Y")
    z = VariableRef("Z")
    rel_z = VariableRef("Z", relational=True)
    mf = RFFConfig(marginal_features)
    cf = RFFConfig(conditional_features)
    if case == 1:
        return MarginalSpec(rel_x, y, method=method, rff_lhs=mf, rff_rhs=mf)
    if case == 2:
        return ConditionalSpec(rel_x, y, z, method=method, rff_x=cf, rff_y=cf, rff_z=cf)
    if case == 3:
        return ConditionalSpec(x, y, rel_z, method=method, rff_x=cf, rff_y=cf, rff_z=cf)
    if case == 4:
        return ConditionalSpec(rel_x, y, z, method=method, rff_x=cf, rff_y=cf, rff_z=cf)
    raise BadParamsError(f"case must be 1..4, got {case}")


@dataclass(frozen=True)
class _ErrorTrialArgs:
    trial_seed: int
    graph_cfg: GraphGenConfig
    case: int
    hypothesis: str
    beta_d: float
    beta_c: float
    noise_sd: float
    noise_mode: str
    method: str
    marginal_features: int
    conditional_features: int
    num_permutations: int
    alpha: float


def _error_trial(args: _ErrorTrialArgs) -> TrialRecord:
    g = generate_graph(dataclasses.replace(args.graph_cfg, seed=seed_for(args.trial_seed, "graph")))
    noise_sd = args.noise_sd
    if args.noise_mode == "varied":
        noise_sd = draw_noise_sd(rng_for(args.trial_seed, "noise"))
    gen_cfg = GenConfig(
        case=args.case,
        hypothesis=args.hypothesis,
        beta_d=args.beta_d,
        beta_c=args.beta_c,
        noise_sd=noise_sd,
        seed=seed_for(args.trial_seed, "attrs"),
    )
    table = gen_table(g, gen_cfg)
    spec = case_spec(args.case, args.method, args.marginal_features, args.conditional_features)
    start = time.perf_counter()
    result = run_test(
        g,
        table,
        spec,
        num_permutations=args.num_permutations,
        alpha=args.alpha,
        seed=seed_for(args.trial_seed, "test"),
    )
    elapsed_ms = (time.perf_counter() - start) * 1000.0
    return TrialRecord(args.hypothesis, result.reject, result.statistic, elapsed_ms)


def _map_trials(fn, tasks, workers: int):
    if workers <= 1 or len(tasks) < 2:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        chunk = max(1, len(tasks) // (4 * workers))
        return list(pool.map(fn, tasks, chunksize=chunk))


def _aggregate(records: Sequence[TrialRecord], trials: int, want_null: bool, want_alt: bool):
    nulls = [r for r in records if r.hypothesis == NULL]
    alts = [r for r in records if r.hypothesis == ALTERNATE]
    if want_null and len(nulls) != trials:
        raise AssertionError(f"expected {trials} null trials, saw {len(nulls)}")
    if want_alt and len(alts) != trials:
        raise AssertionError(f"expected {trials} alternate trials, saw {len(alts)}")
    type1 = sum(r.reject for r in nulls) / trials if want_null else None
    type2 = sum(not r.reject for r in alts) / trials if want_alt else None
    mean_stat = float(np.mean([r.statistic for r in records]))
    mean_runtime = float(np.mean([r.runtime_ms for r in records]))
    return type1, type2, mean_stat, mean_runtime


def run_error_cells(
    experiment_id: str,
    grid: ExperimentGrid,
    cells: Sequence[tuple[int, GraphGenConfig, float]],
) -> ErrorReport:
    """Run null and alternate trials for every (case, graph, beta) cell."""
    rows = []
    for case, gcfg, beta_d in cells:
        cell_key = f"{experiment_id}/case{case}/{gcfg.model}/{gcfg.model_param!r}/n{gcfg.n}/beta{beta_d!r}"
        cell_seed = seed_for(grid.master_seed, cell_key)
        tasks = []
        for hypothesis in (NULL, ALTERNATE):
            for t in range(grid.trials):
                tasks.append(
                    _ErrorTrialArgs(
                        trial_seed=seed_for(cell_seed, hypothesis, t),
                        graph_cfg=gcfg,
                        case=case,
                        hypothesis=hypothesis,
                        beta_d=beta_d,
                        beta_c=grid.beta_c,
                        noise_sd=grid.noise_sd,
                        noise_mode=grid.noise_mode,
                        method=grid.method,
                        marginal_features=grid.marginal_features,
                        conditional_features=grid.conditional_features,
                        num_permutations=grid.num_permutations,
                        alpha=grid.alpha,
                    )
                )
        records = _map_trials(_error_trial, tasks, grid.workers)
        type1, type2, mean_stat, mean_runtime = _aggregate(
            records, grid.trials, want_null=True, want_alt=True
        )
        rows.append(
            ReportRow(
                experiment_id=experiment_id,
                case=case,
                model=gcfg.model,
                model_param=gcfg.model_param,
                beta_d=beta_d,
                n=gcfg.n,
                steps=None,
                trials=grid.trials,
                type1=type1,
                type2=type2,
                mean_stat=mean_stat,
                mean_runtime_ms=mean_runtime,
                seed=cell_seed,
            )
        )
    rows.sort(key=_row_key)
    return ErrorReport(rows)


def run_dependence_sensitivity(grid: ExperimentGrid) -> ErrorReport:
    """Error rates as the dependence coefficient sweeps ``grid.beta_grid``."""
    cells = [
        (case, gcfg, beta)
        for case in grid.cases
        for gcfg in grid.graph_configs
        for beta in grid.beta_grid
    ]
    return run_error_cells("dependence", grid, cells)


def run_network_sensitivity(grid: ExperimentGrid) -> ErrorReport:
    """Error rates across network parameters at a fixed dependence level."""
    cells = [
        (case, gcfg, grid.network_beta_d)
        for case in grid.cases
        for gcfg in grid.graph_configs
    ]
    return run_error_cells("network", grid, cells)


@dataclass(frozen=True)
class _DiffusionTrialArgs:
    trial_seed: int
    base_graph: Graph
    p_init: float
    steps: int
    sample_size: int
    marginal_features: int
    num_permutations: int
    alpha: float


def _diffusion_trial(args: _DiffusionTrialArgs) -> TrialRecord:
    g = args.base_graph
    table = diffuse_linear_threshold(
        g, DiffusionConfig(steps=args.steps, p_init=args.p_init, seed=seed_for(args.trial_seed, "diffusion"))
    )
    rng = rng_for(args.trial_seed, "sample")
    if args.sample_size < g.n:
        idx = np.sort(rng.choice(g.n, size=args.sample_size, replace=False))
    else:
        idx = np.arange(g.n)
    sub = induced_subgraph(g, idx, rng_for(args.trial_seed, "repair"))
    sub_table = AttributeTable({k: v[idx] for k, v in table.columns.items()}, idx.size)
    spec = case_spec(1, RFF, args.marginal_features)
    start = time.perf_counter()
    result = run_test(
        sub,
        sub_table,
        spec,
        num_permutations=args.num_permutations,
        alpha=args.alpha,
        seed=seed_for(args.trial_seed, "test"),
    )
    elapsed_ms = (time.perf_counter() - start) * 1000.0
    return TrialRecord(ALTERNATE, result.reject, result.statistic, elapsed_ms)


def run_diffusion_study(
    base_graph: Graph,
    p_init: float,
    steps_grid: Sequence[int],
    sample_sizes: Sequence[int],
    trials: int,
    num_permutations: int = 1000,
    alpha: float = 0.05,
    marginal_features: int = 20,
    master_seed: int = 0,
    workers: int = 1,
    model: str = "er",
    model_param: float = 0.0,
) -> ErrorReport:
    """Type II error of the marginal test on diffusion data, per diffusion
    step count and per test sample size (an induced subgraph on a uniform
    node sample, isolated nodes repaired)."""
    if trials < 1:
        raise BadParamsError(f"trials must be >= 1, got {trials}")
    rows = []
    for steps in steps_grid:
        for size in sample_sizes:
            if size < 2 or size > base_graph.n:
                raise BadParamsError(f"sample size {size} not in [2, {base_graph.n}]")
            cell_key = f"diffusion/steps{steps}/size{size}/p{p_init!r}"
            cell_seed = seed_for(master_seed, cell_key)
            tasks = [
                _DiffusionTrialArgs(
                    trial_seed=seed_for(cell_seed, t),
                    base_graph=base_graph,
                    p_init=p_init,
                    steps=steps,
                    sample_size=size,
                    marginal_features=marginal_features,
                    num_permutations=num_permutations,
                    alpha=alpha,
                )
                for t in range(trials)
            ]
            records = _map_trials(_diffusion_trial, tasks, workers)
            _, type2, mean_stat, mean_runtime = _aggregate(
                records, trials, want_null=False, want_alt=True
            )
            rows.append(
                ReportRow(
                    experiment_id="diffusion",
                    case=1,
                    model=model,
                    model_param=model_param,
                    beta_d=None,
                    n=size,
                    steps=steps,
                    trials=trials,
                    type1=None,
                    type2=type2,
                    mean_stat=mean_stat,
                    mean_runtime_ms=mean_runtime,
                    seed=cell_seed,
                )
            )
    rows.sort(key=_row_key)
    return ErrorReport(rows)


@dataclass(frozen=True)
class _ScalabilityTrialArgs:
    trial_seed: int
    n: int
    er_p: float
    kind: str  # "marginal" | "conditional"
    method: str
    beta_d: float
    marginal_features: int
    conditional_features: int
    num_permutations: int
    alpha: float


def _scalability_trial(args: _ScalabilityTrialArgs) -> TrialRecord:
    gcfg = GraphGenConfig("er", args.n, er_p=args.er_p, seed=seed_for(args.trial_seed, "graph"))
    g = generate_graph(gcfg)
    case = 1 if args.kind == "marginal" else 3
    table = gen_table(
        g,
        GenConfig(
            case=case,
            hypothesis=ALTERNATE,
            beta_d=args.beta_d,
            seed=seed_for(args.trial_seed, "attrs"),
        ),
    )
    spec = case_spec(case, args.method, args.marginal_features, args.conditional_features)
    start = time.perf_counter()
    result = run_test(
        g,
        table,
        spec,
        num_permutations=args.num_permutations,
        alpha=args.alpha,
        seed=seed_for(args.trial_seed, "test"),
    )
    elapsed_ms = (time.perf_counter() - start) * 1000.0
    return TrialRecord(ALTERNATE, result.reject, result.statistic, elapsed_ms)


def run_scalability(
    sizes: Sequence[int],
    methods: Sequence[str] = ("exact", "rff"),
    kinds: Sequence[str] = ("marginal", "conditional"),
    rff_extra_sizes: Sequence[int] = (),
    er_p: float = 0.02,
    beta_d: float = 0.5,
    trials: int = 3,
    num_permutations: int = 1000,
    alpha: float = 0.05,
    marginal_features: int = 20,
    conditional_features: int = 50,
    master_seed: int = 0,
    workers: int = 1,
) -> ErrorReport:
    """Wall-clock timing per (size, test kind, method). Timing covers the
    whole test (kernel or feature construction plus every permutation
    replicate) but not graph or attribute generation."""
    if list(sizes) != sorted(sizes):
        raise BadParamsError("sizes must be ascending")
    rows = []
    for method in methods:
        method_sizes = list(sizes) + (list(rff_extra_sizes) if method == RFF else [])
        for kind in kinds:
            for n in method_sizes:
                cell_key = f"scalability/{kind}/{method}/n{n}"
                cell_seed = seed_for(master_seed, cell_key)
                tasks = [
                    _ScalabilityTrialArgs(
                        trial_seed=seed_for(cell_seed, t),
                        n=n,
                        er_p=er_p,
                        kind=kind,
                        method=method,
                        beta_d=beta_d,
                        marginal_features=marginal_features,
                        conditional_features=conditional_features,
                        num_permutations=num_permutations,
                        alpha=alpha,
                    )
                    for t in range(trials)
                ]
                records = _map_trials(_scalability_trial, tasks, workers)
                mean_stat = float(np.mean([r.statistic for r in records]))
                mean_runtime = float(np.mean([r.runtime_ms for r in records]))
                rows.append(
                    ReportRow(
                        experiment_id=f"scalability_{kind}_{method}",
                        case=1 if kind == "marginal" else 3,
                        model="er",
                        model_param=er_p,
                        beta_d=beta_d,
                        n=n,
                        steps=None,
                        trials=trials,
                        type1=None,
                        type2=None,
                        mean_stat=mean_stat,
                        mean_runtime_ms=mean_runtime,
                        seed=cell_seed,
                    )
                )
    rows.sort(key=_row_key)
    return ErrorReport(rows)
