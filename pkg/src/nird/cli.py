"""Command-line interface: run tests on edge-list + attribute-CSV data,
generate synthetic data, simulate diffusion, and drive the benchmark
studies.

Hypothesis strings use ``_||_`` for independence, ``rel(NAME)`` for the
1-hop neighborhood aggregation of an attribute, and ``|`` to introduce a
conditioning variable, e.g. ``rel(S0) _||_ S1 | S0``.
"""

from __future__ import annotations

import argparse
import json
import os
import re
import sys

from . import bench
from .attrgen import (
    ALTERNATE,
    NULL,
    DiffusionConfig,
    GenConfig,
    diffuse_linear_threshold,
    gen_table,
    read_attribute_csv,
    write_attribute_csv,
)
from .conditional import ConditionalSpec
from .errors import ConfigError, HypothesisParseError, NirdError
from .marginal import EXACT, RFF, MarginalSpec, VariableRef
from .nullperm import TestResult, run_test
from .relgraph import (
    GraphGenConfig,
    generate_graph,
    read_edge_list,
    write_edge_list,
)
from .rff import RFFConfig

STUDIES = ("dependence", "network", "diffusion", "scalability")

_NAME = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")


def _skip_ws(text: str, pos: int) -> int:
    while pos < len(text) and text[pos].isspace():
        pos += 1
    return pos


def _parse_term(text: str, pos: int) -> tuple[VariableRef, int]:
    pos = _skip_ws(text, pos)
    m = _NAME.match(text, pos)
    if not m:
        raise HypothesisParseError("expected a variable name", pos + 1)
    name, pos = m.group(), m.end()
    if name == "rel":
        pos = _skip_ws(text, pos)
        if pos >= len(text) or text[pos] != "(":
            raise HypothesisParseError("expected '(' after rel", pos + 1)
        pos = _skip_ws(text, pos + 1)
        inner = _NAME.match(text, pos)
        if not inner:
            raise HypothesisParseError("expected a column name inside rel()", pos + 1)
        pos = _skip_ws(text, inner.end())
        if pos >= len(text) or text[pos] != ")":
            raise HypothesisParseError("expected ')' to close rel(", pos + 1)
        return VariableRef(inner.group(), relational=True), pos + 1
    return VariableRef(name), pos


def parse_hypothesis(text: str) -> tuple[VariableRef, VariableRef, VariableRef | None]:
    """Parse ``TERM _||_ TERM [| TERM]`` with ``TERM = NAME | rel(NAME)``."""
    lhs, pos = _parse_term(text, 0)
    pos = _skip_ws(text, pos)
    if not text.startswith("_||_", pos):
        raise HypothesisParseError("expected '_||_'", pos + 1)
    rhs, pos = _parse_term(text, pos + 4)
    pos = _skip_ws(text, pos)
    cond = None
    if pos < len(text) and text[pos] == "|":
        cond, pos = _parse_term(text, pos + 1)
        pos = _skip_ws(text, pos)
    if pos != len(text):
        raise HypothesisParseError(f"unexpected trailing input {text[pos:]!r}", pos + 1)
    return lhs, rhs, cond


def build_spec(
    text: str,
    method: str = RFF,
    marginal_features: int = 20,
    conditional_features: int = 50,
    ridge_lambda: float | None = None,
) -> MarginalSpec | ConditionalSpec:
    lhs, rhs, cond = parse_hypothesis(text)
    if cond is None:
        cfg = RFFConfig(marginal_features)
        return MarginalSpec(lhs, rhs, method=method, rff_lhs=cfg, rff_rhs=cfg)
    cfg = RFFConfig(conditional_features)
    return ConditionalSpec(
        lhs, rhs, cond, ridge_lambda=ridge_lambda, method=method, rff_x=cfg, rff_y=cfg, rff_z=cfg
    )


def _result_json(result: TestResult, spec, extra: dict) -> str:
    payload = {
        "hypothesis": result.hypothesis,
        "statistic": result.statistic,
        "p_value": result.p_value,
        "reject": result.reject,
        "num_permutations": result.num_permutations,
        "alpha": result.alpha,
        "method": result.method,
        "seed": result.seed,
    }
    if isinstance(spec, ConditionalSpec):
        payload["ridge_lambda"] = spec.ridge_lambda
    payload.update(extra)
    return json.dumps(payload, indent=2) + "\n"


def _cmd_test(args) -> int:
    g = read_edge_list(args.edges, n=args.nodes)
    table = read_attribute_csv(args.attrs)
    if table.n != g.n:
        raise ConfigError(f"attribute rows ({table.n}) do not match node count ({g.n})")
    spec = build_spec(
        args.hypothesis,
        method=args.method,
        marginal_features=args.marginal_features,
        conditional_features=args.conditional_features,
        ridge_lambda=args.ridge_lambda,
    )
    result = run_test(
        g, table, spec, num_permutations=args.permutations, alpha=args.alpha, seed=args.seed
    )
    text = _result_json(
        result,
        spec,
        {
            "n": g.n,
            "num_edges": g.num_edges(),
            "marginal_features": args.marginal_features,
            "conditional_features": args.conditional_features,
        },
    )
    sys.stdout.write(text)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    return 0


def _graph_config_from_args(args) -> GraphGenConfig:
    return GraphGenConfig(
        model=args.model, n=args.nodes, ba_m=args.ba_m, er_p=args.er_p, seed=args.seed
    )


def _cmd_generate(args) -> int:
    gcfg = _graph_config_from_args(args)
    g = generate_graph(gcfg)
    gen_cfg = GenConfig(
        case=args.case,
        hypothesis=args.hypothesis,
        beta_d=args.beta_d,
        beta_c=args.beta_c,
        noise_sd=args.noise_sd,
        seed=args.seed,
    )
    table = gen_table(g, gen_cfg)
    write_edge_list(g, args.out_edges)
    write_attribute_csv(table, args.out_attrs)
    print(f"wrote {args.out_edges} ({g.num_edges()} edges) and {args.out_attrs} (n={g.n})")
    return 0


def _cmd_diffuse(args) -> int:
    if args.edges:
        g = read_edge_list(args.edges, n=args.nodes)
    else:
        g = generate_graph(_graph_config_from_args(args))
    table = diffuse_linear_threshold(
        g, DiffusionConfig(steps=args.steps, p_init=args.p_init, seed=args.seed)
    )
    write_attribute_csv(table, args.out_attrs)
    if args.out_edges:
        write_edge_list(g, args.out_edges)
    active = float(table["X"].mean())
    print(f"wrote {args.out_attrs} (n={g.n}, steps={args.steps}, active fraction {active:.3f})")
    return 0


_LIST_KEYS = {
    "cases": int,
    "models": str,
    "beta_d": float,
    "ba_m_grid": int,
    "er_p_grid": float,
    "steps": int,
    "sample_sizes": int,
    "sizes": int,
    "rff_sizes": int,
}
_SCALAR_KEYS = {
    "study": str,
    "n": int,
    "ba_m": int,
    "er_p": float,
    "trials": int,
    "permutations": int,
    "alpha": float,
    "method": str,
    "marginal_features": int,
    "conditional_features": int,
    "noise": str,
    "seed": int,
    "network_beta_d": float,
    "diffusion_n": int,
    "diffusion_er_p": float,
    "p_init": float,
    "diffusion_trials": int,
    "edges_file": str,
    "scalability_trials": int,
}

_DEFAULT_CONFIG = {
    "study": "dependence",
    "cases": [1, 2],
    "models": ["ba", "er"],
    "n": 100,
    "ba_m": 3,
    "er_p": 0.02,
    "beta_d": [0.1, 0.5, 0.9],
    "trials": 50,
    "permutations": 1000,
    "alpha": 0.05,
    "method": RFF,
    "marginal_features": 20,
    "conditional_features": 50,
    "noise": "fixed",
    "seed": 1,
    "ba_m_grid": [1, 2, 3],
    "er_p_grid": [0.005, 0.015, 0.025],
    "network_beta_d": 0.5,
    "diffusion_n": 4000,
    "diffusion_er_p": 0.01,
    "p_init": 0.1,
    "steps": [1, 5, 20],
    "sample_sizes": [1000, 2000],
    "diffusion_trials": 20,
    "edges_file": "",
    "sizes": [100, 200, 300, 400, 500],
    "rff_sizes": [2000, 10000],
    "scalability_trials": 3,
}

_PAPER_SCALE = {
    "trials": 100,
    "beta_d": [0.1, 0.3, 0.5, 0.7, 0.9],
    "ba_m_grid": [1, 2, 3],
    "er_p_grid": [0.005, 0.01, 0.015, 0.02, 0.025],
    "steps": [1, 5, 10, 20],
    "sample_sizes": [500, 1000, 2000, 4000],
    "diffusion_trials": 50,
    "scalability_trials": 5,
}


def parse_bench_config(text: str, paper_scale: bool = False) -> dict:
    """Parse the key=value benchmark config format; '#' starts a comment."""
    cfg = dict(_DEFAULT_CONFIG)
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        try:
            if key in _LIST_KEYS:
                conv = _LIST_KEYS[key]
                cfg[key] = [conv(v.strip()) for v in value.split(",") if v.strip()]
            elif key in _SCALAR_KEYS:
                cfg[key] = _SCALAR_KEYS[key](value)
            else:
                raise ConfigError(f"line {lineno}: unknown key {key!r}")
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"line {lineno}: bad value for {key!r}: {value!r}") from exc
    if paper_scale:
        cfg.update(_PAPER_SCALE)
    if cfg["study"] not in STUDIES:
        raise ConfigError(
            f"unknown study {cfg['study']!r}; valid studies: {', '.join(STUDIES)}"
        )
    return cfg


def _grid_from_config(cfg: dict, workers: int, graph_configs) -> bench.ExperimentGrid:
    return bench.ExperimentGrid(
        graph_configs=tuple(graph_configs),
        cases=tuple(cfg["cases"]),
        beta_grid=tuple(cfg["beta_d"]),
        trials=cfg["trials"],
        num_permutations=cfg["permutations"],
        alpha=cfg["alpha"],
        method=cfg["method"],
        marginal_features=cfg["marginal_features"],
        conditional_features=cfg["conditional_features"],
        noise_mode=cfg["noise"],
        network_beta_d=cfg["network_beta_d"],
        master_seed=cfg["seed"],
        workers=workers,
    )


def run_study(cfg: dict, workers: int = 1) -> bench.ErrorReport:
    study = cfg["study"]
    if study == "dependence":
        graph_configs = []
        for model in cfg["models"]:
            graph_configs.append(
                GraphGenConfig(model, cfg["n"], ba_m=cfg["ba_m"], er_p=cfg["er_p"])
            )
        grid = _grid_from_config(cfg, workers, graph_configs)
        return bench.run_dependence_sensitivity(grid)
    if study == "network":
        graph_configs = []
        if "ba" in cfg["models"]:
            graph_configs += [GraphGenConfig("ba", cfg["n"], ba_m=m) for m in cfg["ba_m_grid"]]
        if "er" in cfg["models"]:
            graph_configs += [GraphGenConfig("er", cfg["n"], er_p=p) for p in cfg["er_p_grid"]]
        grid = _grid_from_config(cfg, workers, graph_configs)
        return bench.run_network_sensitivity(grid)
    if study == "diffusion":
        if cfg["edges_file"]:
            base = read_edge_list(cfg["edges_file"])
            model, param = "file", 0.0
        else:
            base = generate_graph(
                GraphGenConfig("er", cfg["diffusion_n"], er_p=cfg["diffusion_er_p"], seed=cfg["seed"])
            )
            model, param = "er", cfg["diffusion_er_p"]
        return bench.run_diffusion_study(
            base,
            p_init=cfg["p_init"],
            steps_grid=cfg["steps"],
            sample_sizes=cfg["sample_sizes"],
            trials=cfg["diffusion_trials"],
            num_permutations=cfg["permutations"],
            alpha=cfg["alpha"],
            marginal_features=cfg["marginal_features"],
            master_seed=cfg["seed"],
            workers=workers,
            model=model,
            model_param=param,
        )
    if study == "scalability":
        return bench.run_scalability(
            sizes=cfg["sizes"],
            rff_extra_sizes=cfg["rff_sizes"],
            er_p=cfg["er_p"],
            trials=cfg["scalability_trials"],
            num_permutations=cfg["permutations"],
            alpha=cfg["alpha"],
            marginal_features=cfg["marginal_features"],
            conditional_features=cfg["conditional_features"],
            master_seed=cfg["seed"],
            workers=workers,
        )
    raise ConfigError(f"unknown study {study!r}; valid studies: {', '.join(STUDIES)}")


def _cmd_bench(args) -> int:
    with open(args.config, "r", encoding="utf-8") as fh:
        cfg = parse_bench_config(fh.read(), paper_scale=args.paper_scale)
    if args.study:
        cfg["study"] = args.study
        if cfg["study"] not in STUDIES:
            raise ConfigError(
                f"unknown study {cfg['study']!r}; valid studies: {', '.join(STUDIES)}"
            )
    if args.seed is not None:
        cfg["seed"] = args.seed
    report = run_study(cfg, workers=args.threads)
    report.write_csv(args.out)
    print(f"study={cfg['study']} rows={len(report.rows)} -> {args.out}")
    for row in report.rows:
        bits = [f"{row.experiment_id} case={row.case} {row.model}({row.model_param:g}) n={row.n}"]
        if row.beta_d is not None:
            bits.append(f"beta_d={row.beta_d:g}")
        if row.steps is not None:
            bits.append(f"steps={row.steps}")
        if row.type1 is not None:
            bits.append(f"type1={row.type1:.3f}")
        if row.type2 is not None:
            bits.append(f"type2={row.type2:.3f}")
        bits.append(f"mean_ms={row.mean_runtime_ms:.1f}")
        print("  " + " ".join(bits))
    return 0


def _default_threads() -> int:
    env = os.environ.get("NIRD_THREADS", "")
    if env.strip():
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError(f"NIRD_THREADS must be an integer, got {env!r}") from None
    return 1


def _add_graph_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--model", choices=["ba", "er"], default="er", help="graph model")
    parser.add_argument("--nodes", type=int, default=100, help="node count")
    parser.add_argument("--ba-m", type=int, default=3, help="attachment count for the ba model")
    parser.add_argument("--er-p", type=float, default=0.02, help="edge probability for the er model")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nird",
        description="Kernel independence tests between neighborhood-aggregated and per-node variables.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_test = sub.add_parser("test", help="run one hypothesis test on files")
    p_test.add_argument("--edges", required=True, help="edge-list file")
    p_test.add_argument("--attrs", required=True, help="attribute CSV")
    p_test.add_argument("--hypothesis", required=True, help="e.g. 'rel(S0) _||_ S1 | S0'")
    p_test.add_argument("--nodes", type=int, default=None, help="override inferred node count")
    p_test.add_argument("--method", choices=[EXACT, RFF], default=RFF)
    p_test.add_argument("--marginal-features", type=int, default=20)
    p_test.add_argument("--conditional-features", type=int, default=50)
    p_test.add_argument("--ridge-lambda", type=float, default=None)
    p_test.add_argument("--permutations", type=int, default=1000)
    p_test.add_argument("--alpha", type=float, default=0.05)
    p_test.add_argument("--seed", type=int, default=0)
    p_test.add_argument("--out", default=None, help="also write the JSON result here")
    p_test.set_defaults(func=_cmd_test)

    p_gen = sub.add_parser("generate", help="write a synthetic graph and attribute table")
    _add_graph_flags(p_gen)
    p_gen.add_argument("--case", type=int, choices=[1, 2, 3, 4], required=True)
    p_gen.add_argument("--hypothesis", choices=[NULL, ALTERNATE], default=ALTERNATE)
    p_gen.add_argument("--beta-d", type=float, default=0.5)
    p_gen.add_argument("--beta-c", type=float, default=1.0)
    p_gen.add_argument("--noise-sd", type=float, default=1.0)
    p_gen.add_argument("--seed", type=int, default=0)
    p_gen.add_argument("--out-edges", required=True)
    p_gen.add_argument("--out-attrs", required=True)
    p_gen.set_defaults(func=_cmd_generate)

    p_diff = sub.add_parser("diffuse", help="simulate linear-threshold diffusion")
    p_diff.add_argument("--edges", default=None, help="edge-list file (else a generated graph)")
    _add_graph_flags(p_diff)
    p_diff.add_argument("--steps", type=int, required=True)
    p_diff.add_argument("--p-init", type=float, default=0.1)
    p_diff.add_argument("--seed", type=int, default=0)
    p_diff.add_argument("--out-attrs", required=True)
    p_diff.add_argument("--out-edges", default=None, help="also write the graph used")
    p_diff.set_defaults(func=_cmd_diffuse)

    p_bench = sub.add_parser("bench", help="run a benchmark study from a config file")
    p_bench.add_argument("--config", required=True, help="key=value config file")
    p_bench.add_argument("--out", required=True, help="output CSV path")
    p_bench.add_argument("--study", choices=STUDIES, default=None, help="override the config's study")
    p_bench.add_argument("--paper-scale", action="store_true", help="expand grids to full scale")
    p_bench.add_argument("--seed", type=int, default=None, help="override the config's seed")
    p_bench.add_argument("--threads", type=int, default=None, help="worker processes (env NIRD_THREADS)")
    p_bench.set_defaults(func=_cmd_bench)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "threads", None) is None and args.command == "bench":
        args.threads = _default_threads()
    try:
        return args.func(args)
    except NirdError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
