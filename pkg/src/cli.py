"""
Command-line surface: `synth`, `dataset`, `linegraph` and `check`.

Experiment settings resolve in three layers, later layers winning:
preset, then the JSON file given with --config, then explicit flags.
"""

from __future__ import annotations

import argparse
import logging
from pathlib import Path
from typing import Any, Callable, Optional, Sequence

from src.app.bootstrap import configure_runtime, default_workers
from src.app.errors import run_with_error_handling
from src.exceptions import ConfigError
from src.schemas.config import ExperimentSpec, OperatorKind, PruneConfig, parse_variant
from src.schemas.presets import PRESETS, preset

logger = logging.getLogger(__name__)


def _csv_list(cast: Callable[[str], Any]) -> Callable[[str], list]:
    def parse(text: str) -> list:
        try:
            return [cast(token) for token in text.split(",") if token.strip()]
        except ValueError as exc:
            raise argparse.ArgumentTypeError(f"invalid list '{text}'") from exc

    return parse


def _add_experiment_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--preset", choices=sorted(PRESETS))
    parser.add_argument("--config", type=Path, help="JSON config, or a metrics.json from an earlier run")
    parser.add_argument("--m", type=int, help="line-graph order")
    parser.add_argument("--variant", help="level list such as 0, 1, 0-1, 0-1-2")
    parser.add_argument("--hierarchical", action="store_true", default=None)
    parser.add_argument("--alpha", type=float)
    parser.add_argument("--layers", type=int)
    parser.add_argument("--hidden-dim", type=int)
    parser.add_argument("--operator", choices=[kind.value for kind in OperatorKind])
    parser.add_argument("--topk", type=int)
    parser.add_argument("--prune", help="per-level degree caps d0,d1,...")
    parser.add_argument("--train-ratio", type=float)
    parser.add_argument("--epochs", type=int)
    parser.add_argument("--lr", type=float)
    parser.add_argument("--sinkhorn-iters", type=int)
    parser.add_argument("--tau", type=float)
    parser.add_argument("--features", choices=["degree", "random", "file"])
    parser.add_argument("--seed", type=int)
    parser.add_argument("--workers", type=int)
    parser.add_argument("--out", type=Path)
    parser.add_argument("--plot", action="store_true", default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hgmn", description="High-order graph matching benchmarks.")
    commands = parser.add_subparsers(dest="command", required=True)

    synth = commands.add_parser("synth", help="Erdős–Rényi source/target benchmark")
    _add_experiment_flags(synth)
    synth.add_argument("--nodes", type=int)
    synth.add_argument("--edge-p", type=float)
    synth.add_argument("--p-delete", type=float)
    synth.add_argument("--replicates", type=int)
    synth.add_argument(
        "--variants",
        type=_csv_list(str),
        help="compare several variants on the same pairs, e.g. 0,1,0-1,0-1-2",
    )
    synth.add_argument("--p-delete-sweep", type=_csv_list(float))
    synth.add_argument("--alpha-sweep", type=_csv_list(float))
    synth.add_argument("--layers-sweep", type=_csv_list(int))
    synth.add_argument("--topk-sweep", type=_csv_list(int))

    dataset = commands.add_parser("dataset", help="train and evaluate on edge-list files")
    _add_experiment_flags(dataset)
    dataset.add_argument("--source-edges", type=Path)
    dataset.add_argument("--target-edges", type=Path)
    dataset.add_argument("--anchors", type=Path)
    dataset.add_argument("--source-features", type=Path)
    dataset.add_argument("--target-features", type=Path)
    dataset.add_argument("--directed", action="store_true", default=None)
    dataset.add_argument("--hard-assignment", choices=["none", "greedy", "exact"])

    linegraph = commands.add_parser("linegraph", help="export an iterated line-graph stack")
    linegraph.add_argument("input", type=Path)
    linegraph.add_argument("--m", type=int, required=True)
    linegraph.add_argument("--prune")
    linegraph.add_argument("--directed", action="store_true")
    linegraph.add_argument("--seed", type=int, default=0)
    linegraph.add_argument("--out", type=Path, default=Path("results"))

    check = commands.add_parser("check", help="reachability oracle and gradient suite")
    check.add_argument("--graphs", type=int, default=50)
    check.add_argument("--max-nodes", type=int, default=30)
    check.add_argument("--p", type=float, default=0.3)
    check.add_argument("--orders", type=_csv_list(int), default=[1, 2])
    check.add_argument("--seed", type=int, default=0)
    check.add_argument("--graph", type=Path, help="check one edge-list file instead of random graphs")
    check.add_argument("--directed", action="store_true")
    check.add_argument("--skip-grad", action="store_true")
    return parser


def _merge(base: dict, override: dict) -> dict:
    merged = dict(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def _set(target: dict, path: str, value: Any) -> None:
    if value is None:
        return
    *parents, leaf = path.split(".")
    for key in parents:
        target = target.setdefault(key, {})
    target[leaf] = value


def _flag_overrides(args: argparse.Namespace) -> dict:
    flags: dict = {}
    get = lambda name: getattr(args, name, None)  # noqa: E731

    if get("variant") is not None:
        try:
            m, hierarchical = parse_variant(args.variant)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        _set(flags, "train.m", m)
        _set(flags, "train.hierarchical", hierarchical)
    _set(flags, "train.m", get("m"))
    _set(flags, "train.hierarchical", get("hierarchical"))
    _set(flags, "train.alpha", get("alpha"))
    _set(flags, "train.topk", get("topk"))
    _set(flags, "train.train_ratio", get("train_ratio"))
    _set(flags, "train.epochs", get("epochs"))
    _set(flags, "train.lr", get("lr"))
    _set(flags, "train.sinkhorn_iters", get("sinkhorn_iters"))
    _set(flags, "train.sinkhorn_tau", get("tau"))
    if get("prune") is not None:
        _set(flags, "train.prune.degrees", PruneConfig.parse(args.prune).degrees)
    _set(flags, "gnn.layers", get("layers"))
    _set(flags, "gnn.hidden_dim", get("hidden_dim"))
    _set(flags, "gnn.operator", get("operator"))
    _set(flags, "features.kind", get("features"))
    _set(flags, "seed", get("seed"))
    _set(flags, "workers", get("workers"))
    _set(flags, "output_dir", None if get("out") is None else str(args.out))
    _set(flags, "plot", get("plot"))
    _set(flags, "replicates", get("replicates"))
    _set(flags, "hard_assignment", get("hard_assignment"))

    _set(flags, "synthetic.num_nodes", get("nodes"))
    _set(flags, "synthetic.edge_probability", get("edge_p"))
    _set(flags, "synthetic.p_delete", get("p_delete"))
    _set(flags, "sweeps.p_delete", get("p_delete_sweep"))
    _set(flags, "sweeps.alpha", get("alpha_sweep"))
    _set(flags, "sweeps.layers", get("layers_sweep"))
    _set(flags, "sweeps.topk", get("topk_sweep"))
    _set(flags, "variants", get("variants"))

    for name in ("source_edges", "target_edges", "anchors", "source_features", "target_features"):
        value = get(name)
        _set(flags, f"dataset.{name}", None if value is None else str(value))
    _set(flags, "dataset.directed", get("directed"))
    return flags


def resolve_spec(args: argparse.Namespace, mode: str, load_json: Optional[Callable] = None) -> ExperimentSpec:
    """Combine preset, config file and flags into a validated ExperimentSpec.

    Raises:
        ConfigError: On an unusable config file or variant string.
        pydantic.ValidationError: If the combined settings violate a constraint.
    """
    resolved: dict = {"mode": mode}
    if getattr(args, "preset", None):
        gnn, train = preset(args.preset)
        resolved = _merge(resolved, {"gnn": gnn.model_dump(mode="json"), "train": train.model_dump(mode="json")})
    if getattr(args, "config", None) is not None:
        if load_json is None:
            from src.repositories import get_dataset_repository

            load_json = get_dataset_repository().load_json
        payload = load_json(args.config)
        # A metrics report carries its resolved spec under "config".
        if isinstance(payload.get("config"), dict) and "config_hash" in payload:
            payload = payload["config"]
        if payload.get("mode", mode) != mode:
            raise ConfigError(f"Config file describes a {payload['mode']} run, not {mode}.")
        resolved = _merge(resolved, payload)
    resolved = _merge(resolved, _flag_overrides(args))
    resolved.setdefault("workers", default_workers())
    if mode == "synthetic":
        resolved.setdefault("synthetic", {})
    return ExperimentSpec.model_validate(resolved)


def _print_metrics(report) -> None:
    p_at = report.p_at
    print(f"P@1={p_at[1]:.4f} P@10={p_at[10]:.4f} P@30={p_at[30]:.4f}")
    for row in report.summary:
        if row.sweep == "none" and len(report.summary) == 1:
            continue
        label = f"variant={row.variant}"
        if row.sweep != "none":
            point = "dense" if row.value is None else f"{row.value:g}"
            label = f"{row.sweep}={point} {label}"
        print(
            f"{label}: P@1 {row.p_at_1_mean:.4f} ± {row.p_at_1_std:.4f} ({row.replicates} replicates)"
        )
    if report.matching_accuracy is not None:
        print(f"matching accuracy={report.matching_accuracy:.4f}")


def cmd_synth(args: argparse.Namespace) -> None:
    from src.services import get_experiment_service, get_report_service

    spec = resolve_spec(args, "synthetic")
    report = get_experiment_service().run_synthetic(spec, get_report_service(spec.output_dir))
    _print_metrics(report)


def cmd_dataset(args: argparse.Namespace) -> None:
    from src.services import get_experiment_service, get_report_service

    spec = resolve_spec(args, "dataset")
    report = get_experiment_service().run_dataset(spec, get_report_service(spec.output_dir))
    _print_metrics(report)


def cmd_linegraph(args: argparse.Namespace) -> None:
    from src.services import get_linegraph_service

    prune = PruneConfig.parse(args.prune) if args.prune else None
    manifest = get_linegraph_service(args.out).export_from_file(
        args.input, args.m, directed=args.directed, prune=prune, seed=args.seed
    )
    for size in manifest.levels:
        status = "ok" if size.within_bound else "EXCEEDS BOUND"
        print(
            f"level {size.order}: {size.nodes} nodes, {size.edges} edges, "
            f"bound {size.size_bound:g} ({status})"
        )


def cmd_check(args: argparse.Namespace) -> None:
    from src.services import get_diagnostics_service

    service = get_diagnostics_service()
    report = service.run(
        graphs=args.graphs,
        max_nodes=args.max_nodes,
        p=args.p,
        orders=tuple(args.orders),
        seed=args.seed,
        graph_file=args.graph,
        directed=args.directed,
        grad=not args.skip_grad,
    )
    for note in report.notes:
        print(note)
    if report.lemma_total or not report.notes:
        print(f"lemma1: {report.lemma_passed}/{report.lemma_total} pass")
    if not args.skip_grad:
        print(f"grad: max rel err {report.grad_max_relative_error:.3e}")
        for failure in report.grad_failures:
            print(f"grad: FAILED {failure}")
    service.require_ok(report)


COMMANDS = {
    "synth": cmd_synth,
    "dataset": cmd_dataset,
    "linegraph": cmd_linegraph,
    "check": cmd_check,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_runtime()
    return run_with_error_handling(lambda: COMMANDS[args.command](args))
