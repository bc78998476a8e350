"""Command-line interface.

Subcommands: benchmark, mi, graph, qfeatures, train, eval, export-qasm.
Every flag mirrors a PipelineConfig field; values resolve as
defaults < --config file < command-line flags.  Thread count resolves as
--threads flag, else DQFE_THREADS, else available cores; results never
depend on it.  Exit code 0 on success, 2 on a stage failure (with a
stage-tagged message on stderr).
"""

from __future__ import annotations

import argparse
import sys

from .pipeline import (
    STAGES,
    PipelineConfig,
    StageError,
    build_config,
    parse_config_file,
    run_benchmark,
    stage_eval,
    stage_export_qasm,
    stage_mi,
    stage_qfeatures,
    stage_train,
)


def _add_config_flags(p: argparse.ArgumentParser, need_kind: bool = False) -> None:
    p.add_argument("--config", help="key = value config file")
    p.add_argument("--dataset", help="input feature-table CSV")
    p.add_argument("--out-dir", dest="out_dir", help="artifact directory")
    p.add_argument("--label-column", dest="label_column")
    p.add_argument("--scaling", choices=("minmax_symmetric", "zscore", "none"))
    p.add_argument("--mi-bins", dest="mi_bins", type=int)
    p.add_argument("--topology", choices=("chain", "all_pairs"))
    p.add_argument("--restarts", type=int)
    p.add_argument("--theta", type=float)
    p.add_argument("--lambda-eval", dest="lambda_eval", type=float)
    p.add_argument("--shots", type=int)
    p.add_argument("--mode", choices=("exact", "sampled"))
    p.add_argument("--pair-scope", dest="pair_scope", choices=("edges", "all_pairs"))
    p.add_argument("--transverse-sign", dest="transverse_sign", choices=("plus", "minus"))
    p.add_argument("--rf-grid", dest="rf_grid", help="semicolon-separated key=value grid entries")
    p.add_argument("--folds", type=int)
    p.add_argument("--repetitions", type=int)
    p.add_argument("--eval-seeds", dest="eval_seeds", help="comma-separated seeds")
    p.add_argument("--seed", type=int)
    p.add_argument("--threads", type=int)
    p.add_argument("--max-qubits", dest="max_qubits", type=int)
    p.add_argument("--dump-counts", dest="dump_counts", action="store_const", const=True)
    if need_kind:
        p.add_argument(
            "--kind", required=True, choices=("classical", "quantum", "hybrid")
        )


def _config_from_args(args: argparse.Namespace) -> PipelineConfig:
    file_values = parse_config_file(args.config) if args.config else None
    overrides = {
        k: getattr(args, k)
        for k in (
            "dataset",
            "out_dir",
            "label_column",
            "scaling",
            "mi_bins",
            "topology",
            "restarts",
            "theta",
            "lambda_eval",
            "shots",
            "mode",
            "pair_scope",
            "transverse_sign",
            "rf_grid",
            "folds",
            "repetitions",
            "eval_seeds",
            "seed",
            "threads",
            "max_qubits",
            "dump_counts",
        )
        if getattr(args, k, None) is not None
    }
    return build_config(file_values, **overrides)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dqfe",
        description="Quantum quench feature extraction and classification benchmark",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("benchmark", help="run the full three-way benchmark")
    _add_config_flags(p)

    p = sub.add_parser("mi", help="scale the dataset and compute the MI matrix")
    _add_config_flags(p)

    p = sub.add_parser("graph", help="build the interaction graph from the MI matrix")
    _add_config_flags(p)

    p = sub.add_parser("qfeatures", help="extract quantum features")
    _add_config_flags(p)
    p.add_argument(
        "--from-counts",
        dest="from_counts",
        help="directory of per-sample ShotCounts JSON to replay instead of simulating",
    )

    p = sub.add_parser("train", help="grid-search a feature set")
    _add_config_flags(p, need_kind=True)

    p = sub.add_parser("eval", help="multi-seed evaluation of a feature set")
    _add_config_flags(p, need_kind=True)

    p = sub.add_parser("export-qasm", help="write one OpenQASM file per sample")
    _add_config_flags(p)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    log = lambda msg: print(f"dqfe: {msg}", file=sys.stderr)  # noqa: E731
    try:
        cfg = _config_from_args(args)
    except (ValueError, OSError) as exc:
        print(f"dqfe: [config] {exc}", file=sys.stderr)
        return 2
    try:
        if args.command == "benchmark":
            report = run_benchmark(cfg, log=log)
            _print_table(report)
        elif args.command == "mi":
            stage_mi(cfg)
            log("stage mi complete")
        elif args.command == "graph":
            stage_graph_cmd(cfg, log)
        elif args.command == "qfeatures":
            stage_qfeatures(cfg, from_counts=getattr(args, "from_counts", None))
            log("stage qfeatures complete")
        elif args.command == "train":
            report = stage_train(cfg, args.kind)
            log(f"stage train[{args.kind}] complete (cv mean {report.mean:.4f})")
        elif args.command == "eval":
            metrics = stage_eval(cfg, args.kind)
            log(f"stage eval[{args.kind}] complete (accuracy {metrics['accuracy']:.4f})")
        elif args.command == "export-qasm":
            count = stage_export_qasm(cfg)
            log(f"stage export-qasm complete ({count} files)")
    except StageError as exc:
        print(f"dqfe: [{exc.stage}] {exc}", file=sys.stderr)
        return 2
    return 0


def stage_graph_cmd(cfg: PipelineConfig, log) -> None:
    from .pipeline import stage_graph

    graph = stage_graph(cfg)
    log(f"stage graph complete (total weight {graph.total_weight:.6f})")


def _print_table(report: dict) -> None:
    print(f"{'feature set':<12} {'columns':>8} {'accuracy':>10} {'std':>8}")
    for kind in ("classical", "quantum", "hybrid"):
        fs = report["feature_sets"][kind]
        print(
            f"{kind:<12} {fs['n_columns']:>8} "
            f"{100.0 * fs['accuracy_mean']:>9.1f}% {100.0 * fs['accuracy_std']:>7.1f}%"
        )


if __name__ == "__main__":
    sys.exit(main())
