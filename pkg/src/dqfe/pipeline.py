"""Pipeline configuration, stage execution, and the three-way benchmark.

The benchmark runs load -> scale -> MI -> graph -> quantum features, then
for each feature set in {classical, quantum, hybrid}: grid search,
multi-seed test evaluation, confusion/PCA/Fisher artifacts, and finally a
report table of accuracy mean +/- std per feature set.

Every artifact is a pure function of (dataset bytes, config): JSON is
written with sorted keys, CSV with LF terminators and shortest round-trip
float reprs, and no timestamps enter any artifact.  Running the stages
individually in order yields byte-identical files to one benchmark call,
because the benchmark simply calls the stage functions in sequence.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, fields, replace
from pathlib import Path

from . import kernels
from .analysis import DegenerateRankError, confusion, fisher_mean, pca2
from .cd_circuit import ImpulseParams, build_cd_circuit, export_qasm
from .dataset import FeatureTable, apply_scaling, fit_scaling, load_table, save_table
from .encoder import encode_hamiltonian
from .features import (
    default_threads,
    extract_quantum_features,
    features_from_counts,
    make_hybrid,
)
from .forest import (
    CvReport,
    ForestParams,
    forest_to_json,
    grid_search,
    multi_seed_eval,
    predict,
    train_forest,
)
from .mi_graph import InteractionGraph, MiMatrix, build_graph, mi_matrix, optimize_chain
from .simulator import ShotCounts

KINDS = ("classical", "quantum", "hybrid")
STAGES = ("mi", "graph", "qfeatures", "train", "eval", "export-qasm")

DEFAULT_GRID = tuple(
    ForestParams(n_trees=nt, max_depth=md, min_samples_leaf=ml, max_features="sqrt")
    for nt, md, ml in itertools.product((100, 300), (8, None), (1, 3))
)


class StageError(RuntimeError):
    def __init__(self, stage: str, message: str):
        super().__init__(message)
        self.stage = stage


@dataclass(frozen=True)
class PipelineConfig:
    dataset: str
    out_dir: str
    label_column: str = "label"
    scaling: str = "minmax_symmetric"
    mi_bins: int = 8
    topology: str = "chain"
    restarts: int = 0
    theta: float = 0.5
    lambda_eval: float = 0.5
    shots: int = 4096
    mode: str = "exact"
    pair_scope: str = "edges"
    transverse_sign: str = "plus"
    rf_grid: str = ""
    folds: int = 5
    repetitions: int = 10
    eval_seeds: str = "0,1,2,3,4"
    seed: int = 0
    threads: int = 0
    max_qubits: int = 24
    dump_counts: bool = False

    def __post_init__(self):
        if self.folds < 2:
            raise ValueError("folds must be at least 2")
        if self.repetitions < 1:
            raise ValueError("repetitions must be at least 1")
        if not self.seeds_list():
            raise ValueError("eval_seeds must be non-empty")
        if self.mode not in ("exact", "sampled"):
            raise ValueError("mode must be exact or sampled")
        self.grid_list()  # validates

    def seeds_list(self) -> list:
        return [int(s) for s in str(self.eval_seeds).split(",") if s.strip() != ""]

    def grid_list(self) -> list:
        if not self.rf_grid.strip():
            return list(DEFAULT_GRID)
        return [parse_grid_entry(e) for e in self.rf_grid.split(";") if e.strip()]

    def impulse(self) -> ImpulseParams:
        return ImpulseParams(self.theta, self.lambda_eval)

    def n_threads(self) -> int:
        return self.threads if self.threads > 0 else default_threads()

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def parse_grid_entry(entry: str) -> ForestParams:
    kv = {}
    for part in entry.split(","):
        part = part.strip()
        if not part:
            continue
        if "=" not in part:
            raise ValueError(f"bad grid entry item {part!r}; expected key=value")
        k, v = (x.strip() for x in part.split("=", 1))
        kv[k] = v
    params = ForestParams()
    if "n_trees" in kv:
        params = replace(params, n_trees=int(kv.pop("n_trees")))
    if "max_depth" in kv:
        v = kv.pop("max_depth")
        params = replace(params, max_depth=None if v.lower() == "none" else int(v))
    if "min_samples_leaf" in kv:
        params = replace(params, min_samples_leaf=int(kv.pop("min_samples_leaf")))
    if "max_features" in kv:
        v = kv.pop("max_features")
        params = replace(
            params, max_features=v if v in ("sqrt", "all") else float(v)
        )
    if kv:
        raise ValueError(f"unknown grid keys {sorted(kv)}")
    return params


_CONFIG_TYPES = {f.name: f.type for f in fields(PipelineConfig)}
_BOOL_KEYS = {"dump_counts"}
_INT_KEYS = {
    "mi_bins",
    "restarts",
    "shots",
    "folds",
    "repetitions",
    "seed",
    "threads",
    "max_qubits",
}
_FLOAT_KEYS = {"theta", "lambda_eval"}


def parse_config_file(path) -> dict:
    """Flat key = value config file; '#' starts a comment."""
    out = {}
    for ln, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}: line {ln}: expected key = value")
        k, v = (x.strip() for x in line.split("=", 1))
        if k not in _CONFIG_TYPES:
            raise ValueError(f"{path}: line {ln}: unknown key {k!r}")
        out[k] = v
    return out


def build_config(file_values: dict | None = None, **overrides) -> PipelineConfig:
    """Merge defaults < config file < explicit overrides into a config."""
    merged: dict = {}
    for k, v in (file_values or {}).items():
        if k in _BOOL_KEYS:
            merged[k] = v.lower() in ("1", "true", "yes")
        elif k in _INT_KEYS:
            merged[k] = int(v)
        elif k in _FLOAT_KEYS:
            merged[k] = float(v)
        else:
            merged[k] = v
    for k, v in overrides.items():
        if v is not None:
            merged[k] = v
    if "dataset" not in merged:
        raise ValueError("config is missing the dataset path")
    if "out_dir" not in merged:
        raise ValueError("config is missing the output directory")
    return PipelineConfig(**merged)


# ---------------------------------------------------------------------------
# Artifact paths and helpers
# ---------------------------------------------------------------------------


def _out(cfg: PipelineConfig) -> Path:
    p = Path(cfg.out_dir)
    p.mkdir(parents=True, exist_ok=True)
    return p


def _write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _need(path: Path, stage: str) -> Path:
    if not path.exists():
        raise StageError(stage, f"missing upstream artifact: {path}")
    return path


def _json_dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2)


# ---------------------------------------------------------------------------
# Stages
# ---------------------------------------------------------------------------


def stage_mi(cfg: PipelineConfig) -> MiMatrix:
    """Load the dataset, fit/apply scaling, compute the MI matrix."""
    out = _out(cfg)
    try:
        table = load_table(cfg.dataset, cfg.label_column)
        spec = fit_scaling(table, cfg.scaling)
        scaled = apply_scaling(table, spec)
        mi = mi_matrix(scaled, cfg.mi_bins)
    except StageError:
        raise
    except Exception as exc:
        raise StageError("mi", str(exc)) from exc
    save_table(scaled, out / "scaled_features.csv")
    _write_text(out / "scaling.json", _json_dump(spec.to_dict()) + "\n")
    _write_text(out / "mi_matrix.json", mi.to_json() + "\n")
    return mi


def stage_graph(cfg: PipelineConfig) -> InteractionGraph:
    out = _out(cfg)
    path = _need(out / "mi_matrix.json", "graph")
    try:
        mi = MiMatrix.from_json(path.read_text(encoding="utf-8"))
        if cfg.topology == "chain":
            graph = optimize_chain(mi, cfg.restarts, cfg.seed)
        elif cfg.topology == "all_pairs":
            graph = build_graph(mi, "all_pairs", list(range(mi.n)))
        else:
            raise ValueError(
                f"topology {cfg.topology!r} needs an explicit edge list; "
                "build it programmatically via build_graph"
            )
    except StageError:
        raise
    except Exception as exc:
        raise StageError("graph", str(exc)) from exc
    _write_text(out / "graph.json", graph.to_json() + "\n")
    return graph


def _load_scaled(cfg: PipelineConfig, stage: str) -> FeatureTable:
    path = _need(Path(cfg.out_dir) / "scaled_features.csv", stage)
    return load_table(path, "label")


def _load_graph(cfg: PipelineConfig, stage: str) -> InteractionGraph:
    path = _need(Path(cfg.out_dir) / "graph.json", stage)
    return InteractionGraph.from_json(path.read_text(encoding="utf-8"))


def stage_qfeatures(cfg: PipelineConfig, from_counts: str | None = None) -> FeatureTable:
    """Extract quantum features (or replay recorded counts) and write the
    quantum and hybrid tables plus provenance."""
    out = _out(cfg)
    try:
        scaled = _load_scaled(cfg, "qfeatures")
        graph = _load_graph(cfg, "qfeatures")
        if from_counts is not None:
            counts_dir = Path(from_counts)
            counts = []
            for r in range(scaled.n_rows):
                cpath = counts_dir / f"sample_{r:06d}.json"
                if not cpath.exists():
                    raise StageError(
                        "qfeatures", f"missing counts file: {cpath}"
                    )
                counts.append(ShotCounts.from_json(cpath.read_text(encoding="utf-8")))
            quantum = features_from_counts(scaled, graph, counts, cfg.pair_scope)
            mode = "from-counts"
        else:
            sink: list | None = [] if (cfg.dump_counts and cfg.mode == "sampled") else None
            quantum = extract_quantum_features(
                scaled,
                graph,
                cfg.impulse(),
                shots=cfg.shots,
                mode=cfg.mode,
                pair_scope=cfg.pair_scope,
                seed=cfg.seed,
                threads=cfg.n_threads(),
                transverse_sign=cfg.transverse_sign,
                max_qubits=cfg.max_qubits,
                counts_sink=sink,
            )
            mode = cfg.mode
            if sink is not None:
                for r, counts_obj in enumerate(sink):
                    _write_text(
                        out / "counts" / f"sample_{r:06d}.json",
                        counts_obj.to_json() + "\n",
                    )
        hybrid = make_hybrid(scaled, quantum)
    except StageError:
        raise
    except Exception as exc:
        raise StageError("qfeatures", str(exc)) from exc
    save_table(quantum, out / "quantum_features.csv")
    save_table(hybrid, out / "hybrid_features.csv")
    provenance = {
        "backend": kernels.backend_name(),
        "bins": graph.bins,
        "dataset": cfg.dataset,
        "graph_file": "graph.json",
        "lambda_eval": cfg.lambda_eval,
        "mode": mode,
        "pair_scope": cfg.pair_scope,
        "scaling": cfg.scaling,
        "seed": cfg.seed,
        "shots": cfg.shots,
        "theta": cfg.theta,
        "transverse_sign": cfg.transverse_sign,
    }
    _write_text(out / "qfeatures_provenance.json", _json_dump(provenance) + "\n")
    return quantum


def stage_export_qasm(cfg: PipelineConfig) -> int:
    """One OpenQASM file per sample, named by row index."""
    out = _out(cfg)
    try:
        scaled = _load_scaled(cfg, "export-qasm")
        graph = _load_graph(cfg, "export-qasm")
        params = cfg.impulse()
        for r in range(scaled.n_rows):
            h = encode_hamiltonian(scaled.features[r], graph)
            circuit = build_cd_circuit(h, params, sample_id=r)
            _write_text(out / "qasm" / f"sample_{r:06d}.qasm", export_qasm(circuit))
    except StageError:
        raise
    except Exception as exc:
        raise StageError("export-qasm", str(exc)) from exc
    return scaled.n_rows


def _kind_table(cfg: PipelineConfig, kind: str, stage: str) -> FeatureTable:
    out = Path(cfg.out_dir)
    if kind == "classical":
        return _load_scaled(cfg, stage)
    if kind == "quantum":
        path = _need(out / "quantum_features.csv", stage)
        return load_table(path, "label")
    if kind == "hybrid":
        path = _need(out / "hybrid_features.csv", stage)
        return load_table(path, "label")
    raise StageError(stage, f"unknown feature set kind {kind!r}")


def stage_train(cfg: PipelineConfig, kind: str) -> CvReport:
    """Grid search for one feature set; persists the CV report and a model
    trained on the full train split with the winning parameters."""
    out = _out(cfg)
    try:
        table = _kind_table(cfg, kind, "train")
        best, report = grid_search(
            table,
            cfg.grid_list(),
            folds=cfg.folds,
            repetitions=cfg.repetitions,
            seed=cfg.seed,
            threads=cfg.n_threads(),
        )
        model = train_forest(table, replace(best, seed=cfg.seed), cfg.n_threads())
    except StageError:
        raise
    except Exception as exc:
        raise StageError("train", f"[{kind}] {exc}") from exc
    _write_text(out / kind / "cv_report.json", report.to_json() + "\n")
    _write_text(out / kind / "model.json", forest_to_json(model) + "\n")
    return report


def _csv_rows(rows) -> str:
    return "\n".join(",".join(str(v) for v in row) for row in rows) + "\n"


def stage_eval(cfg: PipelineConfig, kind: str) -> dict:
    """Multi-seed test evaluation plus confusion/PCA/Fisher artifacts."""
    out = _out(cfg)
    try:
        table = _kind_table(cfg, kind, "eval")
        cv_path = _need(out / kind / "cv_report.json", "eval")
        report = CvReport.from_json(cv_path.read_text(encoding="utf-8"))
        best = report.params
        train_t = table.train_rows()
        test_t = table.test_rows()
        if test_t.n_rows == 0:
            raise ValueError("no test rows to evaluate on")
        seeds = cfg.seeds_list()
        ms = multi_seed_eval(train_t, test_t, best, seeds, cfg.n_threads())
        first = train_forest(table, replace(best, seed=seeds[0]), cfg.n_threads())
        cm = confusion(test_t.labels, predict(first, test_t), table.n_classes)
        try:
            proj = pca2(table.features)
        except DegenerateRankError:
            proj = None  # e.g. all-zero quantum features at theta=0
        fisher = fisher_mean(table.features, table.labels)
    except StageError:
        raise
    except Exception as exc:
        raise StageError("eval", f"[{kind}] {exc}") from exc
    _write_text(out / kind / "eval.json", _json_dump(ms.to_dict()) + "\n")
    metrics = {
        "accuracy": ms.mean,
        "accuracy_std": ms.std,
        "explained_variance": list(proj.explained) if proj else None,
        "fisher_mean": fisher.mean,
        "n_columns": table.n_features,
    }
    _write_text(out / kind / "metrics.json", _json_dump(metrics) + "\n")
    _write_text(out / kind / "confusion.csv", _csv_rows(cm.counts.tolist()))
    pca_rows = [["PC1", "PC2", "label"]]
    if proj:
        pca_rows += [
            [
                repr(float(proj.scores[r, 0])),
                repr(float(proj.scores[r, 1])),
                int(table.labels[r]),
            ]
            for r in range(table.n_rows)
        ]
    _write_text(out / kind / "pca.csv", _csv_rows(pca_rows))
    return metrics


# ---------------------------------------------------------------------------
# Benchmark
# ---------------------------------------------------------------------------


def _write_report(cfg: PipelineConfig) -> dict:
    out = _out(cfg)
    feature_sets = {}
    for kind in KINDS:
        cv = CvReport.from_json(
            _need(out / kind / "cv_report.json", "report").read_text(encoding="utf-8")
        )
        metrics = json.loads(
            _need(out / kind / "metrics.json", "report").read_text(encoding="utf-8")
        )
        ev = json.loads(
            _need(out / kind / "eval.json", "report").read_text(encoding="utf-8")
        )
        feature_sets[kind] = {
            "accuracy_mean": metrics["accuracy"],
            "accuracy_std": metrics["accuracy_std"],
            "best_params": cv.params.to_dict(),
            "cv_mean": cv.mean,
            "cv_std": cv.std,
            "explained_variance": metrics["explained_variance"],
            "fisher_mean": metrics["fisher_mean"],
            "n_columns": metrics["n_columns"],
            "per_seed": ev["accuracies"],
        }
    graph = _load_graph(cfg, "report")
    report = {
        "backend": kernels.backend_name(),
        "config": cfg.to_dict(),
        "feature_sets": feature_sets,
        "n_qubits": graph.n,
    }
    _write_text(out / "report.json", _json_dump(report) + "\n")
    lines = [["feature_set", "n_columns", "accuracy_mean", "accuracy_std"]]
    for kind in KINDS:
        fs = feature_sets[kind]
        lines.append(
            [kind, fs["n_columns"], repr(fs["accuracy_mean"]), repr(fs["accuracy_std"])]
        )
    _write_text(out / "report.csv", _csv_rows(lines))
    return report


def run_benchmark(cfg: PipelineConfig, log=None) -> dict:
    """Execute the full pipeline; the INCOMPLETE marker is present exactly
    while a run is underway or after a failed run."""
    out = _out(cfg)
    marker = out / "INCOMPLETE"
    _write_text(marker, "benchmark in progress\n")
    def _log(msg: str) -> None:
        if log:
            log(msg)
    try:
        stage_mi(cfg)
        _log("stage mi complete")
        stage_graph(cfg)
        _log("stage graph complete")
        stage_qfeatures(cfg)
        _log("stage qfeatures complete")
        for kind in KINDS:
            stage_train(cfg, kind)
            _log(f"stage train[{kind}] complete")
            stage_eval(cfg, kind)
            _log(f"stage eval[{kind}] complete")
        report = _write_report(cfg)
    except StageError as exc:
        _write_text(marker, f"failed in stage {exc.stage}: {exc}\n")
        raise
    marker.unlink()
    return report
