"""End-to-end experiment orchestration.

Corpus circuits are labeled by brute-force scoring over every compilation
option; a seeded split feeds classifier training; evaluation reports rank
quality measures and exports the figure datasets (rank histogram, per-option
score dots, feature importances) as CSV. All outputs are byte-deterministic
for a fixed seed: floats are serialized with repr and no wall-clock values
enter any dataset file.
"""
from __future__ import annotations

import hashlib
import json
import logging
import time
from dataclasses import dataclass
from math import floor
from pathlib import Path

import numpy as np

from .circuit import Circuit
from .compiler import CompilationOption, compile_circuit
from .devices import DeviceModel
from .features import (
    FeatureSchema,
    apply_standardize,
    extract_features,
    full_schema,
    project_columns,
    prune_constant_features,
    standardize,
)
from .ml import (
    DEFAULT_GRID,
    ForestModel,
    feature_importance,
    fit_forest,
    grid_search_cv,
    knn_fit_predict,
    naive_bayes_fit_predict,
    predict_many,
)
from .qasm import parse_qasm, to_qasm
from .scoring import rank_options, ranks_from_values

logger = logging.getLogger(__name__)

DEFAULT_TIMEOUT = 10.0
DEFAULT_TEST_FRACTION = 0.3
DEFAULT_FOREST_PARAMS = {"n_trees": 500, "max_depth": 20, "min_samples_leaf": 2}

LABELS_FILE = "labels.csv"
FEATURES_FILE = "features.csv"
MODEL_FILE = "model.bin"
REPORT_FILE = "report.json"
FIG4_FILE = "fig4_histogram.csv"
FIG5_FILE = "fig5_dots.csv"
FIG6_FILE = "fig6_importance.csv"
CIRCUITS_DIR = "circuits"
MANIFEST_FILE = "manifest.json"

EXTERNAL_REFERENCE = {
    "accuracy": 0.75,
    "top3": 0.90,
    "worst_rank": 12,
    "note": (
        "externally reported results for this methodology on a different "
        "corpus and compiler stack; context only, not asserted here"
    ),
}


class PipelineError(Exception):
    """Orchestration-level failure (bad dataset, schema mismatch, missing file)."""


@dataclass(frozen=True)
class LabeledSample:
    """One corpus circuit with its features and ground-truth option ranking.

    ``features`` follows the full (unpruned) schema; ``scores`` and ``ranks``
    follow the canonical option order. ``label`` is the rank-1 option id.
    """

    name: str
    num_qubits: int
    features: tuple[float, ...]
    label: str
    scores: tuple[float, ...]
    ranks: tuple[int, ...]


@dataclass(frozen=True)
class EvalReport:
    accuracy: float
    top3: float
    worst_rank: int
    ranks: tuple[int, ...]


# ---------------------------------------------------------------------------
# labeling and splitting

def label_dataset(
    circuits: list[Circuit],
    options: list[CompilationOption],
    devices: list[DeviceModel] | dict[str, DeviceModel],
    timeout: float | None = DEFAULT_TIMEOUT,
) -> tuple[list[LabeledSample], list[tuple[str, str]]]:
    """Brute-force label every circuit; returns (samples, excluded).

    A circuit with no feasible option is excluded and logged, not an error.
    """
    if not circuits or not options:
        raise PipelineError("label_dataset needs circuits and options")
    seen: set[str] = set()
    for c in circuits:
        if not c.name:
            raise PipelineError("corpus circuits must be named")
        if c.name in seen:
            raise PipelineError(f"duplicate circuit name {c.name!r}")
        seen.add(c.name)

    schema = full_schema()
    samples: list[LabeledSample] = []
    excluded: list[tuple[str, str]] = []
    for c in circuits:
        ranking = rank_options(c, options, devices, timeout=timeout)
        values = ranking.score_values()
        if max(values) == 0.0:
            reason = f"all {len(options)} options infeasible"
            logger.info("excluding %s: %s", c.name, reason)
            excluded.append((c.name, reason))
            continue
        samples.append(
            LabeledSample(
                name=c.name,
                num_qubits=c.num_qubits,
                features=tuple(float(v) for v in extract_features(c, schema)),
                label=ranking.best.option_id,
                scores=values,
                ranks=ranks_from_values(values),
            )
        )
    return samples, excluded


def split(
    dataset: list[LabeledSample], test_fraction: float, seed: int
) -> tuple[list[LabeledSample], list[LabeledSample]]:
    """Seeded shuffle, then floor(n*(1-f)) train rows and the rest test."""
    if len(dataset) < 2:
        raise PipelineError("need at least 2 samples to split")
    if not 0.0 < test_fraction < 1.0:
        raise PipelineError("test fraction must be in (0, 1)")
    perm = np.random.default_rng(seed).permutation(len(dataset))
    n_train = floor(len(dataset) * (1.0 - test_fraction))
    train = [dataset[i] for i in perm[:n_train]]
    test = [dataset[i] for i in perm[n_train:]]
    return train, test


# ---------------------------------------------------------------------------
# training and evaluation

def _full_matrix(samples: list[LabeledSample]) -> np.ndarray:
    return np.array([s.features for s in samples], dtype=np.float64)


def _label_indices(samples: list[LabeledSample], options: list[CompilationOption]) -> np.ndarray:
    position = {opt.option_id: i for i, opt in enumerate(options)}
    try:
        return np.array([position[s.label] for s in samples], dtype=np.int64)
    except KeyError as exc:
        raise PipelineError(f"sample label {exc} is not among the configured options") from exc


def train_model(
    train: list[LabeledSample],
    options: list[CompilationOption],
    seed: int = 0,
    params: dict | None = None,
    grid: list[dict] | None = None,
    folds: int = 5,
) -> tuple[ForestModel, dict, list[tuple[dict, float]] | None]:
    """Fit the forest on the training rows.

    Constant feature columns are pruned using the training rows only. With
    ``grid`` set, hyperparameters come from cross-validated search; otherwise
    ``params`` (default 500 trees / depth 20 / min leaf 2) are used directly.
    """
    if not train:
        raise PipelineError("empty training set")
    if len({s.label for s in train}) < 2:
        raise PipelineError("degenerate training labels: need at least 2 classes")
    schema = full_schema()
    X_full = _full_matrix(train)
    pruned = prune_constant_features(X_full, schema)
    X = project_columns(X_full, schema, pruned)
    y = _label_indices(train, options)
    label_space = tuple(opt.option_id for opt in options)

    results = None
    if grid is not None:
        chosen, results = grid_search_cv(X, y, pruned, label_space, grid, folds=folds, seed=seed)
    else:
        chosen = dict(params if params is not None else DEFAULT_FOREST_PARAMS)
    model = fit_forest(
        X, y, pruned, label_space,
        n_trees=chosen.get("n_trees", 500),
        max_depth=chosen.get("max_depth", 20),
        min_samples_leaf=chosen.get("min_samples_leaf", 2),
        seed=seed,
    )
    return model, chosen, results


def _project_to_model(model: ForestModel, samples: list[LabeledSample]) -> np.ndarray:
    names = full_schema().names
    if tuple(model.schema.names) != names:
        raise PipelineError("model schema does not match the feature extractor")
    columns = [names.index(r) for r in model.schema.retained]
    return _full_matrix(samples)[:, columns]


def predicted_labels(model: ForestModel, samples: list[LabeledSample]) -> list[str]:
    X = _project_to_model(model, samples)
    return [model.label_space[int(i)] for i in predict_many(model, X)]


def _report_from_predictions(
    predictions: list[str], samples: list[LabeledSample], options: list[CompilationOption]
) -> EvalReport:
    position = {opt.option_id: i for i, opt in enumerate(options)}
    ranks = []
    for pred, sample in zip(predictions, samples):
        if pred not in position:
            raise PipelineError(f"predicted option {pred!r} missing from the ranking")
        ranks.append(sample.ranks[position[pred]])
    ranks_t = tuple(ranks)
    return EvalReport(
        accuracy=sum(r == 1 for r in ranks_t) / len(ranks_t),
        top3=sum(r <= 3 for r in ranks_t) / len(ranks_t),
        worst_rank=max(ranks_t),
        ranks=ranks_t,
    )


def evaluate(
    model: ForestModel, test: list[LabeledSample], options: list[CompilationOption]
) -> EvalReport:
    """Ground-truth rank of each prediction, aggregated into the three measures."""
    if not test:
        raise PipelineError("empty test set")
    return _report_from_predictions(predicted_labels(model, test), test, options)


def evaluate_baseline(
    kind: str,
    train: list[LabeledSample],
    test: list[LabeledSample],
    options: list[CompilationOption],
    k: int = 5,
) -> EvalReport:
    """Nearest-neighbor or Gaussian Bayes baseline through the same harness.

    Features are pruned on the training rows and standardized before use.
    """
    if kind not in ("knn", "nb"):
        raise PipelineError(f"unknown baseline {kind!r}")
    if not train or not test:
        raise PipelineError("empty train or test set")
    schema = full_schema()
    pruned = prune_constant_features(_full_matrix(train), schema)
    X_train = project_columns(_full_matrix(train), schema, pruned)
    X_test = project_columns(_full_matrix(test), schema, pruned)
    X_train, mean, std = standardize(X_train)
    X_test = apply_standardize(X_test, mean, std)
    y = _label_indices(train, options)
    n_classes = len(options)
    predictions = []
    for row in X_test:
        if kind == "knn":
            c = knn_fit_predict(X_train, y, row, min(k, X_train.shape[0]), n_classes)
        else:
            c = naive_bayes_fit_predict(X_train, y, row, n_classes)
        predictions.append(options[c].option_id)
    return _report_from_predictions(predictions, test, options)


def majority_baseline(
    train: list[LabeledSample], test: list[LabeledSample], options: list[CompilationOption]
) -> tuple[str, float]:
    """Most frequent training label and its rank-1 accuracy on the test rows."""
    position = {opt.option_id: i for i, opt in enumerate(options)}
    counts: dict[str, int] = {}
    for s in train:
        counts[s.label] = counts.get(s.label, 0) + 1
    majority = min(counts, key=lambda lab: (-counts[lab], position[lab]))
    accuracy = sum(s.ranks[position[majority]] == 1 for s in test) / len(test)
    return majority, accuracy


def rank_histogram(report: EvalReport, n_options: int) -> list[tuple[int, float]]:
    """Relative frequency of each ground-truth rank 1..n among predictions."""
    total = len(report.ranks)
    return [(r, sum(x == r for x in report.ranks) / total) for r in range(1, n_options + 1)]


def runtime_compare(
    circuit: Circuit,
    model: ForestModel,
    options: list[CompilationOption],
    devices: list[DeviceModel] | dict[str, DeviceModel],
    timeout: float | None = None,
) -> dict:
    """Wall time of the full brute-force sweep vs predict-then-compile-once."""
    fleet = devices if isinstance(devices, dict) else {d.id: d for d in devices}
    by_id = {opt.option_id: opt for opt in options}

    started = time.perf_counter()
    rank_options(circuit, options, fleet, timeout=timeout)
    brute = time.perf_counter() - started

    started = time.perf_counter()
    schema = full_schema()
    vector = extract_features(circuit, schema)
    columns = [schema.names.index(r) for r in model.schema.retained]
    label = model.label_space[int(predict_many(model, vector[columns][None, :])[0])]
    compile_circuit(circuit, by_id[label], fleet)
    fast = time.perf_counter() - started

    return {
        "brute_force_seconds": brute,
        "predict_and_compile_seconds": fast,
        "reduction_fraction": 1.0 - fast / brute if brute > 0 else 0.0,
        "predicted_option": label,
    }


def export_dot_graph(
    test: list[LabeledSample], model: ForestModel, options: list[CompilationOption]
) -> list[tuple[str, int, str, float, int]]:
    """Rows (circuit, qubits, option, score/best, predicted flag), sorted by
    qubit count; exactly one flagged row per circuit."""
    predictions = predicted_labels(model, test)
    rows: list[tuple[str, int, str, float, int]] = []
    for sample, pred in zip(test, predictions):
        best = max(sample.scores)
        for i, opt in enumerate(options):
            rows.append(
                (
                    sample.name,
                    sample.num_qubits,
                    opt.option_id,
                    sample.scores[i] / best,
                    1 if opt.option_id == pred else 0,
                )
            )
    rows.sort(key=lambda r: (r[1], r[0]))
    return rows


# ---------------------------------------------------------------------------
# disk formats (all byte-deterministic)

def _write_text(path: Path, text: str) -> None:
    path.write_text(text, encoding="utf-8", newline="\n")


def write_corpus(outdir: str | Path, circuits: list[Circuit]) -> dict:
    """Emit one OpenQASM file per circuit plus a manifest with content hashes."""
    outdir = Path(outdir)
    cdir = outdir / CIRCUITS_DIR
    cdir.mkdir(parents=True, exist_ok=True)
    entries = []
    for c in circuits:
        if not c.name:
            raise PipelineError("cannot write an unnamed circuit")
        text = to_qasm(c)
        _write_text(cdir / f"{c.name}.qasm", text)
        digest = hashlib.sha256(text.encode("utf-8")).hexdigest()
        entries.append({"name": c.name, "qubits": c.num_qubits, "sha256": digest})
    manifest = {"count": len(circuits), "files": entries}
    _write_text(outdir / MANIFEST_FILE, json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return manifest


def read_corpus(outdir: str | Path) -> list[Circuit]:
    """Load circuits back in manifest order."""
    outdir = Path(outdir)
    manifest_path = outdir / MANIFEST_FILE
    if not manifest_path.is_file():
        raise PipelineError(f"no manifest at {manifest_path}")
    manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    circuits = []
    for entry in manifest["files"]:
        path = outdir / CIRCUITS_DIR / f"{entry['name']}.qasm"
        if not path.is_file():
            raise PipelineError(f"manifest references missing file {path}")
        circuits.append(parse_qasm(path.read_text(encoding="utf-8"), name=entry["name"]))
    return circuits


def write_labels_csv(path: str | Path, samples: list[LabeledSample], options: list[CompilationOption]) -> None:
    header = ["circuit", "label"] + [f"score_{opt.option_id}" for opt in options]
    lines = [",".join(header)]
    for s in samples:
        lines.append(",".join([s.name, s.label] + [repr(v) for v in s.scores]))
    _write_text(Path(path), "\n".join(lines) + "\n")


def write_features_csv(path: str | Path, samples: list[LabeledSample]) -> None:
    header = ["circuit"] + list(full_schema().names) + ["label"]
    lines = [",".join(header)]
    for s in samples:
        lines.append(",".join([s.name] + [repr(v) for v in s.features] + [s.label]))
    _write_text(Path(path), "\n".join(lines) + "\n")


def _read_csv_rows(path: Path) -> tuple[list[str], list[list[str]]]:
    if not path.is_file():
        raise PipelineError(f"missing file {path}")
    lines = path.read_text(encoding="utf-8").splitlines()
    if not lines:
        raise PipelineError(f"empty file {path}")
    return lines[0].split(","), [line.split(",") for line in lines[1:] if line]


def load_labeled_dataset(outdir: str | Path, options: list[CompilationOption]) -> list[LabeledSample]:
    """Rebuild samples by joining features.csv and labels.csv on circuit name.

    Ranks are recomputed from the stored scores; the recomputation uses the
    same tie rule as labeling, so the round trip is exact.
    """
    outdir = Path(outdir)
    f_header, f_rows = _read_csv_rows(outdir / FEATURES_FILE)
    l_header, l_rows = _read_csv_rows(outdir / LABELS_FILE)
    names = full_schema().names
    if tuple(f_header) != ("circuit",) + names + ("label",):
        raise PipelineError("features.csv header does not match the feature schema")
    expected = ["circuit", "label"] + [f"score_{opt.option_id}" for opt in options]
    if l_header != expected:
        raise PipelineError("labels.csv header does not match the configured options")

    scores_by_name: dict[str, tuple[str, tuple[float, ...]]] = {}
    for row in l_rows:
        scores_by_name[row[0]] = (row[1], tuple(float(v) for v in row[2:]))
    samples = []
    qubit_column = names.index("num_qubits") + 1
    for row in f_rows:
        name = row[0]
        if name not in scores_by_name:
            raise PipelineError(f"circuit {name!r} in features.csv but not labels.csv")
        label, scores = scores_by_name[name]
        if label != row[-1]:
            raise PipelineError(f"label mismatch for {name!r} between the two CSV files")
        samples.append(
            LabeledSample(
                name=name,
                num_qubits=int(float(row[qubit_column])),
                features=tuple(float(v) for v in row[1:-1]),
                label=label,
                scores=scores,
                ranks=ranks_from_values(scores),
            )
        )
    return samples


def write_fig4_csv(path: str | Path, report: EvalReport, n_options: int) -> None:
    lines = ["rank,frequency"]
    for rank, freq in rank_histogram(report, n_options):
        lines.append(f"{rank},{freq!r}")
    _write_text(Path(path), "\n".join(lines) + "\n")


def write_fig5_csv(path: str | Path, rows: list[tuple[str, int, str, float, int]]) -> None:
    lines = ["circuit,num_qubits,option,normalized_score,predicted"]
    for name, qubits, option, score, flag in rows:
        lines.append(f"{name},{qubits},{option},{score!r},{flag}")
    _write_text(Path(path), "\n".join(lines) + "\n")


def write_fig6_csv(path: str | Path, model: ForestModel) -> None:
    mean, std, degenerate = feature_importance(model)
    lines = ["feature,importance_mean,importance_std"]
    for name, m, s in zip(model.schema.retained, mean, std):
        lines.append(f"{name},{float(m)!r},{float(s)!r}")
    _write_text(Path(path), "\n".join(lines) + "\n")
    if degenerate:
        logger.warning("all trees are single leaves; importances are zero")


def write_report(path: str | Path, payload: dict) -> None:
    _write_text(Path(path), json.dumps(payload, indent=2, sort_keys=True) + "\n")


def build_report(
    report: EvalReport,
    options: list[CompilationOption],
    n_train: int,
    n_test: int,
    params: dict,
    majority_accuracy: float,
    excluded: list[tuple[str, str]] | None = None,
    seed: int = 0,
) -> dict:
    """Assemble the JSON report. Deliberately excludes wall-clock timings so
    reruns with one seed are byte-identical."""
    return {
        "accuracy": report.accuracy,
        "top3": report.top3,
        "worst_rank": report.worst_rank,
        "n_options": len(options),
        "n_train": n_train,
        "n_test": n_test,
        "majority_baseline_accuracy": majority_accuracy,
        "classifier_params": {k: params[k] for k in sorted(params)},
        "seed": seed,
        "excluded_circuits": [list(e) for e in (excluded or [])],
        "external_reference": EXTERNAL_REFERENCE,
    }
