"""Command-line entry point.

Subcommands cover the full workflow: generate a corpus, label it by brute
force, train and evaluate a predictor, predict an option for one circuit, and
compile a circuit with a chosen or predicted option. Results land in files;
progress and exclusions go to stderr via logging so files stay deterministic.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import re
import sys
from pathlib import Path

from .circuit import CircuitError
from .compiler import CompileError, compile_circuit, enumerate_options, parse_option
from .devices import DeviceError, builtin_devices, load_device_dir
from .features import extract_features, full_schema
from .generators import DEFAULT_RANDOM_VARIANTS, FAMILIES, MAX_QUBITS, MIN_QUBITS, generate_corpus
from .ml import DEFAULT_GRID, ModelFormatError, feature_importance, load_model, predict_many, predict_top_k, save_model
from .pipeline import (
    DEFAULT_FOREST_PARAMS,
    DEFAULT_TEST_FRACTION,
    DEFAULT_TIMEOUT,
    FIG4_FILE,
    FIG5_FILE,
    FIG6_FILE,
    FEATURES_FILE,
    LABELS_FILE,
    MODEL_FILE,
    REPORT_FILE,
    PipelineError,
    build_report,
    evaluate,
    evaluate_baseline,
    export_dot_graph,
    label_dataset,
    load_labeled_dataset,
    majority_baseline,
    read_corpus,
    split,
    train_model,
    write_corpus,
    write_features_csv,
    write_fig4_csv,
    write_fig5_csv,
    write_fig6_csv,
    write_labels_csv,
    write_report,
)
from .qasm import QasmError, parse_qasm, to_qasm
from .scoring import CalibrationError, evaluate_score, rank_options

logger = logging.getLogger(__name__)

DEVICE_DIR_ENV = "QCPREDICT_DEVICES"

_USER_ERRORS = (
    CircuitError,
    QasmError,
    DeviceError,
    CompileError,
    CalibrationError,
    ModelFormatError,
    PipelineError,
    ValueError,
    OSError,
)


def _parse_qubit_range(text: str) -> tuple[int, int]:
    match = re.fullmatch(r"(\d+)\.\.(\d+)", text)
    if match:
        return int(match.group(1)), int(match.group(2))
    if text.isdigit():
        return int(text), int(text)
    raise ValueError(f"bad qubit range {text!r}; expected N or LO..HI")


def _load_devices(args: argparse.Namespace):
    path = getattr(args, "devices", None) or os.environ.get(DEVICE_DIR_ENV)
    if path:
        devices = load_device_dir(path)
        if not devices:
            raise PipelineError(f"no device files in {path}")
        return devices
    return builtin_devices()


def _read_circuit(path: str):
    source = Path(path).read_text(encoding="utf-8")
    return parse_qasm(source, name=Path(path).stem)


def cmd_generate(args: argparse.Namespace) -> int:
    families = args.families.split(",") if args.families else None
    corpus = generate_corpus(
        families=families,
        qubit_range=_parse_qubit_range(args.qubits),
        seed=args.seed,
        random_variants=args.random_variants,
    )
    manifest = write_corpus(args.out, corpus)
    print(f"wrote {manifest['count']} circuits to {Path(args.out) / 'circuits'}")
    return 0


def cmd_label(args: argparse.Namespace) -> int:
    devices = _load_devices(args)
    options = enumerate_options(devices)
    circuits = read_corpus(args.corpus)
    samples, excluded = label_dataset(circuits, options, devices, timeout=args.timeout)
    if not samples:
        raise PipelineError("every circuit was infeasible on every option")
    outdir = Path(args.out or args.corpus)
    outdir.mkdir(parents=True, exist_ok=True)
    write_labels_csv(outdir / LABELS_FILE, samples, options)
    write_features_csv(outdir / FEATURES_FILE, samples)
    print(f"labeled {len(samples)} circuits ({len(excluded)} excluded) -> {outdir}")
    return 0


def cmd_train(args: argparse.Namespace) -> int:
    devices = _load_devices(args)
    options = enumerate_options(devices)
    samples = load_labeled_dataset(args.data, options)
    train_set, test_set = split(samples, args.test_fraction, args.seed)
    outdir = Path(args.out or args.data)
    outdir.mkdir(parents=True, exist_ok=True)

    if args.classifier == "forest":
        fixed = {
            "n_trees": args.n_trees,
            "max_depth": args.max_depth,
            "min_samples_leaf": args.min_samples_leaf,
        }
        model, chosen, _ = train_model(
            train_set,
            options,
            seed=args.seed,
            params=fixed,
            grid=DEFAULT_GRID if args.grid_search else None,
            folds=args.folds,
        )
        save_model(model, outdir / MODEL_FILE)
        report = evaluate(model, test_set, options)
        params = {"classifier": "forest", **chosen}
    else:
        report = evaluate_baseline(args.classifier, train_set, test_set, options, k=args.knn_k)
        params = {"classifier": args.classifier}
        if args.classifier == "knn":
            params["k"] = args.knn_k

    _, majority_accuracy = majority_baseline(train_set, test_set, options)
    payload = build_report(
        report, options, len(train_set), len(test_set), params, majority_accuracy, seed=args.seed
    )
    write_report(outdir / REPORT_FILE, payload)
    print(
        f"{args.classifier}: accuracy {report.accuracy:.4f}, top3 {report.top3:.4f}, "
        f"worst rank {report.worst_rank} of {len(options)} "
        f"(majority baseline {majority_accuracy:.4f})"
    )
    return 0


def cmd_predict(args: argparse.Namespace) -> int:
    model = load_model(args.model)
    circuit = _read_circuit(args.circuit)
    schema = full_schema()
    if tuple(model.schema.names) != schema.names:
        raise PipelineError("model schema does not match this feature extractor")
    vector = extract_features(circuit, schema)
    columns = [schema.names.index(r) for r in model.schema.retained]
    x = vector[columns]
    print(f"predicted: {model.label_space[int(predict_many(model, x[None, :])[0])]}")
    for i, (label, share) in enumerate(predict_top_k(model, x, args.top_k), start=1):
        print(f"  {i}. {label}  vote share {share:.3f}")
    if args.explain:
        mean, _, _ = feature_importance(model)
        ranked = sorted(zip(model.schema.retained, mean), key=lambda p: (-p[1], p[0]))
        print("feature importances:")
        for name, value in ranked:
            print(f"  {name}: {value:.4f}")
    return 0


def cmd_compile(args: argparse.Namespace) -> int:
    devices = _load_devices(args)
    fleet = {d.id: d for d in devices}
    options = enumerate_options(devices)
    circuit = _read_circuit(args.circuit)

    if args.all:
        ranking = rank_options(circuit, options, fleet, timeout=args.timeout)
        lines = ["rank,option,score"]
        for rank, option in enumerate(ranking.order, start=1):
            lines.append(f"{rank},{option.option_id},{ranking.scores[option].value!r}")
        text = "\n".join(lines) + "\n"
        if args.out:
            Path(args.out).write_text(text, encoding="utf-8", newline="\n")
            print(f"wrote ranking for {len(options)} options to {args.out}")
        else:
            print(text, end="")
        return 0

    if args.option:
        option = parse_option(args.option)
        if option.option_id not in {o.option_id for o in options}:
            raise PipelineError(f"option {option.option_id!r} not available on this fleet")
    elif args.model:
        model = load_model(args.model)
        schema = full_schema()
        vector = extract_features(circuit, schema)
        columns = [schema.names.index(r) for r in model.schema.retained]
        option = parse_option(model.label_space[int(predict_many(model, vector[columns][None, :])[0])])
    else:
        raise PipelineError("compile needs --option, --model, or --all")

    result = compile_circuit(circuit, option, fleet)
    score = evaluate_score(result, fleet[option.device_id])
    text = to_qasm(result.circuit)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8", newline="\n")
    else:
        print(text, end="")
    stats = {
        "option": option.option_id,
        "score": score.value,
        "layout": [result.layout[q] for q in sorted(result.layout)],
        **result.stats,
    }
    stats.pop("compile_seconds", None)
    if args.stats:
        Path(args.stats).write_text(
            json.dumps(stats, indent=2, sort_keys=True) + "\n", encoding="utf-8", newline="\n"
        )
    else:
        print(json.dumps(stats, indent=2, sort_keys=True), file=sys.stderr)
    return 0


def cmd_evaluate(args: argparse.Namespace) -> int:
    devices = _load_devices(args)
    options = enumerate_options(devices)
    samples = load_labeled_dataset(args.data, options)
    train_set, test_set = split(samples, args.test_fraction, args.seed)
    model = load_model(args.model or Path(args.data) / MODEL_FILE)
    report = evaluate(model, test_set, options)
    _, majority_accuracy = majority_baseline(train_set, test_set, options)

    outdir = Path(args.out or args.data)
    outdir.mkdir(parents=True, exist_ok=True)
    params = {
        "classifier": "forest",
        "n_trees": model.n_trees,
        "max_depth": model.max_depth,
        "min_samples_leaf": model.min_samples_leaf,
    }
    payload = build_report(
        report, options, len(train_set), len(test_set), params, majority_accuracy, seed=args.seed
    )
    write_report(outdir / REPORT_FILE, payload)
    write_fig4_csv(outdir / FIG4_FILE, report, len(options))
    write_fig5_csv(outdir / FIG5_FILE, export_dot_graph(test_set, model, options))
    write_fig6_csv(outdir / FIG6_FILE, model)
    print(
        f"accuracy {report.accuracy:.4f}, top3 {report.top3:.4f}, worst rank {report.worst_rank}; "
        f"wrote {REPORT_FILE}, {FIG4_FILE}, {FIG5_FILE}, {FIG6_FILE} to {outdir}"
    )
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qcpredict",
        description="Predict good compilation options for quantum circuits.",
    )
    parser.add_argument("--verbose", action="store_true", help="log at INFO level")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_devices(p: argparse.ArgumentParser) -> None:
        p.add_argument(
            "--devices",
            help=f"directory of device YAML files (default: built-in fleet, or ${DEVICE_DIR_ENV})",
        )

    p = sub.add_parser("generate", help="write a benchmark circuit corpus")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--families", help=f"comma-separated subset of: {','.join(FAMILIES)}")
    p.add_argument("--qubits", default=f"{MIN_QUBITS}..{MAX_QUBITS}", help="qubit range LO..HI")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--random-variants", type=int, default=DEFAULT_RANDOM_VARIANTS)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("label", help="brute-force label a corpus")
    p.add_argument("--corpus", required=True, help="directory written by generate")
    p.add_argument("--out", help="output directory (default: the corpus directory)")
    add_devices(p)
    p.add_argument("--timeout", type=float, default=DEFAULT_TIMEOUT, help="per-option compile timeout (s)")
    p.add_argument("--jobs", type=int, default=1, help="accepted for compatibility; runs serially")
    p.set_defaults(func=cmd_label)

    p = sub.add_parser("train", help="train and evaluate a classifier")
    p.add_argument("--data", required=True, help="directory holding labels.csv and features.csv")
    p.add_argument("--out", help="output directory (default: the data directory)")
    add_devices(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--test-fraction", type=float, default=DEFAULT_TEST_FRACTION)
    p.add_argument("--classifier", choices=("forest", "knn", "nb"), default="forest")
    p.add_argument("--grid-search", action="store_true", help="cross-validated hyperparameter search")
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--n-trees", type=int, default=DEFAULT_FOREST_PARAMS["n_trees"])
    p.add_argument("--max-depth", type=lambda v: None if v == "none" else int(v),
                   default=DEFAULT_FOREST_PARAMS["max_depth"], help="int or 'none'")
    p.add_argument("--min-samples-leaf", type=int, default=DEFAULT_FOREST_PARAMS["min_samples_leaf"])
    p.add_argument("--knn-k", type=int, default=5)
    p.add_argument("--jobs", type=int, default=1, help="accepted for compatibility; runs serially")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="predict the best option for one circuit")
    p.add_argument("circuit", help="OpenQASM file")
    p.add_argument("--model", required=True, help="trained model file")
    p.add_argument("--top-k", type=int, default=3)
    p.add_argument("--explain", action="store_true", help="also print feature importances")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("compile", help="compile a circuit with a chosen or predicted option")
    p.add_argument("circuit", help="OpenQASM file")
    p.add_argument("--option", help="explicit option id, e.g. dev8/A/O3")
    p.add_argument("--model", help="predict the option with this model")
    p.add_argument("--all", action="store_true", help="rank every option instead (ground-truth mode)")
    add_devices(p)
    p.add_argument("--out", help="output file (compiled OpenQASM, or ranking CSV with --all)")
    p.add_argument("--stats", help="write compile stats JSON here")
    p.add_argument("--timeout", type=float, default=None, help="per-option timeout for --all (s)")
    p.set_defaults(func=cmd_compile)

    p = sub.add_parser("evaluate", help="evaluate a trained model and export figure data")
    p.add_argument("--data", required=True, help="directory holding labels.csv and features.csv")
    p.add_argument("--model", help="model file (default: <data>/model.bin)")
    p.add_argument("--out", help="output directory (default: the data directory)")
    add_devices(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--test-fraction", type=float, default=DEFAULT_TEST_FRACTION)
    p.set_defaults(func=cmd_evaluate)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(
        stream=sys.stderr,
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except _USER_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
