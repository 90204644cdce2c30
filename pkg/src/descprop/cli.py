"""Command-line entry points: train, predict, and shap verbs.

The train verb runs the full pipeline (load, featurize, scale, fit,
evaluate) once per repetition and writes checkpoints plus a metric
report. Reports contain no timestamps or host details, so rerunning the
same config produces byte-identical files; timing goes to the stderr log
instead.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import logging
import sys
import time
from pathlib import Path

import numpy as np

from . import attribution as attribution_mod
from . import checkpoint as checkpoint_mod
from . import metrics as metrics_mod
from . import neural
from .config import (RunConfig, build_run_config, coerce_scalar, parse_config,
                     write_config_snapshot)
from .datasetio import cached_descriptors, load_dataset, random_split
from .descriptors import CATALOGUE_VERSION, compute_matrix, get_descriptor_set
from .errors import DescpropError, SmilesParseError
from .molparse import parse_smiles, standardize
from .preprocess import fit_scaler, transform

logger = logging.getLogger(__name__)

REGRESSION_METRICS = ("mae", "rmse", "mape", "wmape", "r2", "pearson_r")
PREDICTIONS_NAME = "predictions.csv"
IMPORTANCE_NAME = "importance.csv"
ATTRIBUTIONS_NAME = "attributions.csv"


def setup_logging(verbose: bool = False):
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter(
        "%(asctime)s %(levelname)s %(name)s: %(message)s"))
    root = logging.getLogger()
    root.handlers[:] = [handler]
    root.setLevel(logging.DEBUG if verbose else logging.INFO)


def _float_str(value: float) -> str:
    return repr(float(value))


# -- train ----------------------------------------------------------------


def _metric_key(name: str, target: str, n_targets: int) -> str:
    return name if n_targets == 1 else f"{name}[{target}]"


def _regression_metrics(predictions: np.ndarray, truth: np.ndarray,
                        target_names) -> dict[str, float]:
    values: dict[str, float] = {}
    n_targets = truth.shape[1]
    for t, target in enumerate(target_names):
        mask = ~np.isnan(truth[:, t])
        pred_t, truth_t = predictions[mask, t], truth[mask, t]
        for name in REGRESSION_METRICS:
            fn = getattr(metrics_mod, name)
            try:
                value = fn(pred_t, truth_t)
            except ValueError as exc:
                logger.warning("%s undefined for target %r: %s", name, target, exc)
                value = float("nan")
            values[_metric_key(name, target, n_targets)] = value
    return values


def _multilabel_metrics(predictions: np.ndarray, truth: np.ndarray,
                        target_names) -> dict[str, float]:
    values: dict[str, float] = {}
    n_targets = truth.shape[1]
    try:
        values["auroc"] = metrics_mod.macro_auroc(predictions, truth)
    except ValueError as exc:
        logger.warning("auroc undefined: %s", exc)
        values["auroc"] = float("nan")
    per_label_acc = []
    for t, target in enumerate(target_names):
        mask = ~np.isnan(truth[:, t])
        if not mask.any():
            logger.warning("accuracy undefined for label %r: no observations", target)
            acc = float("nan")
        else:
            acc = metrics_mod.accuracy(predictions[mask, t], truth[mask, t])
        per_label_acc.append(acc)
        if n_targets > 1:
            values[f"accuracy[{target}]"] = acc
            try:
                values[f"auroc[{target}]"] = metrics_mod.auroc(
                    predictions[mask, t], truth[mask, t])
            except ValueError as exc:
                logger.warning("auroc undefined for label %r: %s", target, exc)
                values[f"auroc[{target}]"] = float("nan")
    values["accuracy"] = float(np.nanmean(per_label_acc)) \
        if not all(np.isnan(v) for v in per_label_acc) else float("nan")
    return values


def _write_reports(report: metrics_mod.MetricReport, output_directory: Path,
                   problem_type: str):
    """Text and CSV views of one MetricReport, sharing float strings."""
    n_reps = report.n_repetitions
    aggregate = report.aggregate
    rep_headers = [f"repetition_{i}" for i in range(n_reps)]

    csv_path = output_directory / "report.csv"
    with open(csv_path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["metric", *rep_headers, "mean", "std"])
        for name in report.metric_names:
            mean, std = aggregate[name]
            writer.writerow([
                name,
                *(_float_str(v) for v in report.per_repetition[name]),
                _float_str(mean), _float_str(std),
            ])

    txt_path = output_directory / "report.txt"
    name_width = max(len(n) for n in report.metric_names)
    lines = [
        f"test-set metrics ({problem_type}, {n_reps} repetition"
        f"{'s' if n_reps != 1 else ''})",
        "",
    ]
    for name in report.metric_names:
        mean, std = aggregate[name]
        lines.append(f"{name.ljust(name_width)}  {_float_str(mean)} "
                     f"+/- {_float_str(std)}")
    lines.append("")
    lines.append("per-repetition values")
    for name in report.metric_names:
        values = "  ".join(_float_str(v) for v in report.per_repetition[name])
        lines.append(f"{name.ljust(name_width)}  {values}")
    txt_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    logger.info("wrote %s and %s", txt_path, csv_path)


def cmd_train(config: RunConfig) -> int:
    output_directory = Path(config.output_directory)
    output_directory.mkdir(parents=True, exist_ok=True)

    dataset = load_dataset(config.input_file, config.smiles_column,
                           config.target_columns)
    logger.info("loaded %d molecules (%d rows dropped) from %s",
                len(dataset), len(dataset.drop_report), config.input_file)

    started = time.perf_counter()
    matrix = cached_descriptors(dataset, config.descriptor_set,
                                input_file=config.input_file)
    descriptor_seconds = time.perf_counter() - started
    logger.info("featurization: %d descriptors x %d molecules in %.2f s",
                len(matrix.columns), len(dataset), descriptor_seconds)

    task = neural.REGRESSION if config.problem_type == "regression" \
        else neural.MULTILABEL
    target_names = dataset.target_names
    report = metrics_mod.MetricReport()
    run_config_dict = dataclasses.asdict(config)
    training_seconds = 0.0

    for repetition in range(config.number_repeats):
        seed = config.random_seed + repetition
        split = random_split(len(dataset), config.train_size, config.val_size,
                             config.test_size, seed)
        x, y = matrix.values, dataset.targets
        clamp = config.clamp_bound if config.clamp_input else None
        feature_scaler = fit_scaler(x[split.train], matrix.columns,
                                    clamp_bound=clamp)
        target_scaler = None
        if config.problem_type == "regression":
            target_scaler = fit_scaler(y[split.train], target_names,
                                       target_flag=True)

        def prep(rows):
            features = transform(feature_scaler, x[rows], matrix.columns)
            if target_scaler is not None:
                targets = transform(target_scaler, y[rows], target_names)
            else:
                targets = y[rows]
            return features, targets

        x_train, y_train = prep(split.train)
        x_val, y_val = prep(split.val)

        spec = neural.NetworkSpec(
            input_dim=len(feature_scaler.kept_columns),
            output_dim=len(target_names),
            hidden_layers=config.hidden_layers,
            hidden_width=config.hidden_width,
            task=task,
        )
        train_config = neural.TrainConfig(
            number_epochs=config.number_epochs,
            batch_size=config.batch_size,
            patience=config.patience,
            learning_rate=config.learning_rate,
            random_seed=seed,
        )
        started = time.perf_counter()
        result = neural.train_model(spec, train_config, x_train, y_train,
                                    x_val, y_val)
        elapsed = time.perf_counter() - started
        training_seconds += elapsed
        logger.info(
            "repetition %d: best epoch %d (val loss %.6f), %d epochs run, %.2f s",
            repetition, result.best_epoch, result.best_val_loss,
            len(result.log), elapsed)

        ckpt = checkpoint_mod.ModelCheckpoint(
            spec=spec,
            parameters=result.parameters,
            feature_scaler=feature_scaler,
            target_scaler=target_scaler,
            descriptor_set_name=config.descriptor_set,
            descriptor_columns=matrix.columns,
            catalogue_version=CATALOGUE_VERSION,
            target_names=target_names,
            run_config=run_config_dict,
            seed=seed,
            repetition=repetition,
        )
        path = checkpoint_mod.save_checkpoint(ckpt, output_directory)
        logger.info("repetition %d: checkpoint saved to %s", repetition, path)

        predictions = checkpoint_mod.predict(ckpt, x[split.test], matrix.columns)
        truth = y[split.test]
        if config.problem_type == "regression":
            values = _regression_metrics(predictions, truth, target_names)
        else:
            values = _multilabel_metrics(predictions, truth, target_names)
        for name, value in values.items():
            report.record(name, value)

    logger.info("training: %d repetitions in %.2f s total",
                config.number_repeats, training_seconds)
    _write_reports(report, output_directory, config.problem_type)
    write_config_snapshot(config, output_directory)
    for name, (mean, std) in report.aggregate.items():
        logger.info("%s: %s +/- %s", name, _float_str(mean), _float_str(std))
    return 0


# -- predict / shap --------------------------------------------------------


def _read_smiles_column(path: str | Path, smiles_column: str) -> list[str]:
    try:
        handle = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise DescpropError(f"cannot open input {path}: {exc}") from exc
    with handle:
        reader = csv.DictReader(handle)
        if smiles_column not in (reader.fieldnames or []):
            raise DescpropError(
                f"column {smiles_column!r} not found in {path} "
                f"(header: {reader.fieldnames})")
        return [(row.get(smiles_column) or "").strip() for row in reader]


def _parse_rows(smiles_list) -> tuple[list, list[int]]:
    """Parse what can be parsed; return (molecules, valid row indices)."""
    mols, valid = [], []
    for index, text in enumerate(smiles_list):
        try:
            mols.append(standardize(parse_smiles(text)))
            valid.append(index)
        except SmilesParseError as exc:
            logger.warning("input row %d: invalid SMILES %r (%s)",
                           index + 1, text, exc)
    return mols, valid


def cmd_predict(checkpoint_dir: str, input_path: str,
                output_path: str | None = None) -> int:
    checkpoints = checkpoint_mod.load_checkpoints(checkpoint_dir)
    first = checkpoints[0]
    smiles_column = str(first.run_config.get("smiles_column", "smiles"))
    smiles_list = _read_smiles_column(input_path, smiles_column)
    mols, valid = _parse_rows(smiles_list)
    logger.info("predicting %d rows (%d valid) with %d checkpoints",
                len(smiles_list), len(valid), len(checkpoints))

    n_targets = len(first.target_names)
    if mols:
        descriptor_set = get_descriptor_set(first.descriptor_set_name)
        matrix = compute_matrix(mols, descriptor_set)
        per_checkpoint = [
            checkpoint_mod.predict(ckpt, matrix.values, matrix.columns)
            for ckpt in checkpoints
        ]
        stacked = np.stack(per_checkpoint)    # (n_ckpt, n_valid, n_targets)
        ensemble = stacked.mean(axis=0)
    else:
        logger.warning("no valid SMILES rows; writing empty predictions")
        stacked = np.zeros((len(checkpoints), 0, n_targets))
        ensemble = np.zeros((0, n_targets))
    row_of = {row: i for i, row in enumerate(valid)}

    if output_path is None:
        output_path = Path(checkpoint_dir) / PREDICTIONS_NAME
    output_path = Path(output_path)
    header = [smiles_column]
    for target in first.target_names:
        header.append(target)
        header.extend(f"{target}_checkpoint_{c.repetition}" for c in checkpoints)
    with open(output_path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(header)
        for row, text in enumerate(smiles_list):
            cells = [text]
            for t in range(n_targets):
                if row in row_of:
                    i = row_of[row]
                    cells.append(_float_str(ensemble[i, t]))
                    cells.extend(_float_str(stacked[c, i, t])
                                 for c in range(len(checkpoints)))
                else:
                    cells.extend([""] * (1 + len(checkpoints)))
            writer.writerow(cells)
    logger.info("wrote %s", output_path)
    return 0


def cmd_shap(checkpoint_dir: str, input_path: str,
             n_permutations: int = attribution_mod.DEFAULT_PERMUTATIONS,
             seed: int = 0) -> int:
    checkpoints = checkpoint_mod.load_checkpoints(checkpoint_dir)
    first = checkpoints[0]
    smiles_column = str(first.run_config.get("smiles_column", "smiles"))
    smiles_list = _read_smiles_column(input_path, smiles_column)
    mols, valid = _parse_rows(smiles_list)
    if not mols:
        raise DescpropError("no valid SMILES rows to attribute")
    logger.info("attributing %d rows with %d permutations per instance "
                "(seed %d) across %d checkpoints",
                len(mols), n_permutations, seed, len(checkpoints))

    descriptor_set = get_descriptor_set(first.descriptor_set_name)
    matrix = compute_matrix(mols, descriptor_set)

    # columns dropped by a checkpoint's scaler carry zero attribution
    full_index = {name: j for j, name in enumerate(matrix.columns)}
    total_abs = {name: 0.0 for name in matrix.columns}
    per_instance = np.zeros((len(mols), len(matrix.columns),
                             len(first.target_names)))
    for ckpt in checkpoints:
        importance = attribution_mod.dataset_importance(
            ckpt, matrix.values, matrix.columns,
            n_permutations=n_permutations, seed=seed)
        kept_rows = [full_index[name] for name in importance.feature_names]
        for name, value in zip(importance.feature_names,
                               importance.mean_abs_attribution):
            total_abs[name] += float(value)
        for row, result in enumerate(importance.attributions):
            per_instance[row, kept_rows] += result.values
    n_ckpt = len(checkpoints)
    mean_abs = {name: total / n_ckpt for name, total in total_abs.items()}
    per_instance /= n_ckpt

    out_dir = Path(checkpoint_dir)
    importance_path = out_dir / IMPORTANCE_NAME
    ranked = sorted(matrix.columns, key=lambda n: -mean_abs[n])
    with open(importance_path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["descriptor", "mean_abs_attribution"])
        for name in ranked:
            writer.writerow([name, _float_str(mean_abs[name])])

    attributions_path = out_dir / ATTRIBUTIONS_NAME
    with open(attributions_path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["row", smiles_column, "descriptor",
                         *first.target_names])
        for i, row in enumerate(valid):
            for j, name in enumerate(matrix.columns):
                writer.writerow([
                    row + 1, smiles_list[row], name,
                    *(_float_str(v) for v in per_instance[i, j]),
                ])
    logger.info("wrote %s and %s", importance_path, attributions_path)
    return 0


# -- argument parsing -------------------------------------------------------


def _parse_overrides(tokens) -> dict:
    """``--kebab-key value`` pairs after the config path -> config keys."""
    overrides: dict = {}
    index = 0
    while index < len(tokens):
        token = tokens[index]
        if not token.startswith("--"):
            raise DescpropError(f"expected an option, got {token!r}")
        key = token[2:].replace("-", "_")
        if index + 1 >= len(tokens):
            raise DescpropError(f"option {token} is missing a value")
        overrides[key] = coerce_scalar(tokens[index + 1])
        index += 2
    return overrides


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="descprop",
        description="descriptor-based molecular property prediction")
    parser.add_argument("-v", "--verbose", action="store_true",
                        help="debug-level logging")
    sub = parser.add_subparsers(dest="verb", required=True)

    train = sub.add_parser("train", help="train models from a config file")
    train.add_argument("config", help="path to a key: value config file")

    predict = sub.add_parser("predict", help="predict with saved checkpoints")
    predict.add_argument("--checkpoint-dir", required=True)
    predict.add_argument("--input", required=True, help="CSV with a SMILES column")
    predict.add_argument("--output", default=None,
                         help="output CSV (default: <checkpoint-dir>/predictions.csv)")

    shap = sub.add_parser("shap", help="rank descriptors by Shapley attribution")
    shap.add_argument("--checkpoint-dir", required=True)
    shap.add_argument("--input", required=True, help="CSV with a SMILES column")
    shap.add_argument("--permutations", type=int,
                      default=attribution_mod.DEFAULT_PERMUTATIONS)
    shap.add_argument("--seed", type=int, default=0)
    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args, extra = parser.parse_known_args(argv)
    setup_logging(args.verbose)
    try:
        if args.verb == "train":
            config = parse_config(args.config, _parse_overrides(extra))
            return cmd_train(config)
        if extra:
            parser.error(f"unrecognized arguments: {' '.join(extra)}")
        if args.verb == "predict":
            return cmd_predict(args.checkpoint_dir, args.input, args.output)
        if args.verb == "shap":
            return cmd_shap(args.checkpoint_dir, args.input,
                            args.permutations, args.seed)
    except DescpropError as exc:
        logger.error("%s", exc)
        return 1
    except (ValueError, OSError) as exc:
        logger.error("%s", exc)
        return 1
    parser.error(f"unknown verb {args.verb!r}")
    return 2


if __name__ == "__main__":
    raise SystemExit(main())
