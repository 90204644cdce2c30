#!/usr/bin/env python3
"""Benchmark the descriptor network against a linear readout on PAH logP.

Trains the default two-hidden-layer network and a zero-hidden-layer
baseline on the same splits, then prints the aggregated test metrics side
by side. Run scripts/build_pah_dataset.py first if data/pah_logp.csv does
not exist yet.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from descprop.cli import cmd_train, setup_logging
from descprop.config import RunConfig


def read_report(output_directory: Path) -> dict[str, tuple[float, float]]:
    with open(output_directory / "report.csv", newline="", encoding="utf-8") as handle:
        rows = list(csv.DictReader(handle))
    return {row["metric"]: (float(row["mean"]), float(row["std"])) for row in rows}


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--data", default="data/pah_logp.csv")
    parser.add_argument("--output", default="results/pah_benchmark")
    parser.add_argument("--repeats", type=int, default=8)
    parser.add_argument("--seed", type=int, default=55)
    parser.add_argument("-v", "--verbose", action="store_true")
    args = parser.parse_args()
    setup_logging(args.verbose)

    base = Path(args.output)
    network_config = RunConfig(
        input_file=args.data,
        target_columns=("log_p",),
        smiles_column="smiles",
        output_directory=str(base / "network"),
        random_seed=args.seed,
        descriptor_set="all",
        clamp_input=True,
        number_repeats=args.repeats,
        number_epochs=100,
        batch_size=64,
        patience=15,
        train_size=0.8,
        val_size=0.1,
        test_size=0.1,
    )
    linear_config = dataclasses.replace(
        network_config, hidden_layers=0, output_directory=str(base / "linear"))

    timings = {}
    for label, config in (("network", network_config), ("linear", linear_config)):
        start = time.monotonic()
        cmd_train(config)
        timings[label] = time.monotonic() - start

    network = read_report(base / "network")
    linear = read_report(base / "linear")
    print(f"\nPAH logP benchmark: {args.repeats} repetitions, seed {args.seed}")
    print(f"{'metric':<12} {'network (2x1800)':>24} {'linear readout':>24}")
    for metric in network:
        n_mean, n_std = network[metric]
        l_mean, l_std = linear[metric]
        print(f"{metric:<12} {n_mean:>14.4f} +/- {n_std:<6.4f}"
              f" {l_mean:>14.4f} +/- {l_std:<6.4f}")
    print(f"{'wall time':<12} {timings['network']:>14.1f} s"
          f" {'':<8}{timings['linear']:>13.1f} s")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
