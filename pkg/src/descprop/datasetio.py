"""Dataset loading, split generation, and the descriptor cache.

CSV files are expected to carry a header naming a SMILES column and one
or more numeric target columns. Rows are dropped, with a recorded reason,
when the SMILES fails to parse or when no usable target value remains;
multitask rows may keep partial targets (missing entries become NaN and
are masked during training).
"""
from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .descriptors import (CATALOGUE_VERSION, DescriptorMatrix, DescriptorSet,
                          compute_matrix, get_descriptor_set)
from .errors import DataError, SmilesParseError
from .molparse import MolecularGraph, parse_smiles, standardize

logger = logging.getLogger(__name__)

CACHE_SUFFIX = ".fpcache"


@dataclass
class DropReport:
    """Rows removed during loading: (1-based data row number, reason)."""

    entries: list[tuple[int, str]] = field(default_factory=list)

    def add(self, row_number: int, reason: str):
        self.entries.append((row_number, reason))

    def __len__(self) -> int:
        return len(self.entries)


@dataclass
class Dataset:
    """Loaded molecules with aligned target values."""

    smiles: tuple[str, ...]
    mols: tuple[MolecularGraph, ...]
    targets: np.ndarray              # (n_rows, n_targets), NaN = missing
    target_names: tuple[str, ...]
    identifiers: tuple[str, ...] | None = None
    drop_report: DropReport = field(default_factory=DropReport)

    def __len__(self) -> int:
        return len(self.smiles)


def _parse_target(cell: str) -> float:
    text = cell.strip() if cell is not None else ""
    if not text:
        return float("nan")
    try:
        return float(text)
    except ValueError:
        return float("nan")


def load_dataset(path: str | Path, smiles_column: str, target_columns,
                 identifier_column: str | None = None) -> Dataset:
    """Read a CSV of SMILES and targets, dropping unusable rows.

    Drop rules: unparseable SMILES, or no non-missing value across the
    target columns. Duplicated SMILES strings are kept but logged.

    Raises:
        DataError: missing file, missing columns, or zero surviving rows.
    """
    path = Path(path)
    target_columns = tuple(target_columns)
    if not target_columns:
        raise DataError("at least one target column is required")
    try:
        handle = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot open dataset {path}: {exc}") from exc
    with handle:
        reader = csv.DictReader(handle)
        header = reader.fieldnames or []
        for needed in (smiles_column, *target_columns):
            if needed not in header:
                raise DataError(
                    f"column {needed!r} not found in {path} (header: {header})")
        if identifier_column is not None and identifier_column not in header:
            raise DataError(f"identifier column {identifier_column!r} not found in {path}")

        report = DropReport()
        smiles_list: list[str] = []
        mols: list[MolecularGraph] = []
        target_rows: list[list[float]] = []
        identifiers: list[str] = []
        seen: set[str] = set()
        for row_number, row in enumerate(reader, start=1):
            raw_smiles = (row.get(smiles_column) or "").strip()
            try:
                mol = standardize(parse_smiles(raw_smiles))
            except SmilesParseError as exc:
                report.add(row_number, f"invalid SMILES: {exc}")
                continue
            values = [_parse_target(row.get(name)) for name in target_columns]
            if all(np.isnan(v) for v in values):
                label = "target" if len(values) == 1 else "all targets"
                report.add(row_number, f"missing {label}")
                continue
            if raw_smiles in seen:
                logger.warning("duplicate SMILES %r at data row %d kept",
                               raw_smiles, row_number)
            seen.add(raw_smiles)
            smiles_list.append(raw_smiles)
            mols.append(mol)
            target_rows.append(values)
            if identifier_column is not None:
                identifiers.append((row.get(identifier_column) or "").strip())

    for row_number, reason in report.entries:
        logger.info("dropped data row %d: %s", row_number, reason)
    if not smiles_list:
        raise DataError(f"no usable rows remain after filtering {path}")
    return Dataset(
        smiles=tuple(smiles_list),
        mols=tuple(mols),
        targets=np.array(target_rows, dtype=np.float64),
        target_names=target_columns,
        identifiers=tuple(identifiers) if identifier_column is not None else None,
        drop_report=report,
    )


@dataclass(frozen=True)
class SplitIndices:
    """Row indices of one train/validation/test partition."""

    train: np.ndarray
    val: np.ndarray
    test: np.ndarray


def random_split(n_rows: int, train_size: float, val_size: float,
                 test_size: float, seed: int) -> SplitIndices:
    """Shuffled partition with floor-sized train and validation blocks.

    Train takes floor(train_size * n), validation floor(val_size * n),
    and test everything left, so the three blocks exhaust the rows.

    Raises:
        ValueError: if the fractions do not sum to 1 or any block is empty.
    """
    if abs(train_size + val_size + test_size - 1.0) > 1e-9:
        raise ValueError("split fractions must sum to 1")
    if min(train_size, val_size, test_size) <= 0:
        raise ValueError("split fractions must be positive")
    n_train = int(np.floor(train_size * n_rows))
    n_val = int(np.floor(val_size * n_rows))
    n_test = n_rows - n_train - n_val
    if n_train < 1 or n_val < 1 or n_test < 1:
        raise ValueError(
            f"split of {n_rows} rows leaves an empty block "
            f"(train={n_train}, val={n_val}, test={n_test})")
    order = np.random.default_rng(seed).permutation(n_rows)
    return SplitIndices(
        train=order[:n_train],
        val=order[n_train:n_train + n_val],
        test=order[n_train + n_val:],
    )


# -- descriptor cache ----------------------------------------------------


def default_cache_path(input_file: str | Path) -> Path:
    """Cache location next to the input CSV: ``<stem>.fpcache``."""
    input_file = Path(input_file)
    return input_file.with_name(input_file.stem + CACHE_SUFFIX)


def _cache_key(smiles, descriptor_set: DescriptorSet) -> str:
    digest = hashlib.sha256()
    for s in smiles:
        digest.update(s.encode("utf-8"))
        digest.update(b"\n")
    digest.update(descriptor_set.name.encode("utf-8"))
    digest.update(b"\x00")
    digest.update(CATALOGUE_VERSION.encode("utf-8"))
    return digest.hexdigest()


def cached_descriptors(dataset: Dataset, descriptor_set: DescriptorSet | str,
                       cache_path: str | Path | None = None,
                       input_file: str | Path | None = None) -> DescriptorMatrix:
    """Descriptor matrix for a dataset, reusing an on-disk cache when valid.

    The cache is keyed by the SMILES list, the descriptor-set name, and
    the catalogue version; any mismatch or unreadable file triggers a
    recompute and rewrite. Pass ``cache_path=None`` with no input file to
    skip caching entirely.
    """
    if isinstance(descriptor_set, str):
        descriptor_set = get_descriptor_set(descriptor_set)
    if cache_path is None and input_file is not None:
        cache_path = default_cache_path(input_file)
    key = _cache_key(dataset.smiles, descriptor_set)

    if cache_path is not None:
        cache_path = Path(cache_path)
        if cache_path.exists():
            matrix = _read_cache(cache_path, key, descriptor_set)
            if matrix is not None:
                logger.info("descriptor cache hit: %s", cache_path)
                return matrix

    matrix = compute_matrix(dataset.mols, descriptor_set)
    if cache_path is not None:
        _write_cache(cache_path, key, descriptor_set, matrix)
    return matrix


def _read_cache(cache_path: Path, key: str,
                descriptor_set: DescriptorSet) -> DescriptorMatrix | None:
    try:
        with open(cache_path, "rb") as handle:
            payload = np.load(handle, allow_pickle=False)
            meta = json.loads(bytes(payload["meta"]).decode("utf-8"))
            values = payload["values"]
    except Exception as exc:
        logger.warning("descriptor cache %s unreadable (%s); recomputing",
                       cache_path, exc)
        return None
    if meta.get("key") != key:
        logger.info("descriptor cache %s is stale; recomputing", cache_path)
        return None
    columns = tuple(meta.get("columns", ()))
    if columns != descriptor_set.descriptors or values.shape[1] != len(columns):
        logger.warning("descriptor cache %s does not match the catalogue; recomputing",
                       cache_path)
        return None
    return DescriptorMatrix(columns, np.asarray(values, dtype=np.float64))


def _write_cache(cache_path: Path, key: str, descriptor_set: DescriptorSet,
                 matrix: DescriptorMatrix):
    meta = json.dumps({
        "key": key,
        "descriptor_set": descriptor_set.name,
        "catalogue_version": CATALOGUE_VERSION,
        "columns": list(matrix.columns),
    }).encode("utf-8")
    buffer = io.BytesIO()
    np.savez(buffer, meta=np.frombuffer(meta, dtype=np.uint8),
             values=matrix.values)
    try:
        cache_path.write_bytes(buffer.getvalue())
        logger.info("descriptor cache written: %s", cache_path)
    except OSError as exc:
        logger.warning("could not write descriptor cache %s: %s", cache_path, exc)
