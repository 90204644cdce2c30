"""Trained-model checkpoints: a single self-describing file per repetition.

Layout: an ASCII magic line, a format line, a header-length line, a JSON
header (network spec, scalers, descriptor manifest, catalogue version, run
config snapshot, seed, array directory), then the raw weight arrays as
little-endian float64, in directory order. JSON carries floats through
``repr`` so scaler statistics round-trip exactly; weights round-trip
bit-identically through the binary payload.
"""
from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import descriptors
from .errors import CheckpointError
from .neural import NetworkParameters, NetworkSpec, forward
from .preprocess import ScalerState, inverse_transform, transform

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1
_MAGIC = b"DESCPROP-CHECKPOINT\n"
_FILE_PATTERN = re.compile(r"^checkpoint_(\d+)$")


@dataclass
class ModelCheckpoint:
    """Everything needed to reproduce a trained repetition's predictions."""

    spec: NetworkSpec
    parameters: NetworkParameters
    feature_scaler: ScalerState
    target_scaler: ScalerState | None
    descriptor_set_name: str
    descriptor_columns: tuple[str, ...]
    catalogue_version: str
    target_names: tuple[str, ...]
    run_config: dict
    seed: int
    repetition: int = 0
    format_version: int = FORMAT_VERSION

    def __post_init__(self):
        manifest = self.feature_scaler.kept_columns
        if len(manifest) != self.spec.input_dim:
            raise CheckpointError(
                f"descriptor manifest length {len(manifest)} does not match "
                f"network input_dim {self.spec.input_dim}")
        if len(self.target_names) != self.spec.output_dim:
            raise CheckpointError("target name count does not match output_dim")

    @property
    def manifest(self) -> tuple[str, ...]:
        """Ordered descriptor names the network consumes."""
        return self.feature_scaler.kept_columns


def predict(checkpoint: ModelCheckpoint, values: np.ndarray, columns) -> np.ndarray:
    """Predictions in target units for a raw descriptor matrix.

    The matrix must carry exactly the descriptor-set columns recorded in
    the checkpoint; anything missing or extra is reported by name.
    """
    columns = tuple(columns)
    expected = set(checkpoint.descriptor_columns)
    got = set(columns)
    if got != expected:
        missing = sorted(expected - got)
        extra = sorted(got - expected)
        raise CheckpointError(
            "descriptor manifest mismatch: "
            f"missing columns {missing!r}, unexpected columns {extra!r}")
    z = transform(checkpoint.feature_scaler, values, columns)
    out = forward(checkpoint.spec, checkpoint.parameters, z)
    if checkpoint.target_scaler is not None:
        out = inverse_transform(checkpoint.target_scaler, out)
    return out


# -- serialization -------------------------------------------------------


def _scaler_to_json(state: ScalerState | None):
    if state is None:
        return None
    return {
        "kept_columns": list(state.kept_columns),
        "means": [float(v) for v in state.means],
        "stds": [float(v) for v in state.stds],
        "clamp_bound": state.clamp_bound,
        "target_flag": state.target_flag,
    }


def _scaler_from_json(data) -> ScalerState | None:
    if data is None:
        return None
    return ScalerState(
        kept_columns=tuple(data["kept_columns"]),
        means=np.array(data["means"], dtype=np.float64),
        stds=np.array(data["stds"], dtype=np.float64),
        clamp_bound=data["clamp_bound"],
        target_flag=data["target_flag"],
    )


def checkpoint_path(directory: str | Path, repetition: int) -> Path:
    return Path(directory) / f"checkpoint_{repetition}"


def save_checkpoint(checkpoint: ModelCheckpoint, directory: str | Path) -> Path:
    """Write ``checkpoint_<repetition>`` under ``directory``; returns the path."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    arrays = []
    directory_entries = []
    for i, (w, b) in enumerate(checkpoint.parameters):
        for suffix, arr in (("w", w), ("b", b)):
            arr = np.ascontiguousarray(arr, dtype="<f8")
            arrays.append(arr)
            directory_entries.append(
                {"name": f"layer{i}_{suffix}", "shape": list(arr.shape)})
    header = {
        "format_version": checkpoint.format_version,
        "catalogue_version": checkpoint.catalogue_version,
        "descriptor_set_name": checkpoint.descriptor_set_name,
        "descriptor_columns": list(checkpoint.descriptor_columns),
        "spec": {
            "input_dim": checkpoint.spec.input_dim,
            "output_dim": checkpoint.spec.output_dim,
            "hidden_layers": checkpoint.spec.hidden_layers,
            "hidden_width": checkpoint.spec.hidden_width,
            "task": checkpoint.spec.task,
        },
        "feature_scaler": _scaler_to_json(checkpoint.feature_scaler),
        "target_scaler": _scaler_to_json(checkpoint.target_scaler),
        "target_names": list(checkpoint.target_names),
        "run_config": checkpoint.run_config,
        "seed": checkpoint.seed,
        "repetition": checkpoint.repetition,
        "arrays": directory_entries,
    }
    payload = json.dumps(header, sort_keys=True).encode("utf-8")
    path = checkpoint_path(directory, checkpoint.repetition)
    with open(path, "wb") as handle:
        handle.write(_MAGIC)
        handle.write(f"format {FORMAT_VERSION}\n".encode("ascii"))
        handle.write(f"header {len(payload)}\n".encode("ascii"))
        handle.write(payload)
        for arr in arrays:
            handle.write(arr.tobytes())
    logger.debug("wrote checkpoint %s", path)
    return path


def load_checkpoint(path: str | Path) -> ModelCheckpoint:
    """Read one checkpoint file back.

    Raises:
        CheckpointError: on bad magic, a format version mismatch, a
            descriptor catalogue version mismatch, or a truncated payload.
    """
    path = Path(path)
    try:
        blob = path.read_bytes()
    except OSError as exc:
        raise CheckpointError(f"cannot read checkpoint {path}: {exc}") from exc
    if not blob.startswith(_MAGIC):
        raise CheckpointError(f"{path} is not a checkpoint file (bad magic)")
    rest = blob[len(_MAGIC):]
    try:
        format_line, rest = rest.split(b"\n", 1)
        header_line, rest = rest.split(b"\n", 1)
        file_version = int(format_line.split()[1])
        header_len = int(header_line.split()[1])
    except (ValueError, IndexError) as exc:
        raise CheckpointError(f"{path} has a malformed header block") from exc
    if file_version != FORMAT_VERSION:
        raise CheckpointError(
            f"checkpoint format version {file_version} in {path} is not "
            f"readable by this build (expected {FORMAT_VERSION})")
    if len(rest) < header_len:
        raise CheckpointError(f"{path} is truncated inside the JSON header")
    try:
        header = json.loads(rest[:header_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CheckpointError(f"{path} has an unreadable JSON header") from exc
    body = rest[header_len:]

    if header["catalogue_version"] != descriptors.CATALOGUE_VERSION:
        raise CheckpointError(
            f"checkpoint {path} was built with descriptor catalogue "
            f"{header['catalogue_version']!r}; this build provides "
            f"{descriptors.CATALOGUE_VERSION!r}")

    offset = 0
    arrays = []
    for entry in header["arrays"]:
        shape = tuple(entry["shape"])
        nbytes = int(np.prod(shape)) * 8
        chunk = body[offset:offset + nbytes]
        if len(chunk) != nbytes:
            raise CheckpointError(f"{path} is truncated inside array payload")
        arrays.append(np.frombuffer(chunk, dtype="<f8").reshape(shape).copy())
        offset += nbytes
    if offset != len(body):
        raise CheckpointError(f"{path} has trailing bytes after array payload")
    if len(arrays) % 2 != 0:
        raise CheckpointError(f"{path} has an odd number of parameter arrays")
    parameters = [(arrays[i], arrays[i + 1]) for i in range(0, len(arrays), 2)]

    spec = NetworkSpec(**header["spec"])
    return ModelCheckpoint(
        spec=spec,
        parameters=parameters,
        feature_scaler=_scaler_from_json(header["feature_scaler"]),
        target_scaler=_scaler_from_json(header["target_scaler"]),
        descriptor_set_name=header["descriptor_set_name"],
        descriptor_columns=tuple(header["descriptor_columns"]),
        catalogue_version=header["catalogue_version"],
        target_names=tuple(header["target_names"]),
        run_config=header["run_config"],
        seed=header["seed"],
        repetition=header["repetition"],
        format_version=file_version,
    )


def load_checkpoints(directory: str | Path) -> list[ModelCheckpoint]:
    """All ``checkpoint_<i>`` files under a directory, ordered by index.

    Raises:
        CheckpointError: if the directory holds no checkpoint files.
    """
    directory = Path(directory)
    found = []
    if directory.is_dir():
        for entry in directory.iterdir():
            match = _FILE_PATTERN.match(entry.name)
            if match:
                found.append((int(match.group(1)), entry))
    if not found:
        raise CheckpointError(f"no checkpoint_<i> files found in {directory}")
    found.sort()
    return [load_checkpoint(path) for _, path in found]
