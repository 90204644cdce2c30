"""Feature and target rescaling.

Scaling statistics are always fit on training rows only and carried as an
explicit state object so validation, test, and inference data go through
exactly the same transform. Columns with no information (all missing, or
zero variance) are dropped at fit time; missing entries are imputed to the
column mean, which is zero after standardization.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ScalerState:
    """Fitted z-scoring parameters for a set of named columns."""

    kept_columns: tuple[str, ...]
    means: np.ndarray
    stds: np.ndarray
    clamp_bound: float | None = None
    target_flag: bool = False

    def __post_init__(self):
        object.__setattr__(self, "means", np.asarray(self.means, dtype=np.float64))
        object.__setattr__(self, "stds", np.asarray(self.stds, dtype=np.float64))
        if self.means.shape != (len(self.kept_columns),):
            raise ValueError("means length does not match kept columns")
        if self.stds.shape != (len(self.kept_columns),):
            raise ValueError("stds length does not match kept columns")
        if self.clamp_bound is not None and self.clamp_bound <= 0:
            raise ValueError("clamp bound must be positive")


def fit_scaler(values: np.ndarray, columns, *, clamp_bound: float | None = None,
               target_flag: bool = False) -> ScalerState:
    """Fit column means and sample standard deviations on training rows.

    Missing entries (NaN) are excluded from the statistics. Columns that
    are entirely missing, observed fewer than twice, or constant are
    dropped from the fitted state.

    Args:
        values: (n_rows, n_columns) array, NaN marking missing entries.
        columns: column names, one per input column.
        clamp_bound: optional symmetric bound, in standard deviations,
            applied to transformed values.
        target_flag: mark this scaler as acting on target columns.

    Raises:
        ValueError: on an empty matrix or if every column is dropped.
    """
    values = np.asarray(values, dtype=np.float64)
    if values.ndim == 1:
        values = values[:, None]
    columns = tuple(columns)
    if values.shape[0] == 0:
        raise ValueError("cannot fit a scaler on an empty matrix")
    if values.shape[1] != len(columns):
        raise ValueError("column names do not match matrix width")

    kept, means, stds = [], [], []
    for j, name in enumerate(columns):
        col = values[:, j]
        observed = col[~np.isnan(col)]
        if observed.size < 2:
            continue
        std = float(observed.std(ddof=1))
        if std == 0.0 or not np.isfinite(std):
            continue
        kept.append(name)
        means.append(float(observed.mean()))
        stds.append(std)
    if not kept:
        raise ValueError("every column was dropped (no informative columns)")
    return ScalerState(
        kept_columns=tuple(kept),
        means=np.array(means),
        stds=np.array(stds),
        clamp_bound=clamp_bound,
        target_flag=target_flag,
    )


def _column_indices(state: ScalerState, columns) -> list[int]:
    columns = list(columns)
    position = {name: i for i, name in enumerate(columns)}
    missing = [name for name in state.kept_columns if name not in position]
    if missing:
        raise ValueError(
            f"matrix is missing fitted column(s): {', '.join(missing)}")
    return [position[name] for name in state.kept_columns]


def transform(state: ScalerState, values: np.ndarray, columns) -> np.ndarray:
    """Z-score the fitted columns of ``values``.

    Missing entries become 0 (the standardized mean). When the state has a
    clamp bound, outputs are clipped to that many standard deviations.
    """
    values = np.asarray(values, dtype=np.float64)
    if values.ndim == 1:
        values = values[:, None]
    idx = _column_indices(state, columns)
    selected = values[:, idx]
    z = (selected - state.means) / state.stds
    z = np.where(np.isnan(z), 0.0, z)
    if state.clamp_bound is not None:
        z = np.clip(z, -state.clamp_bound, state.clamp_bound)
    return z


def inverse_transform(state: ScalerState, values: np.ndarray) -> np.ndarray:
    """Map standardized values back to the original units."""
    values = np.asarray(values, dtype=np.float64)
    if values.ndim == 1:
        values = values[:, None]
    if values.shape[1] != len(state.kept_columns):
        raise ValueError("value width does not match fitted columns")
    return values * state.stds + state.means
