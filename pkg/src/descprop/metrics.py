"""Evaluation metrics for regression and multilabel classification.

All regression metrics take predictions first, truth second, as flat
arrays. Percentage-style errors are returned as fractions; report writers
multiply by 100 where a percent display is wanted.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

logger = logging.getLogger(__name__)


def _as_pair(predictions, truth) -> tuple[np.ndarray, np.ndarray]:
    p = np.asarray(predictions, dtype=np.float64).ravel()
    t = np.asarray(truth, dtype=np.float64).ravel()
    if p.shape != t.shape:
        raise ValueError(f"shape mismatch: predictions {p.shape} vs truth {t.shape}")
    if p.size == 0:
        raise ValueError("metrics need at least one sample")
    return p, t


def mae(predictions, truth) -> float:
    """Mean absolute error."""
    p, t = _as_pair(predictions, truth)
    return float(np.abs(p - t).mean())


def rmse(predictions, truth) -> float:
    """Root mean squared error."""
    p, t = _as_pair(predictions, truth)
    return float(np.sqrt(((p - t) ** 2).mean()))


def mape(predictions, truth) -> float:
    """Mean absolute percentage error, as a fraction.

    Raises:
        ValueError: if any truth value is zero.
    """
    p, t = _as_pair(predictions, truth)
    if np.any(t == 0):
        raise ValueError("mape undefined when a truth value is zero")
    return float(np.abs((p - t) / t).mean())


def wmape(predictions, truth) -> float:
    """Weighted MAPE: sum of absolute errors over sum of absolute truths.

    Raises:
        ValueError: if the truth values sum to zero in absolute value.
    """
    p, t = _as_pair(predictions, truth)
    denom = float(np.abs(t).sum())
    if denom == 0:
        raise ValueError("wmape undefined when all truth values are zero")
    return float(np.abs(p - t).sum() / denom)


def r2(predictions, truth) -> float:
    """Coefficient of determination, 1 - SS_res / SS_tot.

    Raises:
        ValueError: if the truth values are constant.
    """
    p, t = _as_pair(predictions, truth)
    ss_tot = float(((t - t.mean()) ** 2).sum())
    if ss_tot == 0:
        raise ValueError("r2 undefined for constant truth values")
    ss_res = float(((t - p) ** 2).sum())
    return 1.0 - ss_res / ss_tot


def pearson_r(predictions, truth) -> float:
    """Pearson correlation between predictions and truth.

    Raises:
        ValueError: if either side is constant.
    """
    p, t = _as_pair(predictions, truth)
    pc = p - p.mean()
    tc = t - t.mean()
    denom = float(np.sqrt((pc ** 2).sum() * (tc ** 2).sum()))
    if denom == 0:
        raise ValueError("pearson correlation undefined for constant input")
    return float((pc * tc).sum() / denom)


def auroc(scores, labels) -> float:
    """Area under the ROC curve for one binary label.

    Computed from the Mann-Whitney statistic with midranks, which is
    equivalent to counting correctly ordered positive/negative pairs with
    ties worth one half.

    Raises:
        ValueError: if only one class is present.
    """
    s = np.asarray(scores, dtype=np.float64).ravel()
    y = np.asarray(labels).ravel().astype(int)
    if s.shape != y.shape:
        raise ValueError("scores and labels must have the same length")
    n_pos = int((y == 1).sum())
    n_neg = int((y == 0).sum())
    if n_pos + n_neg != y.size:
        raise ValueError("labels must be 0 or 1")
    if n_pos == 0 or n_neg == 0:
        raise ValueError("auroc undefined with a single class")
    order = np.argsort(s, kind="mergesort")
    ranks = np.empty(s.size, dtype=np.float64)
    sorted_scores = s[order]
    i = 0
    while i < s.size:
        j = i
        while j + 1 < s.size and sorted_scores[j + 1] == sorted_scores[i]:
            j += 1
        ranks[order[i:j + 1]] = 0.5 * (i + j) + 1.0  # midrank, 1-based
        i = j + 1
    rank_sum_pos = float(ranks[y == 1].sum())
    u = rank_sum_pos - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def macro_auroc(scores, labels) -> float:
    """Mean AUROC over label columns, skipping single-class columns.

    Skipped columns are logged as warnings.

    Raises:
        ValueError: if every column is single-class.
    """
    s = np.asarray(scores, dtype=np.float64)
    y = np.asarray(labels, dtype=np.float64)
    if s.ndim == 1:
        s = s[:, None]
    if y.ndim == 1:
        y = y[:, None]
    if s.shape != y.shape:
        raise ValueError("scores and labels must have the same shape")
    values = []
    for j in range(y.shape[1]):
        mask = ~np.isnan(y[:, j])
        try:
            values.append(auroc(s[mask, j], y[mask, j]))
        except ValueError:
            logger.warning("auroc skipped for label column %d (single class)", j)
    if not values:
        raise ValueError("auroc undefined: every label column is single-class")
    return float(np.mean(values))


def accuracy(scores, labels, threshold: float = 0.5) -> float:
    """Classification accuracy as a percentage; scores at or above the
    threshold count as positive predictions."""
    s = np.asarray(scores, dtype=np.float64).ravel()
    y = np.asarray(labels).ravel().astype(int)
    if s.shape != y.shape:
        raise ValueError("scores and labels must have the same length")
    if s.size == 0:
        raise ValueError("accuracy needs at least one sample")
    predicted = (s >= threshold).astype(int)
    return float((predicted == y).mean() * 100.0)


def aggregate_repetitions(values) -> tuple[float, float]:
    """Mean and sample standard deviation over repetition values.

    A single repetition has zero deviation by convention.
    """
    arr = np.asarray(values, dtype=np.float64).ravel()
    if arr.size == 0:
        raise ValueError("no repetition values to aggregate")
    mean = float(arr.mean())
    std = float(arr.std(ddof=1)) if arr.size > 1 else 0.0
    return mean, std


@dataclass
class MetricReport:
    """Metric values collected across repetitions of a run.

    The aggregate view is always derived from the stored per-repetition
    values, so the two can never drift apart.
    """

    per_repetition: dict[str, list[float]] = field(default_factory=dict)

    def record(self, metric: str, value: float):
        self.per_repetition.setdefault(metric, []).append(value)

    @property
    def metric_names(self) -> tuple[str, ...]:
        return tuple(self.per_repetition)

    @property
    def n_repetitions(self) -> int:
        counts = {len(v) for v in self.per_repetition.values()}
        if len(counts) != 1:
            raise ValueError("metrics recorded for differing repetition counts")
        return counts.pop()

    @property
    def aggregate(self) -> dict[str, tuple[float, float]]:
        return {name: aggregate_repetitions(values)
                for name, values in self.per_repetition.items()}
