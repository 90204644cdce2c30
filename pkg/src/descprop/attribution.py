"""Shapley-value feature attribution by permutation sampling.

A prediction is explained against the training-set mean: each sampled
permutation walks features from the baseline to the instance value one at
a time, and a feature's attribution is its average marginal effect on the
model output. Attributions are expressed in target units (probabilities
for multilabel models) and always sum to the difference between the
explained prediction and the baseline prediction, because the per-
permutation marginals telescope.

In standardized feature space the training mean is the zero vector, so
the baseline needs no extra bookkeeping.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .checkpoint import ModelCheckpoint
from .neural import forward
from .preprocess import inverse_transform, transform

logger = logging.getLogger(__name__)

DEFAULT_PERMUTATIONS = 128


@dataclass
class AttributionResult:
    """Per-feature Shapley estimates for one explained instance."""

    feature_names: tuple[str, ...]
    values: np.ndarray          # (n_features, n_targets), target units
    base_value: np.ndarray      # (n_targets,) model output at the baseline
    explained_output: np.ndarray  # (n_targets,) model output at the instance

    @property
    def per_feature(self) -> dict[str, np.ndarray]:
        return {name: self.values[i] for i, name in enumerate(self.feature_names)}


def _model_fn(checkpoint: ModelCheckpoint):
    """Standardized features -> outputs in target units."""
    def run(z: np.ndarray) -> np.ndarray:
        out = forward(checkpoint.spec, checkpoint.parameters, z)
        if checkpoint.target_scaler is not None:
            out = inverse_transform(checkpoint.target_scaler, out)
        return out
    return run


def shapley_attribution(checkpoint: ModelCheckpoint, instance: np.ndarray,
                        columns: tuple[str, ...] | None = None,
                        n_permutations: int = DEFAULT_PERMUTATIONS,
                        seed: int = 0) -> AttributionResult:
    """Estimate Shapley values for one raw feature vector.

    Args:
        checkpoint: trained model to explain.
        instance: raw (unscaled) descriptor values, aligned with
            ``columns`` when given, else with ``checkpoint.manifest``.
        columns: names matching the instance layout; may be a superset of
            the manifest (extra columns are ignored, as in prediction).
        n_permutations: sampled feature orderings; the estimate is exact
            for additive models regardless of this number.
        seed: seeds the permutation sampler; same seed, same estimate.
    """
    if n_permutations < 1:
        raise ValueError("n_permutations must be at least 1")
    manifest = checkpoint.manifest
    if columns is None:
        columns = manifest
    instance = np.asarray(instance, dtype=np.float64).ravel()
    if instance.shape != (len(columns),):
        raise ValueError(
            f"instance length {instance.size} does not match the "
            f"{len(columns)} named columns")
    model = _model_fn(checkpoint)
    z = transform(checkpoint.feature_scaler, instance[None, :], columns)[0]
    d = z.size
    rng = np.random.default_rng(seed)

    # One batched forward pass per permutation: row k holds the baseline
    # with the first k permuted features switched to the instance value.
    phi = np.zeros((d, checkpoint.spec.output_dim))
    base_out = None
    full_out = None
    for _ in range(n_permutations):
        perm = rng.permutation(d)
        states = np.zeros((d + 1, d))
        for k, idx in enumerate(perm):
            states[k + 1] = states[k]
            states[k + 1, idx] = z[idx]
        outputs = model(states)
        if base_out is None:
            base_out = outputs[0]
            full_out = outputs[-1]
        marginals = np.diff(outputs, axis=0)
        phi[perm] += marginals
    phi /= n_permutations
    return AttributionResult(
        feature_names=manifest,
        values=phi,
        base_value=base_out,
        explained_output=full_out,
    )


@dataclass
class ImportanceReport:
    """Dataset-level descriptor importance: mean |attribution| per feature."""

    feature_names: tuple[str, ...]
    mean_abs_attribution: np.ndarray        # (n_features,)
    attributions: list[AttributionResult]   # one per input row

    def ranking(self) -> list[tuple[str, float]]:
        order = np.argsort(-self.mean_abs_attribution, kind="mergesort")
        return [(self.feature_names[i], float(self.mean_abs_attribution[i]))
                for i in order]


def dataset_importance(checkpoint: ModelCheckpoint, values: np.ndarray,
                       columns: tuple[str, ...] | None = None,
                       n_permutations: int = DEFAULT_PERMUTATIONS,
                       seed: int = 0) -> ImportanceReport:
    """Attribute every row of a raw feature matrix and aggregate.

    Row ``i`` is explained with seed ``seed + i`` so the whole report is
    reproducible and rows are independent of each other.
    """
    if columns is None:
        columns = checkpoint.manifest
    values = np.asarray(values, dtype=np.float64)
    if values.ndim != 2 or values.shape[1] != len(columns):
        raise ValueError("feature matrix does not match the named columns")
    results = [
        shapley_attribution(checkpoint, values[i], columns, n_permutations, seed + i)
        for i in range(values.shape[0])
    ]
    if results:
        stacked = np.stack([np.abs(r.values).mean(axis=1) for r in results])
        mean_abs = stacked.mean(axis=0)
    else:
        mean_abs = np.zeros(len(checkpoint.manifest))
    return ImportanceReport(
        feature_names=checkpoint.manifest,
        mean_abs_attribution=mean_abs,
        attributions=results,
    )
