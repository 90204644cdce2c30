"""Feedforward networks trained with Adam on numpy arrays.

The architecture is deliberately plain: an input layer, a configurable
stack of equal-width ReLU hidden layers, and a linear output head (with a
logistic squash for multilabel problems). Zero hidden layers degenerate to
a linear model, which doubles as the built-in baseline.

Gradients are computed by hand with reverse-mode accumulation; the test
suite checks them against central finite differences. Everything is
float64 and seed-deterministic: the same spec, data, and seed give
bit-identical parameters.

Targets may contain NaN entries; those positions are masked out of the
loss and gradients, which is how sparse multitask data trains.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import TrainingError

logger = logging.getLogger(__name__)

REGRESSION = "regression"
MULTILABEL = "multilabel"

_TASKS = (REGRESSION, MULTILABEL)


@dataclass(frozen=True)
class NetworkSpec:
    """Shape and task of a feedforward network."""

    input_dim: int
    output_dim: int = 1
    hidden_layers: int = 2
    hidden_width: int = 1800
    task: str = REGRESSION

    def __post_init__(self):
        if self.input_dim < 1 or self.output_dim < 1:
            raise ValueError("input and output dimensions must be positive")
        if self.hidden_layers < 0:
            raise ValueError("hidden layer count cannot be negative")
        if self.hidden_layers > 0 and self.hidden_width < 1:
            raise ValueError("hidden width must be positive")
        if self.task not in _TASKS:
            raise ValueError(f"unknown task {self.task!r} (use one of {_TASKS})")

    def layer_shapes(self) -> list[tuple[int, int]]:
        """(fan_in, fan_out) for every weight matrix, input to output."""
        dims = [self.input_dim] + [self.hidden_width] * self.hidden_layers \
            + [self.output_dim]
        return list(zip(dims[:-1], dims[1:]))

    def parameter_count(self) -> int:
        return sum(fi * fo + fo for fi, fo in self.layer_shapes())


# Parameters and gradients are lists of (weights, biases) per layer.
NetworkParameters = list[tuple[np.ndarray, np.ndarray]]


def init_network(spec: NetworkSpec, seed: int) -> NetworkParameters:
    """Uniform fan-in initialization: U(-1/sqrt(fan_in), 1/sqrt(fan_in))."""
    rng = np.random.default_rng(seed)
    params: NetworkParameters = []
    for fan_in, fan_out in spec.layer_shapes():
        bound = 1.0 / np.sqrt(fan_in)
        weights = rng.uniform(-bound, bound, size=(fan_in, fan_out))
        biases = rng.uniform(-bound, bound, size=fan_out)
        params.append((weights, biases))
    return params


def _check_input(spec: NetworkSpec, inputs: np.ndarray) -> np.ndarray:
    x = np.asarray(inputs, dtype=np.float64)
    if x.ndim == 1:
        x = x[None, :]
    if x.ndim != 2 or x.shape[1] != spec.input_dim:
        raise ValueError(
            f"input shape {x.shape} does not match input_dim {spec.input_dim}")
    return x


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _forward_cache(params: NetworkParameters, x: np.ndarray):
    """Pre-activations and activations for every layer."""
    activations = [x]
    pre_acts = []
    a = x
    for i, (w, b) in enumerate(params):
        z = a @ w + b
        pre_acts.append(z)
        if i < len(params) - 1:
            a = np.maximum(z, 0.0)
            activations.append(a)
    return pre_acts, activations


def forward(spec: NetworkSpec, params: NetworkParameters,
            inputs: np.ndarray) -> np.ndarray:
    """Network outputs: raw values for regression, probabilities for
    multilabel classification."""
    x = _check_input(spec, inputs)
    pre_acts, _ = _forward_cache(params, x)
    z = pre_acts[-1]
    return _sigmoid(z) if spec.task == MULTILABEL else z


def loss(spec: NetworkSpec, outputs: np.ndarray, targets: np.ndarray) -> float:
    """Mean squared error (regression) or mean binary cross-entropy
    (multilabel) over non-missing target entries."""
    out = np.asarray(outputs, dtype=np.float64)
    tgt = np.asarray(targets, dtype=np.float64)
    if out.shape != tgt.shape:
        raise ValueError(f"output shape {out.shape} != target shape {tgt.shape}")
    mask = ~np.isnan(tgt)
    count = int(mask.sum())
    if count == 0:
        raise ValueError("loss undefined: every target entry is missing")
    if spec.task == REGRESSION:
        diff = np.where(mask, out - tgt, 0.0)
        return float((diff ** 2).sum() / count)
    p = np.clip(out, 1e-12, 1.0 - 1e-12)
    t = np.where(mask, tgt, 0.0)
    term = t * np.log(p) + (1.0 - t) * np.log(1.0 - p)
    return float(-(np.where(mask, term, 0.0)).sum() / count)


def backward(spec: NetworkSpec, params: NetworkParameters, inputs: np.ndarray,
             targets: np.ndarray) -> list[tuple[np.ndarray, np.ndarray]]:
    """Gradient of the masked loss with respect to every parameter."""
    x = _check_input(spec, inputs)
    tgt = np.asarray(targets, dtype=np.float64)
    if tgt.ndim == 1:
        tgt = tgt[:, None]
    if tgt.shape != (x.shape[0], spec.output_dim):
        raise ValueError(
            f"target shape {tgt.shape} does not match ({x.shape[0]}, {spec.output_dim})")
    mask = ~np.isnan(tgt)
    count = int(mask.sum())
    if count == 0:
        raise ValueError("loss undefined: every target entry is missing")

    pre_acts, activations = _forward_cache(params, x)
    z_out = pre_acts[-1]
    safe_tgt = np.where(mask, tgt, 0.0)
    if spec.task == REGRESSION:
        delta = np.where(mask, 2.0 * (z_out - safe_tgt) / count, 0.0)
    else:
        p = _sigmoid(z_out)
        delta = np.where(mask, (p - safe_tgt) / count, 0.0)

    grads: list[tuple[np.ndarray, np.ndarray]] = [None] * len(params)
    for layer in range(len(params) - 1, -1, -1):
        a_prev = activations[layer]
        grads[layer] = (a_prev.T @ delta, delta.sum(axis=0))
        if layer > 0:
            w, _ = params[layer]
            delta = (delta @ w.T) * (pre_acts[layer - 1] > 0)
    return grads


@dataclass
class AdamState:
    """First/second moment accumulators and the step counter."""

    m: list[tuple[np.ndarray, np.ndarray]]
    v: list[tuple[np.ndarray, np.ndarray]]
    step: int = 0

    @classmethod
    def zeros_like(cls, params: NetworkParameters) -> "AdamState":
        m = [(np.zeros_like(w), np.zeros_like(b)) for w, b in params]
        v = [(np.zeros_like(w), np.zeros_like(b)) for w, b in params]
        return cls(m=m, v=v, step=0)


def adam_step(params: NetworkParameters, grads, state: AdamState,
              learning_rate: float = 1e-3, beta1: float = 0.9,
              beta2: float = 0.999, eps: float = 1e-8
              ) -> tuple[NetworkParameters, AdamState]:
    """One bias-corrected Adam update; returns new parameters and state.

    Raises:
        TrainingError: if any gradient entry is non-finite.
    """
    for gw, gb in grads:
        if not (np.isfinite(gw).all() and np.isfinite(gb).all()):
            raise TrainingError(
                "non-finite gradient encountered; aborting the update "
                "(check input scaling and learning rate)")
    t = state.step + 1
    new_params: NetworkParameters = []
    new_m, new_v = [], []
    for (w, b), (gw, gb), (mw, mb), (vw, vb) in zip(params, grads, state.m, state.v):
        updates = []
        for value, grad, m_prev, v_prev in ((w, gw, mw, vw), (b, gb, mb, vb)):
            m = beta1 * m_prev + (1 - beta1) * grad
            v = beta2 * v_prev + (1 - beta2) * grad ** 2
            m_hat = m / (1 - beta1 ** t)
            v_hat = v / (1 - beta2 ** t)
            updates.append((value - learning_rate * m_hat / (np.sqrt(v_hat) + eps),
                            m, v))
        new_params.append((updates[0][0], updates[1][0]))
        new_m.append((updates[0][1], updates[1][1]))
        new_v.append((updates[0][2], updates[1][2]))
    return new_params, AdamState(m=new_m, v=new_v, step=t)


@dataclass(frozen=True)
class TrainConfig:
    """Loop-level training knobs."""

    number_epochs: int
    batch_size: int
    patience: int
    learning_rate: float = 1e-3
    random_seed: int = 0

    def __post_init__(self):
        if self.number_epochs < 1:
            raise ValueError("number_epochs must be at least 1")
        if self.batch_size < 1:
            raise ValueError("batch_size must be at least 1")
        if self.patience < 1:
            raise ValueError("patience must be at least 1")
        if self.patience > self.number_epochs:
            raise ValueError("patience cannot exceed number_epochs")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")


@dataclass
class EpochRecord:
    epoch: int
    train_loss: float
    val_loss: float


@dataclass
class TrainResult:
    """Best parameters plus the per-epoch history that produced them."""

    parameters: NetworkParameters
    log: list[EpochRecord] = field(default_factory=list)
    best_epoch: int = 0
    best_val_loss: float = float("inf")
    stopped_early: bool = False


def _copy_params(params: NetworkParameters) -> NetworkParameters:
    return [(w.copy(), b.copy()) for w, b in params]


def train_model(spec: NetworkSpec, config: TrainConfig,
                train_inputs: np.ndarray, train_targets: np.ndarray,
                val_inputs: np.ndarray, val_targets: np.ndarray) -> TrainResult:
    """Mini-batch Adam training with patience-based early stopping.

    Each epoch shuffles the training rows with a seed-derived generator,
    walks them in mini-batches (the final short batch included), then
    scores the validation set. Training stops after ``patience`` epochs
    without a new best validation loss; the returned parameters are the
    copy captured at the best epoch.
    """
    x_train = _check_input(spec, train_inputs)
    x_val = _check_input(spec, val_inputs)
    y_train = np.asarray(train_targets, dtype=np.float64)
    y_val = np.asarray(val_targets, dtype=np.float64)
    if y_train.ndim == 1:
        y_train = y_train[:, None]
    if y_val.ndim == 1:
        y_val = y_val[:, None]
    if x_train.shape[0] == 0 or x_val.shape[0] == 0:
        raise TrainingError("training and validation sets must be non-empty")
    if y_train.shape != (x_train.shape[0], spec.output_dim):
        raise TrainingError("training target shape does not match network output")
    if y_val.shape != (x_val.shape[0], spec.output_dim):
        raise TrainingError("validation target shape does not match network output")

    params = init_network(spec, config.random_seed)
    state = AdamState.zeros_like(params)
    shuffle_rng = np.random.default_rng(config.random_seed)

    result = TrainResult(parameters=_copy_params(params))
    epochs_without_improvement = 0
    n = x_train.shape[0]
    for epoch in range(1, config.number_epochs + 1):
        order = shuffle_rng.permutation(n)
        for start in range(0, n, config.batch_size):
            batch = order[start:start + config.batch_size]
            grads = backward(spec, params, x_train[batch], y_train[batch])
            params, state = adam_step(params, grads, state, config.learning_rate)
        train_loss = loss(spec, forward(spec, params, x_train), y_train)
        val_loss = loss(spec, forward(spec, params, x_val), y_val)
        result.log.append(EpochRecord(epoch, train_loss, val_loss))
        if val_loss < result.best_val_loss:
            result.best_val_loss = val_loss
            result.best_epoch = epoch
            result.parameters = _copy_params(params)
            epochs_without_improvement = 0
        else:
            epochs_without_improvement += 1
            if epochs_without_improvement >= config.patience:
                result.stopped_early = True
                logger.debug("early stop at epoch %d (best %d)", epoch,
                             result.best_epoch)
                break
    return result
