"""Network mechanics: init, forward, loss, gradients, Adam, training loop.

The centerpiece is the finite-difference gradient check: analytic
backpropagation must agree with central differences on every parameter
coordinate across 100 randomized small networks covering both task heads,
zero to two hidden layers, and masked (NaN) targets.
"""
from __future__ import annotations

import math

import numpy as np
import pytest

from descprop.errors import TrainingError
from descprop.neural import (
    AdamState, EpochRecord, NetworkSpec, TrainConfig, adam_step, backward,
    forward, init_network, loss, train_model,
)

STEP = 1e-5
GRAD_TOL = 1e-4


def numeric_gradients(spec, params, inputs, targets):
    """Central finite differences over every parameter coordinate."""
    grads = []
    for layer in range(len(params)):
        layer_grads = []
        for part in range(2):  # weights, then biases
            array = params[layer][part]
            grad = np.zeros_like(array)
            it = np.nditer(array, flags=["multi_index"])
            for _ in it:
                idx = it.multi_index
                original = array[idx]
                array[idx] = original + STEP
                up = loss(spec, forward(spec, params, inputs), targets)
                array[idx] = original - STEP
                down = loss(spec, forward(spec, params, inputs), targets)
                array[idx] = original
                grad[idx] = (up - down) / (2.0 * STEP)
            layer_grads.append(grad)
        grads.append(tuple(layer_grads))
    return grads


def max_relative_error(analytic, numeric):
    worst = 0.0
    for (aw, ab), (nw, nb) in zip(analytic, numeric):
        for a, n in ((aw, nw), (ab, nb)):
            denom = np.maximum(np.maximum(np.abs(a), np.abs(n)), 1e-6)
            worst = max(worst, float(np.max(np.abs(a - n) / denom)))
    return worst


def random_problem(rng):
    task = "regression" if rng.random() < 0.5 else "multilabel"
    spec = NetworkSpec(
        input_dim=int(rng.integers(1, 5)),
        output_dim=int(rng.integers(1, 4)),
        hidden_layers=int(rng.integers(0, 3)),
        hidden_width=int(rng.integers(2, 6)),
        task=task,
    )
    rows = int(rng.integers(1, 5))
    inputs = rng.normal(size=(rows, spec.input_dim))
    if task == "regression":
        targets = rng.normal(size=(rows, spec.output_dim))
    else:
        targets = rng.integers(0, 2, size=(rows, spec.output_dim)).astype(float)
    # mask roughly a fifth of the targets, never the whole matrix
    mask = rng.random(targets.shape) < 0.2
    mask.flat[int(rng.integers(targets.size))] = False
    targets[mask] = np.nan
    return spec, inputs, targets


class TestGradientCheck:
    def test_backprop_matches_central_differences_on_100_networks(self):
        rng = np.random.default_rng(1234)
        worst = 0.0
        for trial in range(100):
            spec, inputs, targets = random_problem(rng)
            params = init_network(spec, seed=trial)
            analytic = backward(spec, params, inputs, targets)
            numeric = numeric_gradients(spec, params, inputs, targets)
            worst = max(worst, max_relative_error(analytic, numeric))
        assert worst < GRAD_TOL, f"worst relative gradient error {worst:.3e}"


class TestNetworkSpec:
    def test_frozen_parameter_count(self):
        spec = NetworkSpec(input_dim=10, output_dim=1,
                           hidden_layers=2, hidden_width=1800)
        assert spec.parameter_count() == 3_263_401

    def test_layer_shapes(self):
        spec = NetworkSpec(input_dim=10, output_dim=1,
                           hidden_layers=2, hidden_width=1800)
        assert spec.layer_shapes() == [(10, 1800), (1800, 1800), (1800, 1)]

    def test_zero_layer_shapes(self):
        spec = NetworkSpec(input_dim=5, output_dim=2, hidden_layers=0,
                           hidden_width=1800)
        assert spec.layer_shapes() == [(5, 2)]
        assert spec.parameter_count() == 5 * 2 + 2

    @pytest.mark.parametrize("kwargs", [
        dict(input_dim=0),
        dict(input_dim=3, output_dim=0),
        dict(input_dim=3, hidden_layers=-1),
        dict(input_dim=3, hidden_layers=1, hidden_width=0),
        dict(input_dim=3, task="classification"),
    ])
    def test_invalid_specs_rejected(self, kwargs):
        with pytest.raises(ValueError):
            NetworkSpec(**kwargs)


class TestInit:
    def test_same_seed_identical(self):
        spec = NetworkSpec(input_dim=4, hidden_layers=1, hidden_width=8)
        a = init_network(spec, seed=7)
        b = init_network(spec, seed=7)
        for (wa, ba), (wb, bb) in zip(a, b):
            np.testing.assert_array_equal(wa, wb)
            np.testing.assert_array_equal(ba, bb)

    def test_different_seed_differs(self):
        spec = NetworkSpec(input_dim=4, hidden_layers=1, hidden_width=8)
        a = init_network(spec, seed=7)
        b = init_network(spec, seed=8)
        assert any((wa != wb).any() for (wa, _), (wb, _) in zip(a, b))

    def test_uniform_bounds_scale_with_fan_in(self):
        spec = NetworkSpec(input_dim=16, hidden_layers=1, hidden_width=4)
        params = init_network(spec, seed=0)
        for (w, b), (fan_in, _) in zip(params, spec.layer_shapes()):
            bound = 1.0 / math.sqrt(fan_in)
            assert np.abs(w).max() <= bound and np.abs(b).max() <= bound


class TestForwardAndLoss:
    def test_zero_layer_regression_is_affine(self):
        spec = NetworkSpec(input_dim=2, output_dim=1, hidden_layers=0)
        w = np.array([[3.0], [-2.0]])
        b = np.array([0.5])
        x = np.array([[1.0, 1.0], [2.0, -1.0]])
        out = forward(spec, [(w, b)], x)
        np.testing.assert_allclose(out, [[1.5], [8.5]], atol=1e-15)

    def test_multilabel_head_is_sigmoid(self):
        spec = NetworkSpec(input_dim=1, output_dim=1, hidden_layers=0,
                           task="multilabel")
        out = forward(spec, [(np.zeros((1, 1)), np.zeros(1))],
                      np.array([[123.0]]))
        assert out[0, 0] == 0.5

    def test_hidden_layers_apply_relu(self):
        spec = NetworkSpec(input_dim=1, output_dim=1, hidden_layers=1,
                           hidden_width=1)
        params = [(np.array([[1.0]]), np.array([0.0])),
                  (np.array([[1.0]]), np.array([0.0]))]
        assert forward(spec, params, np.array([[-5.0]]))[0, 0] == 0.0
        assert forward(spec, params, np.array([[5.0]]))[0, 0] == 5.0

    def test_masked_mse(self):
        spec = NetworkSpec(input_dim=1, output_dim=2, hidden_layers=0)
        outputs = np.array([[1.0, 2.0]])
        targets = np.array([[2.0, np.nan]])
        assert loss(spec, outputs, targets) == 1.0

    def test_bce_at_even_odds(self):
        spec = NetworkSpec(input_dim=1, output_dim=1, hidden_layers=0,
                           task="multilabel")
        value = loss(spec, np.array([[0.5]]), np.array([[1.0]]))
        assert math.isclose(value, math.log(2.0), abs_tol=1e-12)

    def test_all_missing_targets_rejected(self):
        spec = NetworkSpec(input_dim=1, output_dim=1, hidden_layers=0)
        with pytest.raises(ValueError):
            loss(spec, np.array([[1.0]]), np.array([[np.nan]]))

    def test_shape_mismatch_rejected(self):
        spec = NetworkSpec(input_dim=1, output_dim=2, hidden_layers=0)
        with pytest.raises(ValueError):
            loss(spec, np.zeros((1, 2)), np.zeros((1, 3)))

    def test_wrong_input_width_rejected(self):
        spec = NetworkSpec(input_dim=3, output_dim=1, hidden_layers=0)
        params = init_network(spec, seed=0)
        with pytest.raises(ValueError):
            forward(spec, params, np.zeros((2, 4)))


class TestAdam:
    def test_first_step_moves_by_learning_rate(self):
        params = [(np.array([[0.0]]), np.array([0.0]))]
        grads = [(np.array([[2.0]]), np.array([-3.0]))]
        state = AdamState.zeros_like(params)
        new_params, new_state = adam_step(params, grads, state,
                                          learning_rate=0.01)
        # bias-corrected first step is -lr * sign(gradient), up to eps
        assert new_params[0][0][0, 0] == pytest.approx(-0.01, rel=1e-6)
        assert new_params[0][1][0] == pytest.approx(0.01, rel=1e-6)
        assert new_state.step == 1

    def test_does_not_mutate_inputs(self):
        params = [(np.ones((1, 1)), np.ones(1))]
        grads = [(np.ones((1, 1)), np.ones(1))]
        state = AdamState.zeros_like(params)
        adam_step(params, grads, state)
        assert params[0][0][0, 0] == 1.0
        assert state.step == 0

    @pytest.mark.parametrize("bad", [np.nan, np.inf, -np.inf])
    def test_non_finite_gradient_aborts(self, bad):
        params = [(np.zeros((1, 1)), np.zeros(1))]
        grads = [(np.array([[bad]]), np.zeros(1))]
        with pytest.raises(TrainingError):
            adam_step(params, grads, AdamState.zeros_like(params))


class TestTrainConfig:
    @pytest.mark.parametrize("kwargs", [
        dict(number_epochs=0, batch_size=1, patience=1),
        dict(number_epochs=5, batch_size=0, patience=1),
        dict(number_epochs=5, batch_size=1, patience=0),
        dict(number_epochs=5, batch_size=1, patience=6),
        dict(number_epochs=5, batch_size=1, patience=2, learning_rate=0.0),
    ])
    def test_invalid_configs_rejected(self, kwargs):
        with pytest.raises(ValueError):
            TrainConfig(**kwargs)


def tiny_problem(seed=0, rows=32):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(rows, 3))
    y = x @ np.array([[1.0], [-1.0], [0.5]]) + 0.01 * rng.normal(size=(rows, 1))
    return x[: rows // 2], y[: rows // 2], x[rows // 2:], y[rows // 2:]


class TestTrainLoop:
    def test_deterministic_given_config(self):
        spec = NetworkSpec(input_dim=3, output_dim=1, hidden_layers=1,
                           hidden_width=4)
        config = TrainConfig(number_epochs=10, batch_size=4, patience=10,
                             random_seed=3)
        xt, yt, xv, yv = tiny_problem()
        a = train_model(spec, config, xt, yt, xv, yv)
        b = train_model(spec, config, xt, yt, xv, yv)
        assert [(r.epoch, r.train_loss, r.val_loss) for r in a.log] == \
               [(r.epoch, r.train_loss, r.val_loss) for r in b.log]
        for (wa, ba), (wb, bb) in zip(a.parameters, b.parameters):
            np.testing.assert_array_equal(wa, wb)
            np.testing.assert_array_equal(ba, bb)

    def test_returned_parameters_reproduce_best_val_loss(self):
        spec = NetworkSpec(input_dim=3, output_dim=1, hidden_layers=1,
                           hidden_width=4)
        config = TrainConfig(number_epochs=20, batch_size=8, patience=20,
                             random_seed=1)
        xt, yt, xv, yv = tiny_problem()
        result = train_model(spec, config, xt, yt, xv, yv)
        recomputed = loss(spec, forward(spec, result.parameters, xv), yv)
        assert recomputed == pytest.approx(result.best_val_loss, abs=1e-12)
        assert result.best_val_loss == min(r.val_loss for r in result.log)
        assert result.best_epoch == next(
            r.epoch for r in result.log if r.val_loss == result.best_val_loss)

    def test_early_stop_after_patience_epochs(self):
        spec = NetworkSpec(input_dim=1, output_dim=1, hidden_layers=0)
        config = TrainConfig(number_epochs=200, batch_size=8, patience=5,
                             random_seed=0)
        # targets the freshly initialized network already fits exactly:
        # all gradients are zero, so epoch 1 is the only improvement
        rng = np.random.default_rng(0)
        x = rng.normal(size=(8, 1))
        y = forward(spec, init_network(spec, config.random_seed), x)
        result = train_model(spec, config, x, y, x, y)
        assert result.stopped_early
        assert result.best_epoch == 1
        assert result.log[-1].epoch == result.best_epoch + config.patience

    def test_runs_all_epochs_without_early_stop_flag(self):
        spec = NetworkSpec(input_dim=3, output_dim=1, hidden_layers=0)
        config = TrainConfig(number_epochs=5, batch_size=64, patience=5,
                             random_seed=2)
        xt, yt, xv, yv = tiny_problem()
        result = train_model(spec, config, xt, yt, xv, yv)
        assert not result.stopped_early
        assert [r.epoch for r in result.log] == [1, 2, 3, 4, 5]

    def test_epoch_records_are_one_based(self):
        record = EpochRecord(1, 0.5, 0.6)
        assert (record.epoch, record.train_loss, record.val_loss) == (1, 0.5, 0.6)

    def test_empty_split_rejected(self):
        spec = NetworkSpec(input_dim=2, output_dim=1, hidden_layers=0)
        config = TrainConfig(number_epochs=1, batch_size=1, patience=1)
        with pytest.raises(TrainingError):
            train_model(spec, config, np.zeros((0, 2)), np.zeros((0, 1)),
                        np.zeros((1, 2)), np.zeros((1, 1)))

    def test_target_shape_mismatch_rejected(self):
        spec = NetworkSpec(input_dim=2, output_dim=1, hidden_layers=0)
        config = TrainConfig(number_epochs=1, batch_size=1, patience=1)
        with pytest.raises(TrainingError):
            train_model(spec, config, np.zeros((3, 2)), np.zeros((3, 2)),
                        np.zeros((1, 2)), np.zeros((1, 1)))
