"""Checkpoint files: bit-exact round trips and defensive loading."""
from __future__ import annotations

import numpy as np
import pytest

from descprop.checkpoint import (
    ModelCheckpoint, checkpoint_path, load_checkpoint, load_checkpoints,
    predict, save_checkpoint,
)
from descprop.descriptors import CATALOGUE_VERSION
from descprop.errors import CheckpointError
from descprop.neural import NetworkSpec, init_network
from descprop.preprocess import ScalerState


def make_checkpoint(repetition=0, seed=3, hidden_layers=1):
    names = ("f0", "f1", "f2")
    spec = NetworkSpec(input_dim=3, output_dim=1,
                       hidden_layers=hidden_layers, hidden_width=5)
    rng = np.random.default_rng(seed)
    return ModelCheckpoint(
        spec=spec,
        parameters=init_network(spec, seed),
        feature_scaler=ScalerState(names, rng.normal(size=3),
                                   np.abs(rng.normal(size=3)) + 0.5,
                                   clamp_bound=3.0),
        target_scaler=ScalerState(("y",), np.array([1.25]), np.array([0.75]),
                                  target_flag=True),
        descriptor_set_name="core",
        descriptor_columns=names,
        catalogue_version=CATALOGUE_VERSION,
        target_names=("y",),
        run_config={"random_seed": seed, "problem_type": "regression"},
        seed=seed,
        repetition=repetition,
    )


class TestRoundTrip:
    def test_file_name_uses_repetition_index(self, tmp_path):
        path = save_checkpoint(make_checkpoint(repetition=4), tmp_path)
        assert path == tmp_path / "checkpoint_4"
        assert checkpoint_path(tmp_path, 4) == path

    def test_everything_survives_the_round_trip(self, tmp_path):
        original = make_checkpoint()
        loaded = load_checkpoint(save_checkpoint(original, tmp_path))
        assert loaded.spec == original.spec
        assert loaded.descriptor_set_name == original.descriptor_set_name
        assert loaded.descriptor_columns == original.descriptor_columns
        assert loaded.target_names == original.target_names
        assert loaded.run_config == original.run_config
        assert loaded.seed == original.seed
        assert loaded.repetition == original.repetition
        for (w0, b0), (w1, b1) in zip(original.parameters, loaded.parameters):
            assert w0.tobytes() == w1.tobytes()  # bit-identical weights
            assert b0.tobytes() == b1.tobytes()
        np.testing.assert_array_equal(loaded.feature_scaler.means,
                                      original.feature_scaler.means)
        assert loaded.feature_scaler.clamp_bound == 3.0
        assert loaded.target_scaler.target_flag is True

    def test_predictions_reproduce_bit_identically(self, tmp_path):
        original = make_checkpoint()
        loaded = load_checkpoint(save_checkpoint(original, tmp_path))
        values = np.random.default_rng(1).normal(size=(6, 3))
        before = predict(original, values, ("f0", "f1", "f2"))
        after = predict(loaded, values, ("f0", "f1", "f2"))
        assert before.tobytes() == after.tobytes()

    def test_save_is_deterministic(self, tmp_path):
        first = save_checkpoint(make_checkpoint(), tmp_path / "a")
        second = save_checkpoint(make_checkpoint(), tmp_path / "b")
        assert first.read_bytes() == second.read_bytes()


class TestPredict:
    def test_columns_may_be_reordered(self):
        checkpoint = make_checkpoint(hidden_layers=0)
        values = np.random.default_rng(0).normal(size=(4, 3))
        straight = predict(checkpoint, values, ("f0", "f1", "f2"))
        shuffled = predict(checkpoint, values[:, [2, 0, 1]],
                           ("f2", "f0", "f1"))
        np.testing.assert_array_equal(straight, shuffled)

    def test_manifest_mismatch_names_columns(self):
        checkpoint = make_checkpoint()
        with pytest.raises(CheckpointError) as err:
            predict(checkpoint, np.zeros((1, 3)), ("f0", "f1", "other"))
        assert "'f2'" in str(err.value) and "'other'" in str(err.value)

    def test_target_scaler_applied(self):
        checkpoint = make_checkpoint(hidden_layers=0)
        raw = predict(checkpoint, np.zeros((1, 3)), ("f0", "f1", "f2"))
        assert np.isfinite(raw).all()


class TestDefensiveLoading:
    def test_bad_magic(self, tmp_path):
        path = tmp_path / "checkpoint_0"
        path.write_bytes(b"not a checkpoint at all")
        with pytest.raises(CheckpointError, match="bad magic"):
            load_checkpoint(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(CheckpointError, match="cannot read"):
            load_checkpoint(tmp_path / "checkpoint_9")

    def test_truncated_payload(self, tmp_path):
        path = save_checkpoint(make_checkpoint(), tmp_path)
        blob = path.read_bytes()
        path.write_bytes(blob[:-16])
        with pytest.raises(CheckpointError, match="truncated"):
            load_checkpoint(path)

    def test_trailing_garbage(self, tmp_path):
        path = save_checkpoint(make_checkpoint(), tmp_path)
        path.write_bytes(path.read_bytes() + b"extra")
        with pytest.raises(CheckpointError, match="trailing bytes"):
            load_checkpoint(path)

    def test_format_version_mismatch(self, tmp_path):
        path = save_checkpoint(make_checkpoint(), tmp_path)
        blob = path.read_bytes()
        path.write_bytes(blob.replace(b"format 1\n", b"format 9\n", 1))
        with pytest.raises(CheckpointError, match="format version 9"):
            load_checkpoint(path)

    def test_catalogue_version_mismatch(self, tmp_path):
        stale = make_checkpoint()
        stale.catalogue_version = "0"
        path = save_checkpoint(stale, tmp_path)
        with pytest.raises(CheckpointError, match="catalogue"):
            load_checkpoint(path)


class TestDirectoryScan:
    def test_load_checkpoints_sorted_numerically(self, tmp_path):
        # write out of order, with an index past 9 to catch string sorting
        for repetition in (10, 0, 2):
            save_checkpoint(make_checkpoint(repetition=repetition), tmp_path)
        (tmp_path / "config_snapshot").write_text("ignored")
        loaded = load_checkpoints(tmp_path)
        assert [c.repetition for c in loaded] == [0, 2, 10]

    def test_empty_directory_rejected(self, tmp_path):
        with pytest.raises(CheckpointError, match="no checkpoint"):
            load_checkpoints(tmp_path)

    def test_missing_directory_rejected(self, tmp_path):
        with pytest.raises(CheckpointError):
            load_checkpoints(tmp_path / "absent")


class TestValidation:
    def test_manifest_must_match_input_dim(self):
        spec = NetworkSpec(input_dim=2, output_dim=1, hidden_layers=0)
        with pytest.raises(CheckpointError, match="manifest"):
            ModelCheckpoint(
                spec=spec,
                parameters=init_network(spec, 0),
                feature_scaler=ScalerState(("a", "b", "c"), np.zeros(3),
                                           np.ones(3)),
                target_scaler=None,
                descriptor_set_name="all",
                descriptor_columns=("a", "b", "c"),
                catalogue_version=CATALOGUE_VERSION,
                target_names=("y",),
                run_config={},
                seed=0,
            )

    def test_target_names_must_match_output_dim(self):
        spec = NetworkSpec(input_dim=2, output_dim=1, hidden_layers=0)
        with pytest.raises(CheckpointError, match="target name"):
            ModelCheckpoint(
                spec=spec,
                parameters=init_network(spec, 0),
                feature_scaler=ScalerState(("a", "b"), np.zeros(2),
                                           np.ones(2)),
                target_scaler=None,
                descriptor_set_name="all",
                descriptor_columns=("a", "b"),
                catalogue_version=CATALOGUE_VERSION,
                target_names=("y", "z"),
                run_config={},
                seed=0,
            )
