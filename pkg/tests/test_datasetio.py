"""CSV loading, split generation, and the on-disk descriptor cache."""
from __future__ import annotations

import logging

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from descprop.datasetio import (
    cached_descriptors, default_cache_path, load_dataset, random_split,
)
from descprop.errors import DataError


def write_csv(path, text):
    path.write_text(text, encoding="utf-8")
    return path


BASIC_CSV = """smiles,log_p
CCO,1.0
c1ccccc1,2.13
CCCC,2.89
"""


class TestLoadDataset:
    def test_basic_load(self, tmp_path):
        path = write_csv(tmp_path / "data.csv", BASIC_CSV)
        dataset = load_dataset(path, "smiles", ["log_p"])
        assert dataset.smiles == ("CCO", "c1ccccc1", "CCCC")
        assert dataset.target_names == ("log_p",)
        np.testing.assert_array_equal(dataset.targets,
                                      [[1.0], [2.13], [2.89]])
        assert len(dataset.drop_report) == 0

    def test_invalid_smiles_dropped_with_reason(self, tmp_path):
        path = write_csv(tmp_path / "data.csv",
                         "smiles,y\nCCO,1.0\nnot_a_molecule,2.0\nCC,3.0\n")
        dataset = load_dataset(path, "smiles", ["y"])
        assert dataset.smiles == ("CCO", "CC")
        assert len(dataset.drop_report) == 1
        row_number, reason = dataset.drop_report.entries[0]
        assert row_number == 2  # 1-based data rows, header not counted
        assert "invalid SMILES" in reason

    def test_missing_target_dropped(self, tmp_path):
        path = write_csv(tmp_path / "data.csv",
                         "smiles,y\nCCO,1.0\nCC,\nCCC,oops\n")
        dataset = load_dataset(path, "smiles", ["y"])
        assert dataset.smiles == ("CCO",)
        reasons = [reason for _, reason in dataset.drop_report.entries]
        assert reasons == ["missing target", "missing target"]

    def test_multitask_keeps_partial_rows(self, tmp_path):
        path = write_csv(tmp_path / "data.csv",
                         "smiles,a,b\nCCO,1.0,\nCC,,\n")
        dataset = load_dataset(path, "smiles", ["a", "b"])
        assert dataset.smiles == ("CCO",)
        assert np.isnan(dataset.targets[0, 1])
        assert dataset.drop_report.entries[0][1] == "missing all targets"

    def test_duplicate_smiles_kept_with_warning(self, tmp_path, caplog):
        path = write_csv(tmp_path / "data.csv",
                         "smiles,y\nCCO,1.0\nCCO,2.0\n")
        with caplog.at_level(logging.WARNING, logger="descprop.datasetio"):
            dataset = load_dataset(path, "smiles", ["y"])
        assert dataset.smiles == ("CCO", "CCO")
        assert any("duplicate" in record.message.lower()
                   for record in caplog.records)

    def test_identifier_column(self, tmp_path):
        path = write_csv(tmp_path / "data.csv",
                         "name,smiles,y\nethanol,CCO,1.0\nbutane,CCCC,2.0\n")
        dataset = load_dataset(path, "smiles", ["y"],
                               identifier_column="name")
        assert dataset.identifiers == ("ethanol", "butane")

    def test_salt_reduced_to_parent_fragment(self, tmp_path):
        path = write_csv(tmp_path / "data.csv", "smiles,y\nCCO.O,1.0\n")
        dataset = load_dataset(path, "smiles", ["y"])
        assert len(dataset.mols[0].atoms) == 3

    @pytest.mark.parametrize("csv_text,match", [
        ("smi,y\nCCO,1\n", "column 'smiles'"),
        ("smiles,z\nCCO,1\n", "column 'y'"),
        ("smiles,y\nbad_smiles_here,1\n", "no usable rows"),
    ])
    def test_data_errors(self, tmp_path, csv_text, match):
        path = write_csv(tmp_path / "data.csv", csv_text)
        with pytest.raises(DataError, match=match):
            load_dataset(path, "smiles", ["y"])

    def test_missing_file(self, tmp_path):
        with pytest.raises(DataError, match="cannot open"):
            load_dataset(tmp_path / "absent.csv", "smiles", ["y"])

    def test_no_target_columns(self, tmp_path):
        path = write_csv(tmp_path / "data.csv", BASIC_CSV)
        with pytest.raises(DataError, match="at least one target"):
            load_dataset(path, "smiles", [])


class TestRandomSplit:
    def test_frozen_split_sizes(self):
        split = random_split(55, 0.8, 0.1, 0.1, seed=55)
        assert len(split.train) == 44
        assert len(split.val) == 5
        assert len(split.test) == 6

    def test_floor_semantics(self):
        # train floor(9.6) = 9, val floor(1.2) = 1, test takes the rest
        split = random_split(12, 0.8, 0.1, 0.1, seed=0)
        assert (len(split.train), len(split.val), len(split.test)) == (9, 1, 2)

    @given(st.integers(min_value=10, max_value=500),
           st.integers(min_value=0, max_value=2**32 - 1))
    @settings(max_examples=100, deadline=None)
    def test_partition_property(self, n_rows, seed):
        split = random_split(n_rows, 0.8, 0.1, 0.1, seed)
        combined = np.concatenate([split.train, split.val, split.test])
        assert len(combined) == n_rows
        assert sorted(combined.tolist()) == list(range(n_rows))
        assert len(split.train) == int(np.floor(0.8 * n_rows))
        assert len(split.val) == int(np.floor(0.1 * n_rows))

    def test_same_seed_same_split(self):
        a = random_split(100, 0.8, 0.1, 0.1, seed=7)
        b = random_split(100, 0.8, 0.1, 0.1, seed=7)
        np.testing.assert_array_equal(a.train, b.train)
        np.testing.assert_array_equal(a.test, b.test)

    def test_different_seed_differs(self):
        a = random_split(100, 0.8, 0.1, 0.1, seed=7)
        b = random_split(100, 0.8, 0.1, 0.1, seed=8)
        assert (a.train != b.train).any()

    def test_fractions_must_sum_to_one(self):
        with pytest.raises(ValueError, match="sum to 1"):
            random_split(10, 0.8, 0.1, 0.2, seed=0)

    def test_empty_block_rejected(self):
        with pytest.raises(ValueError, match="empty block"):
            random_split(5, 0.8, 0.1, 0.1, seed=0)  # floor(0.5) = 0 val rows


class TestDescriptorCache:
    def make_dataset(self, tmp_path, rows="CCO,1.0\nCC,2.0\n"):
        path = write_csv(tmp_path / "mols.csv", "smiles,y\n" + rows)
        return load_dataset(path, "smiles", ["y"])

    def test_default_cache_path(self):
        assert default_cache_path("dir/input.csv").name == "input.fpcache"

    def test_cache_round_trip(self, tmp_path, caplog):
        dataset = self.make_dataset(tmp_path)
        cache = tmp_path / "mols.fpcache"
        first = cached_descriptors(dataset, "all", cache_path=cache)
        assert cache.exists()
        with caplog.at_level(logging.INFO, logger="descprop.datasetio"):
            second = cached_descriptors(dataset, "all", cache_path=cache)
        assert any("cache hit" in record.message for record in caplog.records)
        np.testing.assert_array_equal(first.values, second.values)
        assert first.columns == second.columns

    def test_cache_path_derived_from_input_file(self, tmp_path):
        dataset = self.make_dataset(tmp_path)
        cached_descriptors(dataset, "all",
                           input_file=tmp_path / "mols.csv")
        assert (tmp_path / "mols.fpcache").exists()

    def test_stale_cache_recomputed(self, tmp_path, caplog):
        first = self.make_dataset(tmp_path)
        cache = tmp_path / "shared.fpcache"
        cached_descriptors(first, "all", cache_path=cache)
        changed = self.make_dataset(tmp_path, rows="CCO,1.0\nCCCC,2.0\n")
        with caplog.at_level(logging.INFO, logger="descprop.datasetio"):
            matrix = cached_descriptors(changed, "all", cache_path=cache)
        assert any("stale" in record.message for record in caplog.records)
        assert matrix.values.shape[0] == 2

    def test_corrupt_cache_recomputed(self, tmp_path, caplog):
        dataset = self.make_dataset(tmp_path)
        cache = tmp_path / "broken.fpcache"
        cache.write_bytes(b"garbage, not an archive")
        with caplog.at_level(logging.WARNING, logger="descprop.datasetio"):
            matrix = cached_descriptors(dataset, "all", cache_path=cache)
        assert any("unreadable" in record.message for record in caplog.records)
        assert matrix.values.shape[0] == 2

    def test_descriptor_set_mismatch_recomputed(self, tmp_path):
        dataset = self.make_dataset(tmp_path)
        cache = tmp_path / "set.fpcache"
        cached_descriptors(dataset, "all", cache_path=cache)
        matrix = cached_descriptors(dataset, "core", cache_path=cache)
        assert len(matrix.columns) == 16

    def test_no_cache_path_skips_caching(self, tmp_path):
        dataset = self.make_dataset(tmp_path)
        cached_descriptors(dataset, "core")
        assert not list(tmp_path.glob("*.fpcache"))
