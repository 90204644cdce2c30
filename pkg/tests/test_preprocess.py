"""Rescaling: fit on train rows, transform anywhere, invert exactly."""
from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from descprop.preprocess import (
    ScalerState, fit_scaler, inverse_transform, transform,
)


def finite_matrices():
    shapes = st.tuples(st.integers(2, 40), st.integers(1, 8))
    return shapes.flatmap(lambda s: hnp.arrays(
        np.float64, s,
        elements=st.floats(-1e6, 1e6, allow_nan=False, width=64)))


class TestFit:
    def test_frozen_example(self):
        # column [1, 2, 3]: mean 2, sample std 1
        state = fit_scaler(np.array([[1.0], [2.0], [3.0]]), ["x"])
        assert state.kept_columns == ("x",)
        assert state.means[0] == 2.0
        assert state.stds[0] == 1.0
        z = transform(state, np.array([[1.0], [2.0], [3.0]]), ["x"])
        np.testing.assert_allclose(z[:, 0], [-1.0, 0.0, 1.0], atol=1e-12)

    def test_sample_std_uses_ddof_1(self):
        state = fit_scaler(np.array([[0.0], [4.0]]), ["x"])
        assert state.stds[0] == pytest.approx(np.sqrt(8.0))

    def test_drops_constant_column(self):
        values = np.array([[1.0, 5.0], [2.0, 5.0], [3.0, 5.0]])
        state = fit_scaler(values, ["x", "flat"])
        assert state.kept_columns == ("x",)

    def test_drops_all_missing_column(self):
        values = np.array([[1.0, np.nan], [2.0, np.nan], [3.0, np.nan]])
        state = fit_scaler(values, ["x", "gone"])
        assert state.kept_columns == ("x",)

    def test_drops_single_observation_column(self):
        values = np.array([[1.0, np.nan], [2.0, 7.0], [3.0, np.nan]])
        state = fit_scaler(values, ["x", "once"])
        assert state.kept_columns == ("x",)

    def test_nan_excluded_from_statistics(self):
        values = np.array([[1.0], [np.nan], [3.0]])
        state = fit_scaler(values, ["x"])
        assert state.means[0] == 2.0

    def test_empty_matrix_rejected(self):
        with pytest.raises(ValueError, match="empty"):
            fit_scaler(np.empty((0, 2)), ["a", "b"])

    def test_all_columns_dropped_rejected(self):
        with pytest.raises(ValueError, match="dropped"):
            fit_scaler(np.full((3, 1), 9.0), ["flat"])

    def test_width_mismatch_rejected(self):
        with pytest.raises(ValueError, match="column names"):
            fit_scaler(np.zeros((3, 2)), ["only_one"])


class TestTransform:
    def test_missing_entries_become_zero(self):
        state = fit_scaler(np.array([[1.0], [3.0]]), ["x"])
        z = transform(state, np.array([[np.nan]]), ["x"])
        assert z[0, 0] == 0.0

    def test_clamp_bound_applied(self):
        state = fit_scaler(np.array([[1.0], [2.0], [3.0]]), ["x"],
                           clamp_bound=3.0)
        z = transform(state, np.array([[100.0], [-100.0]]), ["x"])
        np.testing.assert_array_equal(z[:, 0], [3.0, -3.0])

    def test_no_clamp_by_default(self):
        state = fit_scaler(np.array([[1.0], [2.0], [3.0]]), ["x"])
        z = transform(state, np.array([[100.0]]), ["x"])
        assert z[0, 0] == 98.0

    def test_selects_fitted_columns_by_name(self):
        state = fit_scaler(np.array([[1.0], [2.0], [3.0]]), ["x"])
        wide = np.array([[99.0, 2.0], [99.0, 2.0]])
        z = transform(state, wide, ["noise", "x"])
        np.testing.assert_array_equal(z, np.zeros((2, 1)))

    def test_missing_fitted_column_rejected(self):
        state = fit_scaler(np.array([[1.0], [2.0], [3.0]]), ["x"])
        with pytest.raises(ValueError, match="missing fitted column"):
            transform(state, np.zeros((2, 1)), ["y"])

    def test_invalid_clamp_rejected(self):
        with pytest.raises(ValueError, match="clamp"):
            ScalerState(("x",), np.zeros(1), np.ones(1), clamp_bound=0.0)


class TestRoundTrip:
    @given(finite_matrices())
    @settings(max_examples=80, deadline=None)
    def test_inverse_recovers_original(self, values):
        columns = [f"c{j}" for j in range(values.shape[1])]
        try:
            state = fit_scaler(values, columns)
        except ValueError:
            return  # everything constant: nothing to round trip
        idx = [columns.index(name) for name in state.kept_columns]
        z = transform(state, values, columns)
        back = inverse_transform(state, z)
        scale = np.maximum(1.0, np.abs(values[:, idx]))
        assert np.all(np.abs(back - values[:, idx]) <= 1e-10 * scale)

    def test_inverse_width_checked(self):
        state = fit_scaler(np.array([[1.0], [2.0]]), ["x"])
        with pytest.raises(ValueError, match="width"):
            inverse_transform(state, np.zeros((2, 3)))

    def test_one_dimensional_input_accepted(self):
        state = fit_scaler(np.array([1.0, 2.0, 3.0]), ["x"])
        z = transform(state, np.array([2.0]), ["x"])
        assert z.shape == (1, 1) and z[0, 0] == 0.0
