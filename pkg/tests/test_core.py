import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from topomap.core import (
    Assignments,
    DataError,
    Dataset,
    FitConfig,
    HyperParams,
    LatentGrid,
    MapModel,
    make_square_grid,
    row_stochastic_check,
)


class TestMakeSquareGrid:
    def test_side2_corners(self):
        grid = make_square_grid(2)
        expected = np.array([[-1, -1], [-1, 1], [1, -1], [1, 1]], dtype=float)
        np.testing.assert_array_equal(grid.coords, expected)

    def test_side1_midpoint(self):
        grid = make_square_grid(1)
        np.testing.assert_array_equal(grid.coords, [[0.0, 0.0]])

    def test_side16_enumeration(self):
        grid = make_square_grid(16)
        assert grid.m == 256 and grid.l == 2
        assert grid.coords.min() == -1.0 and grid.coords.max() == 1.0
        # last axis varies fastest
        np.testing.assert_allclose(np.diff(grid.coords[:16, 1]), 2.0 / 15.0)
        assert (grid.coords[:16, 0] == -1.0).all()
        # direct enumeration oracle
        axis = [(2 * i - 15) / 15 for i in range(16)]
        expected = np.array([(a, b) for a in axis for b in axis])
        np.testing.assert_array_equal(grid.coords, expected)
        np.testing.assert_allclose(grid.coords, [(a, b) for a in np.linspace(-1, 1, 16)
                                                 for b in np.linspace(-1, 1, 16)],
                                   atol=1e-15)

    def test_rejects_bad_side(self):
        with pytest.raises(ValueError):
            make_square_grid(0)

    @given(side=st.integers(1, 6), l=st.integers(1, 3))
    @settings(max_examples=40, deadline=None)
    def test_symmetry_and_axis_permutation(self, side, l):
        grid = make_square_grid(side, l)
        assert grid.m == side ** l
        coords = grid.coords
        # symmetric about the origin
        as_set = {tuple(row) for row in coords}
        assert {tuple(-row) for row in coords} == as_set
        # coordinate multiset invariant under axis permutation
        if l > 1:
            permuted = {tuple(row) for row in coords[:, ::-1]}
            assert permuted == as_set


class TestRowStochasticCheck:
    def test_uniform_rows(self):
        assert row_stochastic_check(np.full((4, 5), 0.2))

    def test_one_hot_rows(self):
        assert row_stochastic_check(np.eye(6))

    def test_deficient_row(self):
        bad = np.full((3, 2), 0.5)
        bad[1] = [0.499, 0.5]
        assert not row_stochastic_check(bad)

    def test_negative_entry(self):
        assert not row_stochastic_check(np.array([[1.2, -0.2]]))


class TestTypes:
    def test_dataset_validation(self):
        with pytest.raises(ValueError):
            Dataset(np.empty((0, 3)))
        with pytest.raises(ValueError):
            Dataset(np.ones((3, 2)), labels=[1, 2])
        with pytest.raises(DataError):
            Dataset(np.array([[np.inf, 0.0]]))

    def test_dataset_missing_markers(self):
        ds = Dataset(np.array([[1.0, np.nan]]))
        assert ds.has_missing
        with pytest.raises(DataError):
            ds.require_finite()

    def test_assignments_validation(self):
        Assignments(np.eye(3))
        with pytest.raises(ValueError):
            Assignments(np.array([[0.6, 0.6]]))

    def test_map_model_shape_checks(self):
        grid = make_square_grid(2)
        MapModel(grid, np.zeros((4, 3)), np.zeros((7, 2)))
        with pytest.raises(ValueError):
            MapModel(grid, np.zeros((5, 3)), np.zeros((7, 2)))
        with pytest.raises(ValueError):
            MapModel(grid, np.zeros((4, 3)), np.zeros((7, 3)))

    def test_hyperparams_ranges(self):
        HyperParams(gamma=0.0, lam=0.1, sigma=1.0, eta=0.5)
        with pytest.raises(ValueError):
            HyperParams(gamma=-1.0)
        with pytest.raises(ValueError):
            HyperParams(lam=0.0)
        with pytest.raises(ValueError):
            HyperParams(sigma=0.0)
        with pytest.raises(ValueError):
            HyperParams(eta=1.0)

    def test_fit_config_ranges(self):
        with pytest.raises(ValueError):
            FitConfig(max_iters=0)
        with pytest.raises(ValueError):
            FitConfig(tol=0.0)

    def test_grid_requires_finite(self):
        with pytest.raises(ValueError):
            LatentGrid(np.array([[np.nan, 0.0]]))
