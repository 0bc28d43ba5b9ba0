"""
k-means++ Seeding Tests
"""

import numpy as np
import pytest
from pydantic import ValidationError

from kmmeans.data_model import MaskedDataset, build_dataset
from kmmeans.errors import ConfigurationError, KGreaterThanN
from kmmeans.init import InitConfig, kmeanspp_init, row_distances, seeding_weights
from kmmeans.shared_schema import Weightings
from tests.conftest import make_masked


def test_single_center_is_one_data_row():
    """K = 1 picks one row and copies it with its mask."""
    ds = build_dataset([[1.0, None], [2.0, 3.0], [4.0, 5.0]])
    centers = kmeanspp_init(ds, 1, np.random.default_rng(0))
    assert centers.k == 1
    row = int(centers.row_indices[0])
    assert np.array_equal(centers.mask[0], ds.mask[row])
    assert np.array_equal(centers.values[0][centers.mask[0]], ds.values[row][ds.mask[row]])


@pytest.mark.parametrize("weighting", [Weightings.SCALED_DELTA, Weightings.UNSCALED_DELTA])
def test_duplicate_rows_share_the_next_draw(weighting):
    """Points {0, 0, 10} with row 3 chosen: rows 1 and 2 each have probability 1/2."""
    ds = MaskedDataset.complete(np.array([[0.0], [0.0], [10.0]]))
    weights = seeding_weights(ds, [2], weighting)
    probabilities = weights / weights.sum()
    assert probabilities.tolist() == [0.5, 0.5, 0.0]


def test_rows_without_shared_features_get_largest_weight():
    ds = build_dataset([[1.0, None], [None, 2.0], [3.0, None]])
    weights = seeding_weights(ds, [0], Weightings.UNSCALED_DELTA)
    assert weights.tolist() == [0.0, 4.0, 4.0]


def test_row_distances_undefined_without_overlap():
    ds = build_dataset([[1.0, None], [None, 2.0], [3.0, 1.0]])
    distances = row_distances(ds, 0, Weightings.SCALED_DELTA)
    assert np.isnan(distances[1])
    assert distances[2] == 4.0


@pytest.mark.parametrize("p", [2, 4])
def test_scaled_weights_leave_complete_data_draws_unchanged(p):
    """On complete data the scaled weights are the unscaled ones over p, so draws agree."""
    ds = MaskedDataset.complete(np.random.default_rng(p).normal(size=(40, p)))
    unscaled = seeding_weights(ds, [3, 17], Weightings.UNSCALED_DELTA)
    scaled = seeding_weights(ds, [3, 17], Weightings.SCALED_DELTA)
    assert np.array_equal(scaled * p, unscaled)

    for seed in range(10):
        a = kmeanspp_init(ds, 5, np.random.default_rng(seed), InitConfig(weighting=Weightings.SCALED_DELTA))
        b = kmeanspp_init(ds, 5, np.random.default_rng(seed), InitConfig(weighting=Weightings.UNSCALED_DELTA))
        assert a.row_indices.tolist() == b.row_indices.tolist()


def test_centers_are_distinct_rows():
    ds = MaskedDataset.complete(np.random.default_rng(1).normal(size=(30, 3)))
    for seed in range(20):
        centers = kmeanspp_init(ds, 6, np.random.default_rng(seed))
        assert len(set(centers.row_indices.tolist())) == 6


def test_distinct_rows_even_when_points_coincide():
    """Zero total weight falls back to uniform over the unchosen rows."""
    ds = MaskedDataset.complete(np.zeros((4, 2)))
    centers = kmeanspp_init(ds, 4, np.random.default_rng(3))
    assert sorted(centers.row_indices.tolist()) == [0, 1, 2, 3]


def test_seeding_is_deterministic_per_stream():
    ds = MaskedDataset.complete(np.random.default_rng(2).normal(size=(50, 2)))
    a = kmeanspp_init(ds, 4, np.random.default_rng(123))
    b = kmeanspp_init(ds, 4, np.random.default_rng(123))
    assert np.array_equal(a.values, b.values)


def test_seeding_rejects_bad_k():
    ds = build_dataset([[1.0], [2.0]])
    with pytest.raises(KGreaterThanN):
        kmeanspp_init(ds, 3, np.random.default_rng(0))
    with pytest.raises(ConfigurationError):
        kmeanspp_init(ds, 0, np.random.default_rng(0))


def test_init_config_validates_weighting():
    with pytest.raises(ValidationError):
        InitConfig(weighting="euclid")


@pytest.mark.parametrize("scale", [0.25, 2.0, 8.0])
@pytest.mark.parametrize("weighting", [Weightings.SCALED_DELTA, Weightings.UNSCALED_DELTA])
def test_seeding_is_scale_equivariant(scale, weighting):
    """Multiplying every observed cell by c picks the same rows from the same stream."""
    ds = make_masked(np.random.default_rng(31), 60, 4, 0.3)
    scaled = MaskedDataset(scale * ds.filled, ds.mask)
    cfg = InitConfig(weighting=weighting)
    for seed in range(10):
        a = kmeanspp_init(ds, 5, np.random.default_rng(seed), cfg)
        b = kmeanspp_init(scaled, 5, np.random.default_rng(seed), cfg)
        assert a.row_indices.tolist() == b.row_indices.tolist()
        assert np.array_equal(b.values[b.mask], scale * a.values[a.mask])
