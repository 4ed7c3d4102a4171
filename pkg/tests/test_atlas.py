"""Tests for atlas construction, sampling, and mutation."""

import numpy as np
import pytest

from vasculsynth import (
    Atlas,
    Mask,
    binarize,
    build_atlas,
    decrement_neighborhood,
    sample_target,
    split_hemispheres,
)
from vasculsynth.errors import IndexOutOfRange, ShapeMismatch


def _mask(values):
    return Mask(np.asarray(values, dtype=np.uint8), (1.0, 1.0, 1.0))


# -------------------------------- build_atlas ------------------------------- #

def test_build_mean_of_identical_masks():
    m = _mask(np.random.default_rng(0).random((4, 5, 6)) > 0.5)
    atlas = build_atlas([m, m])
    assert np.array_equal(atlas.values, m.values.astype(np.float32))


def test_build_full_plus_empty_gives_half():
    full = _mask(np.ones((3, 3, 3)))
    empty = _mask(np.zeros((3, 3, 3)))
    atlas = build_atlas([full, empty])
    assert np.all(atlas.values == 0.5)


def test_build_single_voxel_in_one_of_three():
    masks = [_mask(np.zeros((2, 2, 2))) for _ in range(3)]
    masks[1].values[1, 0, 1] = 1
    atlas = build_atlas(masks)
    assert atlas.values[1, 0, 1] == pytest.approx(1.0 / 3.0)
    assert atlas.values[0, 0, 0] == 0.0


def test_build_shape_mismatch():
    with pytest.raises(ShapeMismatch):
        build_atlas([_mask(np.zeros((2, 2, 2))), _mask(np.zeros((3, 2, 2)))])


def test_build_empty_list_rejected():
    with pytest.raises(ValueError):
        build_atlas([])


# --------------------------------- binarize --------------------------------- #

def test_binarize_zero_threshold_sets_everything():
    atlas = Atlas(np.random.default_rng(1).random((4, 4, 4)).astype(np.float32), (1, 1, 1))
    atlas.values[0, 0, 0] = 0.0
    out = binarize(atlas, 0.0)
    assert np.all(out.values == 1.0)


def test_binarize_above_max_clears_everything():
    atlas = Atlas(np.full((3, 3, 3), 0.7, dtype=np.float32), (1, 1, 1))
    out = binarize(atlas, 0.8)
    assert np.all(out.values == 0.0)


def test_binarize_boundary_is_inclusive():
    atlas = Atlas(np.full((2, 2, 2), 0.5, dtype=np.float32), (1, 1, 1))
    assert np.all(binarize(atlas, 0.5).values == 1.0)


def test_binarize_bad_threshold():
    atlas = Atlas(np.zeros((2, 2, 2), dtype=np.float32), (1, 1, 1))
    with pytest.raises(ValueError):
        binarize(atlas, 1.5)


# ------------------------------- sample_target ------------------------------ #

def test_sample_target_zero_neighborhood():
    atlas = Atlas(np.zeros((8, 8, 8), dtype=np.float32), (1, 1, 1))
    assert sample_target(atlas, (4.0, 4.0, 4.0), 3.0) is None


def test_sample_target_single_nonzero_voxel():
    atlas = Atlas(np.zeros((8, 8, 8), dtype=np.float32), (1, 1, 1))
    atlas.values[5, 4, 3] = 0.7
    out = sample_target(atlas, (4.0, 4.0, 4.0), 4.0)
    assert np.allclose(out, [5.5, 4.5, 3.5])


def test_sample_target_prefers_nearer_of_equal_maxima():
    atlas = Atlas(np.zeros((16, 8, 8), dtype=np.float32), (1, 1, 1))
    atlas.values[6, 4, 4] = 0.9   # distance ~1.1 from query
    atlas.values[12, 4, 4] = 0.9  # distance ~7 from query
    out = sample_target(atlas, (5.4, 4.5, 4.5), 10.0)
    assert np.allclose(out, [6.5, 4.5, 4.5])


def test_sample_target_outside_grid_is_zero():
    atlas = Atlas(np.ones((4, 4, 4), dtype=np.float32), (1, 1, 1))
    assert sample_target(atlas, (-50.0, 0.0, 0.0), 2.0) is None


def _brute_force_target(atlas, position, radius):
    best = None
    p = np.asarray(position, dtype=float)
    nx, ny, nz = atlas.dims
    for i in range(nx):
        for j in range(ny):
            for k in range(nz):
                c = atlas.voxel_center((i, j, k))
                d2 = float(np.sum((c - p) ** 2))
                if d2 > radius * radius:
                    continue
                v = float(atlas.values[i, j, k])
                if v <= 0:
                    continue
                key = (-v, d2, i, j, k)
                if best is None or key < best[0]:
                    best = (key, c)
    return None if best is None else best[1]


@pytest.mark.parametrize("seed", range(8))
def test_sample_target_matches_brute_force(seed):
    rng = np.random.default_rng(seed)
    # quantized values force plenty of exact ties
    vals = (rng.integers(0, 4, size=(10, 9, 8)) / 4.0).astype(np.float32)
    atlas = Atlas(vals, (1.0, 1.2, 0.8))
    pos = rng.uniform(0, [10, 10.8, 6.4], size=3)
    radius = rng.uniform(1.0, 5.0)
    expected = _brute_force_target(atlas, pos, radius)
    got = sample_target(atlas, pos, radius)
    if expected is None:
        assert got is None
    else:
        assert np.allclose(got, expected)


# --------------------------- decrement_neighborhood ------------------------- #

def test_decrement_zero_amount_is_noop():
    atlas = Atlas(np.full((6, 6, 6), 0.8, dtype=np.float32), (1, 1, 1))
    before = atlas.values.copy()
    decrement_neighborhood(atlas, (3.0, 3.0, 3.0), 2.0, 0.0, 1.0)
    assert np.array_equal(atlas.values, before)


def test_decrement_full_amount_clamps_to_zero():
    atlas = Atlas(np.full((6, 6, 6), 0.8, dtype=np.float32), (1, 1, 1))
    decrement_neighborhood(atlas, (3.0, 3.0, 3.0), 2.0, 1.0, 1.0)
    assert atlas.values[3, 3, 3] == 0.0
    assert atlas.values.min() >= 0.0


def test_decrement_scalar_subtraction():
    atlas = Atlas(np.full((6, 6, 6), 0.4, dtype=np.float32), (1, 1, 1))
    decrement_neighborhood(atlas, (3.0, 3.0, 3.0), 1.5, 0.25, 1.0)
    assert atlas.values[3, 3, 3] == pytest.approx(0.15, abs=1e-6)
    assert atlas.values[0, 0, 0] == pytest.approx(0.4, abs=1e-7)


def test_decrement_respects_sphere_radius():
    atlas = Atlas(np.ones((11, 11, 11), dtype=np.float32), (1, 1, 1))
    decrement_neighborhood(atlas, (5.5, 5.5, 5.5), 1.0, 0.5, 2.0)
    # voxel centers within 2.0 mm decremented, others untouched
    assert atlas.values[5, 5, 5] == 0.5
    assert atlas.values[5, 5, 7] == 0.5   # distance 2.0, inclusive
    assert atlas.values[5, 5, 8] == 1.0


def test_values_stay_in_unit_interval_after_random_ops():
    rng = np.random.default_rng(7)
    atlas = Atlas(rng.random((12, 12, 12)).astype(np.float32), (1, 1, 1))
    for _ in range(50):
        decrement_neighborhood(atlas, rng.uniform(0, 12, 3), rng.uniform(0.5, 3),
                               rng.uniform(0, 0.5), rng.uniform(0.5, 2))
    assert atlas.values.min() >= 0.0 and atlas.values.max() <= 1.0


# ------------------------------ split_hemispheres --------------------------- #

def test_split_at_zero_empties_left():
    atlas = Atlas(np.ones((6, 4, 4), dtype=np.float32), (1, 1, 1))
    left, right = split_hemispheres(atlas, 0)
    assert left.values.sum() == 0
    assert np.array_equal(right.values, atlas.values)


def test_split_partition_sums_to_original():
    rng = np.random.default_rng(2)
    atlas = Atlas(rng.random((8, 5, 5)).astype(np.float32), (1, 1, 1))
    left, right = split_hemispheres(atlas, 3)
    assert np.array_equal(left.values + right.values, atlas.values)


def test_split_supports_disjoint():
    atlas = Atlas(np.ones((8, 5, 5), dtype=np.float32), (1, 1, 1))
    left, right = split_hemispheres(atlas, 5)
    assert not np.any((left.values > 0) & (right.values > 0))


def test_split_index_out_of_range():
    atlas = Atlas(np.ones((8, 5, 5), dtype=np.float32), (1, 1, 1))
    with pytest.raises(IndexOutOfRange):
        split_hemispheres(atlas, 8)
    with pytest.raises(IndexOutOfRange):
        split_hemispheres(atlas, -1)


# --------------------------------- in_support ------------------------------- #

def test_in_support_semantics():
    atlas = Atlas(np.zeros((4, 4, 4), dtype=np.float32), (1, 1, 1))
    atlas.values[2, 2, 2] = 0.25
    assert atlas.in_support((2.5, 2.5, 2.5))
    assert atlas.in_support((2.0, 2.0, 2.0))      # floor convention
    assert not atlas.in_support((1.99, 2.0, 2.0))
    assert not atlas.in_support((99.0, 2.0, 2.0))  # outside grid
    assert not atlas.in_support((-0.01, 2.0, 2.0))
