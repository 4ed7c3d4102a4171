"""Tests for ground-truth expansion, the Dice metric, the phantom, and
end-to-end example assembly."""

import numpy as np
import pytest

from vasculsynth import (
    AugmentParams,
    ExampleSpec,
    GrowthParams,
    Mask,
    NoiseParams,
    RootSpec,
    Volume,
    dice,
    ellipsoid_atlas,
    expand_ground_truth,
    grow_hemisphere_trees,
    make_training_example,
    phantom_background,
    rasterize_tree,
)
from vasculsynth.errors import EmptyGrid, LabeledBackgroundRefused, ShapeMismatch


# ----------------------------- expand_ground_truth -------------------------- #

def test_expand_noop_below_band():
    mask = Mask(np.zeros((4, 4, 4), dtype=np.uint8), (1, 1, 1))
    mask.values[2, 2, 2] = 1
    vol = Volume(np.zeros((4, 4, 4)), (1, 1, 1))
    out = expand_ground_truth(mask, vol, 95.0, 450.0)
    assert np.array_equal(out.values, mask.values)


def test_expand_adds_voxel_above_in_band():
    mask = Mask(np.zeros((8, 8, 8), dtype=np.uint8), (1, 1, 1))
    mask.values[3, 3, 5] = 1
    vol = Volume(np.zeros((8, 8, 8)), (1, 1, 1))
    vol.values[3, 3, 6] = 100.0  # 95 <= 100 < 450
    vol.values[3, 3, 4] = 460.0  # above the band: not added
    out = expand_ground_truth(mask, vol, 95.0, 450.0)
    assert out.values[3, 3, 6] == 1
    assert out.values[3, 3, 4] == 0
    assert out.values.sum() == 2


def test_expand_band_bounds_are_half_open():
    mask = Mask(np.zeros((4, 4, 6), dtype=np.uint8), (1, 1, 1))
    mask.values[1, 1, 2] = 1
    vol = Volume(np.zeros((4, 4, 6)), (1, 1, 1))
    vol.values[1, 1, 3] = 95.0   # inclusive lower bound
    vol.values[1, 1, 1] = 450.0  # exclusive upper bound
    out = expand_ground_truth(mask, vol, 95.0, 450.0)
    assert out.values[1, 1, 3] == 1
    assert out.values[1, 1, 1] == 0


def test_expand_single_pass_no_chaining():
    mask = Mask(np.zeros((2, 2, 6), dtype=np.uint8), (1, 1, 1))
    mask.values[0, 0, 0] = 1
    vol = Volume(np.full((2, 2, 6), 100.0), (1, 1, 1))
    out = expand_ground_truth(mask, vol, 95.0, 450.0)
    assert out.values[0, 0, 1] == 1
    assert out.values[0, 0, 2] == 0  # would need a second pass


def _expand_oracle(mask_vals, vol_vals, lo, hi):
    out = mask_vals.copy()
    nx, ny, nz = mask_vals.shape
    for i in range(nx):
        for j in range(ny):
            for k in range(nz):
                if not mask_vals[i, j, k]:
                    continue
                for dz in (-1, 1):
                    z = k + dz
                    if 0 <= z < nz and lo <= vol_vals[i, j, z] < hi:
                        out[i, j, z] = 1
    return out


@pytest.mark.parametrize("seed", range(10))
def test_expand_matches_nested_loop_reference(seed):
    rng = np.random.default_rng(seed)
    mask = Mask((rng.random((16, 16, 16)) > 0.8).astype(np.uint8), (1, 1, 1))
    vol = Volume(rng.uniform(-200, 600, (16, 16, 16)).astype(np.float32), (1, 1, 1))
    out = expand_ground_truth(mask, vol, 95.0, 450.0)
    expected = _expand_oracle(mask.values, vol.values, 95.0, 450.0)
    assert np.array_equal(out.values, expected)


def test_expand_is_extensive():
    rng = np.random.default_rng(42)
    mask = Mask((rng.random((12, 12, 12)) > 0.7).astype(np.uint8), (1, 1, 1))
    vol = Volume(rng.uniform(0, 500, (12, 12, 12)), (1, 1, 1))
    out = expand_ground_truth(mask, vol, 95.0, 450.0)
    assert np.all(out.values >= mask.values)


def test_expand_validation():
    mask = Mask(np.zeros((4, 4, 4), dtype=np.uint8), (1, 1, 1))
    vol = Volume(np.zeros((4, 4, 4)), (1, 1, 1))
    with pytest.raises(ValueError):
        expand_ground_truth(mask, vol, 450.0, 95.0)
    with pytest.raises(ShapeMismatch):
        expand_ground_truth(mask, Volume(np.zeros((5, 4, 4)), (1, 1, 1)), 95.0, 450.0)


# ------------------------------------ dice ---------------------------------- #

def test_dice_identical_nonempty():
    m = Mask((np.random.default_rng(0).random((8, 8, 8)) > 0.5).astype(np.uint8), (1, 1, 1))
    assert dice(m, m) == 1.0


def test_dice_disjoint():
    a = Mask(np.zeros((4, 4, 4), dtype=np.uint8), (1, 1, 1))
    b = Mask(np.zeros((4, 4, 4), dtype=np.uint8), (1, 1, 1))
    a.values[0, 0, 0] = 1
    b.values[1, 1, 1] = 1
    assert dice(a, b) == 0.0


def test_dice_half_overlap():
    a = Mask(np.zeros((4, 4, 4), dtype=np.uint8), (1, 1, 1))
    b = Mask(np.zeros((4, 4, 4), dtype=np.uint8), (1, 1, 1))
    a.values[0, 0, :4] = 1
    b.values[0, 0, 2:4] = 1
    b.values[0, 1, 0:2] = 1
    assert dice(a, b) == pytest.approx(0.5)


def test_dice_both_empty_is_one():
    e = Mask(np.zeros((4, 4, 4), dtype=np.uint8), (1, 1, 1))
    assert dice(e, e) == 1.0


@pytest.mark.parametrize("seed", range(20))
def test_dice_matches_set_arithmetic_and_symmetry(seed):
    rng = np.random.default_rng(seed)
    a = Mask((rng.random((8, 8, 8)) > 0.6).astype(np.uint8), (1, 1, 1))
    b = Mask((rng.random((8, 8, 8)) > 0.6).astype(np.uint8), (1, 1, 1))
    sa = {tuple(idx) for idx in np.argwhere(a.values)}
    sb = {tuple(idx) for idx in np.argwhere(b.values)}
    expected = 1.0 if not sa and not sb else 2 * len(sa & sb) / (len(sa) + len(sb))
    assert dice(a, b) == pytest.approx(expected, abs=1e-12)
    assert dice(a, b) == dice(b, a)


# --------------------------------- phantom ---------------------------------- #

def test_phantom_regions():
    vol = phantom_background((48, 48, 48), (1, 1, 1), np.random.default_rng(0))
    assert abs(vol.values[24, 24, 24] - 35.0) <= 5.0 + 1e-3    # parenchyma +/- texture
    assert vol.values[0, 0, 0] == -1000.0                      # air corner
    # a voxel on the shell band: normalized radius in [0.9, 1.0] along +x
    x = int(24 + 0.95 * 0.42 * 48)
    assert vol.values[x, 24, 24] == 1000.0


def test_phantom_deterministic_given_rng():
    a = phantom_background((24, 24, 24), (1, 1, 1), np.random.default_rng(5))
    b = phantom_background((24, 24, 24), (1, 1, 1), np.random.default_rng(5))
    assert np.array_equal(a.values, b.values)


def test_phantom_empty_grid():
    with pytest.raises(EmptyGrid):
        phantom_background((0, 8, 8), (1, 1, 1), np.random.default_rng(0))


# --------------------------- make_training_example -------------------------- #

def _desk_spec(seed=7, max_nodes=150, augment=None, dims=48):
    bg = phantom_background((dims, dims, dims), (1, 1, 1), np.random.default_rng(99))
    growth = dict(max_nodes=max_nodes, bifurcation_prob=0.25, r_min=0.5)
    return ExampleSpec(
        background=bg,
        atlas=ellipsoid_atlas((dims, dims, dims), (1, 1, 1)),
        left_root=RootSpec((dims * 0.3, dims / 2, dims * 0.2), (0, 0, 1)),
        right_root=RootSpec((dims * 0.7, dims / 2, dims * 0.2), (0, 0, 1)),
        growth_left=GrowthParams(**growth),
        growth_right=GrowthParams(**growth),
        noise=NoiseParams(octaves=2, base_frequency=0.25, amplitude_hu=15.0),
        midsagittal_x=dims // 2,
        augment=augment,
        seed=seed,
    )


def _root_only_tree(root: RootSpec, growth: GrowthParams):
    from vasculsynth import Tree
    return Tree(root.position, root.direction, growth.beta0)


def test_single_node_trees_give_two_root_spheres():
    spec = _desk_spec(max_nodes=1)
    _, mask = make_training_example(spec)
    grid = dict(dims=spec.background.dims, spacing=spec.background.spacing,
                origin=spec.background.origin)
    left = rasterize_tree(_root_only_tree(spec.left_root, spec.growth_left), **grid)
    right = rasterize_tree(_root_only_tree(spec.right_root, spec.growth_right), **grid)
    expected = np.logical_or(left.values, right.values).astype(np.uint8)
    assert np.array_equal(mask.values, expected)


def test_hemisphere_masks_never_cross_midplane():
    spec = _desk_spec(max_nodes=400)
    left_tree, right_tree, _, _ = grow_hemisphere_trees(spec)
    grid = dict(dims=spec.background.dims, spacing=spec.background.spacing,
                origin=spec.background.origin)
    mid = spec.midsagittal_x
    left_mask = rasterize_tree(left_tree, **grid)
    right_mask = rasterize_tree(right_tree, **grid)
    assert left_mask.count() > 0 and right_mask.count() > 0
    assert left_mask.values[mid:, :, :].sum() == 0
    assert right_mask.values[:mid, :, :].sum() == 0


def test_example_deterministic():
    v1, m1 = make_training_example(_desk_spec(seed=11))
    v2, m2 = make_training_example(_desk_spec(seed=11))
    assert np.array_equal(v1.values, v2.values)
    assert np.array_equal(m1.values, m2.values)
    v3, _ = make_training_example(_desk_spec(seed=12))
    assert not np.array_equal(v1.values, v3.values)


def test_example_mask_intensity_floor_at_zero_edge_sigma():
    spec = _desk_spec(max_nodes=200)
    spec.edge_sigma = 0.0
    vol, mask = make_training_example(spec)
    inside = vol.values[mask.values == 1]
    assert inside.size > 0
    assert inside.min() >= spec.contrast_hu - spec.noise.amplitude_hu - 1e-3


def test_example_with_augmentation_keeps_mask_binary():
    aug = AugmentParams()
    vol, mask = make_training_example(_desk_spec(seed=3, augment=aug))
    assert set(np.unique(mask.values)) <= {0, 1}


def test_labeled_background_refused():
    spec = _desk_spec()
    spec.background.labeled = True
    with pytest.raises(LabeledBackgroundRefused):
        make_training_example(spec)
