"""Tests for temporal non-local-means denoising."""

import numpy as np
import pytest

from vasculsynth import DenoiseParams, Volume, temporal_nlm
from vasculsynth.errors import ShapeMismatch, TooFewFrames


def _frames(t, shape=(16, 16, 16), sigma=20.0, mu=100.0, seed=0):
    rng = np.random.default_rng(seed)
    return [Volume(mu + rng.normal(0, sigma, shape).astype(np.float32), (1, 1, 1))
            for _ in range(t)]


@pytest.mark.parametrize("t", [2, 3, 16])
def test_identical_frames_return_frame_zero_bit_exact(t):
    frame = _frames(1)[0]
    out = temporal_nlm([frame] * t, DenoiseParams())
    assert np.array_equal(out.values, frame.values)


def test_large_h_approaches_plain_temporal_mean():
    frames = _frames(8, seed=3)
    out = temporal_nlm(frames, DenoiseParams(h=1e9, patch_radius=1))
    mean = np.mean([f.values.astype(np.float64) for f in frames], axis=0)
    assert np.allclose(out.values, mean, rtol=1e-5, atol=1e-4)


def test_variance_reduction_matches_one_over_t():
    t, sigma = 16, 20.0
    frames = _frames(t, shape=(24, 24, 24), sigma=sigma, seed=5)
    out = temporal_nlm(frames, DenoiseParams(h=1e9, patch_radius=1))
    var = float(out.values.astype(np.float64).var())
    target = sigma * sigma / t
    assert 0.8 * target < var < 1.2 * target


def test_output_within_temporal_hull():
    frames = _frames(6, seed=9)
    out = temporal_nlm(frames, DenoiseParams(h=25.0, patch_radius=1))
    stack = np.stack([f.values for f in frames])
    assert np.all(out.values >= stack.min(axis=0) - 1e-3)
    assert np.all(out.values <= stack.max(axis=0) + 1e-3)


def test_small_h_sticks_to_reference():
    # With a tiny bandwidth, dissimilar frames get near-zero weight.
    ref = Volume(np.full((8, 8, 8), 100.0, dtype=np.float32), (1, 1, 1))
    far = Volume(np.full((8, 8, 8), 500.0, dtype=np.float32), (1, 1, 1))
    out = temporal_nlm([ref, far, far], DenoiseParams(h=1.0, patch_radius=0))
    assert np.allclose(out.values, ref.values, atol=1e-3)


def test_patch_radius_zero_differs_from_patched():
    frames = _frames(4, seed=11)
    frames[2].values[8, 8, 8] += 500.0  # single-voxel outlier
    out0 = temporal_nlm(frames, DenoiseParams(h=30.0, patch_radius=0))
    out1 = temporal_nlm(frames, DenoiseParams(h=30.0, patch_radius=1))
    assert not np.array_equal(out0.values, out1.values)


def test_deterministic():
    frames = _frames(5, seed=13)
    a = temporal_nlm(frames, DenoiseParams())
    b = temporal_nlm(frames, DenoiseParams())
    assert np.array_equal(a.values, b.values)


def test_too_few_frames():
    with pytest.raises(TooFewFrames):
        temporal_nlm(_frames(1), DenoiseParams())


def test_shape_mismatch():
    frames = _frames(2)
    frames.append(Volume(np.zeros((8, 8, 8)), (1, 1, 1)))
    with pytest.raises(ShapeMismatch):
        temporal_nlm(frames, DenoiseParams())


def test_params_validation():
    with pytest.raises(ValueError):
        DenoiseParams(h=0.0)
    with pytest.raises(ValueError):
        DenoiseParams(patch_radius=-1)
