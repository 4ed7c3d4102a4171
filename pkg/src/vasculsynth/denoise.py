"""Temporal non-local-means denoising across the frames of a 4D sequence.

Instead of averaging spatial patches within one image, each voxel is averaged
through time: frame t contributes with weight exp(-D_t^2 / h^2), where D_t is
the RMS intensity difference between the patch around the voxel in frame t and
the same patch in the reference frame (frame 0, the pre-contrast frame). This
assumes the per-frame noise is temporally independent.
"""

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import TooFewFrames
from .grids import Volume


@dataclass
class DenoiseParams:
    h: float = 30.0          # intensity-similarity bandwidth, HU
    patch_radius: int = 1    # voxels; 0 recovers the single-voxel variant

    def __post_init__(self):
        if self.h <= 0:
            raise ValueError("h must be positive")
        if self.patch_radius < 0:
            raise ValueError("patch_radius must be >= 0")


def temporal_nlm(frames: list[Volume], params: DenoiseParams) -> Volume:
    """Weighted temporal mean of frames, anchored at frame 0.

    Computed as ref + sum_t w_t (I_t - ref) / sum_t w_t, which is algebraically
    the weighted mean but returns frame 0 bit-exactly when all frames are
    identical. Weight w_0 is exactly 1.
    """
    if len(frames) < 2:
        raise TooFewFrames(f"need at least 2 frames, got {len(frames)}")
    ref_vol = frames[0]
    for f in frames[1:]:
        ref_vol.require_same_grid(f)

    ref = ref_vol.values.astype(np.float64)
    size = 2 * params.patch_radius + 1
    h2 = params.h * params.h
    weight_sum = np.ones_like(ref)
    correction = np.zeros_like(ref)
    for frame in frames[1:]:
        diff = frame.values.astype(np.float64) - ref
        if params.patch_radius > 0:
            d2 = ndimage.uniform_filter(diff * diff, size=size, mode="reflect")
        else:
            d2 = diff * diff
        w = np.exp(-d2 / h2)
        weight_sum += w
        correction += w * diff
    out = ref + correction / weight_sum
    return Volume(out, ref_vol.spacing, ref_vol.origin.copy())
