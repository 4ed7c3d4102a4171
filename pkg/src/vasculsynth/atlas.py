"""Vessel-density atlas: construction, binarization, target sampling, mutation.

The atlas guides tree growth (targets are pulled toward high-density voxels)
and bounds it spatially (zero-valued voxels are out of support). It is mutated
during growth: each created node decrements a spherical neighborhood so later
targets favor unvisited regions.
"""

from dataclasses import dataclass

import numpy as np

from .errors import IndexOutOfRange, ShapeMismatch
from .grids import Grid3, Mask


@dataclass
class Atlas(Grid3):
    """Vessel-presence density in [0, 1] on a regular grid."""

    def _validate_values(self):
        if not np.all(np.isfinite(self.values)):
            raise ValueError("atlas values must be finite")
        if self.values.min() < 0 or self.values.max() > 1:
            raise ValueError("atlas values must lie in [0, 1]")

    def in_support(self, position) -> bool:
        """True iff the voxel containing `position` exists and has value > 0."""
        idx = self.world_to_index(position)
        if idx is None:
            return False
        return bool(self.values[idx] > 0)


def _sphere_window(grid: Grid3, position, radius):
    """Index slices and center-coordinate axes for voxels near a sphere.

    Returns None when the window does not intersect the grid.
    """
    p = np.asarray(position, dtype=float)
    spacing = np.asarray(grid.spacing)
    lo = np.floor((p - radius - grid.origin) / spacing - 0.5).astype(int)
    hi = np.ceil((p + radius - grid.origin) / spacing - 0.5).astype(int) + 1
    lo = np.maximum(lo, 0)
    hi = np.minimum(hi, np.asarray(grid.dims))
    if np.any(lo >= hi):
        return None
    slices = tuple(slice(int(a), int(b)) for a, b in zip(lo, hi))
    axes = [
        grid.origin[d] + (np.arange(lo[d], hi[d]) + 0.5) * spacing[d]
        for d in range(3)
    ]
    return slices, axes


def build_atlas(masks: list[Mask]) -> Atlas:
    """Voxelwise mean of binary masks (values end up in [0, 1])."""
    if not masks:
        raise ValueError("build_atlas needs at least one mask")
    first = masks[0]
    for m in masks[1:]:
        first.require_same_grid(m)
    mean = np.mean([m.values for m in masks], axis=0, dtype=np.float64)
    return Atlas(mean, first.spacing, first.origin.copy())


def binarize(atlas: Atlas, threshold: float) -> Atlas:
    """Threshold to {0, 1}; values >= threshold become 1 (inclusive rule)."""
    if not 0.0 <= threshold <= 1.0:
        raise ValueError(f"threshold must be in [0, 1], got {threshold}")
    return Atlas((atlas.values >= threshold).astype(np.float32), atlas.spacing, atlas.origin.copy())


def sample_target(atlas: Atlas, position, search_radius: float, rng=None) -> np.ndarray | None:
    """Center of the best-valued voxel within a spherical neighborhood.

    Ties are broken by smallest Euclidean distance to `position`, then by
    lexicographic (x, y, z) voxel index; the result is deterministic (the rng
    argument is accepted for interface symmetry but never consumed). Returns
    None when every voxel in range has value 0 or the sphere misses the grid.
    """
    if search_radius <= 0:
        raise ValueError("search_radius must be positive")
    win = _sphere_window(atlas, position, search_radius)
    if win is None:
        return None
    slices, (xs, ys, zs) = win
    p = np.asarray(position, dtype=float)
    d2 = (
        (xs - p[0])[:, None, None] ** 2
        + (ys - p[1])[None, :, None] ** 2
        + (zs - p[2])[None, None, :] ** 2
    )
    inside = d2 <= search_radius**2
    block = atlas.values[slices]
    vmax = np.max(np.where(inside, block, 0.0))
    if vmax <= 0:
        return None
    cand = inside & (block == vmax)
    ci, cj, ck = np.nonzero(cand)
    order = np.lexsort((ck, cj, ci, d2[ci, cj, ck]))
    best = order[0]
    idx = (slices[0].start + ci[best], slices[1].start + cj[best], slices[2].start + ck[best])
    return atlas.voxel_center(idx)


def decrement_neighborhood(atlas: Atlas, position, node_radius: float, amount: float, radius_factor: float):
    """Subtract `amount` (clamped at 0) inside a sphere of radius_factor * node_radius."""
    if amount < 0:
        raise ValueError("amount must be >= 0")
    if radius_factor <= 0:
        raise ValueError("radius_factor must be positive")
    if amount == 0:
        return
    radius = radius_factor * node_radius
    win = _sphere_window(atlas, position, radius)
    if win is None:
        return
    slices, (xs, ys, zs) = win
    p = np.asarray(position, dtype=float)
    d2 = (
        (xs - p[0])[:, None, None] ** 2
        + (ys - p[1])[None, :, None] ** 2
        + (zs - p[2])[None, None, :] ** 2
    )
    inside = d2 <= radius**2
    block = atlas.values[slices]
    atlas.values[slices] = np.where(inside, np.maximum(block - np.float32(amount), 0.0), block)


def ellipsoid_atlas(dims, spacing, semiaxes_frac: float = 0.45) -> Atlas:
    """Uniform ellipsoidal density atlas centered in the grid (test helper)."""
    nx, ny, nz = (int(d) for d in dims)
    if nx < 1 or ny < 1 or nz < 1:
        raise ValueError(f"dims must be >= 1 per axis, got {dims}")
    spacing_arr = np.asarray(spacing, dtype=float).reshape(-1)
    if spacing_arr.size == 1:
        spacing_arr = np.repeat(spacing_arr, 3)
    extent = np.array([nx, ny, nz]) * spacing_arr
    center = extent / 2.0
    semiaxes = semiaxes_frac * extent
    xs = (np.arange(nx) + 0.5) * spacing_arr[0]
    ys = (np.arange(ny) + 0.5) * spacing_arr[1]
    zs = (np.arange(nz) + 0.5) * spacing_arr[2]
    ru = (
        ((xs - center[0]) / semiaxes[0])[:, None, None] ** 2
        + ((ys - center[1]) / semiaxes[1])[None, :, None] ** 2
        + ((zs - center[2]) / semiaxes[2])[None, None, :] ** 2
    )
    return Atlas((ru <= 1.0).astype(np.float32), tuple(spacing_arr), np.zeros(3))


def split_hemispheres(atlas: Atlas, midsagittal_x: int) -> tuple[Atlas, Atlas]:
    """Split into (left, right) atlases with disjoint supports.

    The left atlas zeroes voxels with x-index >= midsagittal_x; the right
    zeroes x-index < midsagittal_x.
    """
    nx = atlas.dims[0]
    if not 0 <= midsagittal_x < nx:
        raise IndexOutOfRange(f"midsagittal_x {midsagittal_x} outside [0, {nx})")
    left = atlas.copy()
    left.values[midsagittal_x:, :, :] = 0
    right = atlas.copy()
    right.values[:midsagittal_x, :, :] = 0
    return left, right
