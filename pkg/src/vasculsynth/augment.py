"""Rigid-body augmentation applied jointly to a volume and its mask.

One sampled transform covers per-plane rotations (axial about z, coronal about
y, sagittal about x, composed in that order about the grid center), voxel
translations drawn as fractions of the grid dimensions, and an optional
sagittal mirror (x-axis flip). Intensities are resampled with trilinear
interpolation, labels with nearest-neighbor, so masks stay binary.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .grids import Mask, Volume


@dataclass
class AugmentParams:
    rot_axial: tuple[float, float] = (-20.0, 20.0)      # degrees, about z
    rot_coronal: tuple[float, float] = (-10.0, 10.0)    # degrees, about y
    rot_sagittal: tuple[float, float] = (-10.0, 10.0)   # degrees, about x
    trans_z_frac: tuple[float, float] = (-0.03, 0.03)
    trans_xy_frac: tuple[float, float] = (-0.05, 0.05)
    mirror_sagittal_prob: float = 0.5
    fill_hu: float = -1000.0
    seed: int = 0

    def __post_init__(self):
        for name in ("rot_axial", "rot_coronal", "rot_sagittal",
                     "trans_z_frac", "trans_xy_frac"):
            rng = tuple(float(v) for v in getattr(self, name))
            if len(rng) != 2 or rng[0] > rng[1]:
                raise ValueError(f"{name} must be a well-ordered (lo, hi) range")
            setattr(self, name, rng)
        if not 0.0 <= self.mirror_sagittal_prob <= 1.0:
            raise ValueError("mirror_sagittal_prob must lie in [0, 1]")


@dataclass
class RigidSample:
    """One concrete draw of augmentation parameters (angles in degrees,
    shifts in voxels)."""

    rot_axial: float = 0.0
    rot_coronal: float = 0.0
    rot_sagittal: float = 0.0
    shift: tuple[float, float, float] = (0.0, 0.0, 0.0)
    mirror: bool = False


def sample_rigid(params: AugmentParams, dims, rng) -> RigidSample:
    """Draw one transform. Draw order: axial, coronal, sagittal rotations,
    then x, y, z shift fractions, then the mirror coin."""
    ax = rng.uniform(*params.rot_axial)
    cor = rng.uniform(*params.rot_coronal)
    sag = rng.uniform(*params.rot_sagittal)
    fx = rng.uniform(*params.trans_xy_frac)
    fy = rng.uniform(*params.trans_xy_frac)
    fz = rng.uniform(*params.trans_z_frac)
    mirror = bool(rng.random() < params.mirror_sagittal_prob)
    return RigidSample(
        rot_axial=float(ax),
        rot_coronal=float(cor),
        rot_sagittal=float(sag),
        shift=(float(fx * dims[0]), float(fy * dims[1]), float(fz * dims[2])),
        mirror=mirror,
    )


def _rotation_matrix(sample: RigidSample) -> np.ndarray:
    az = math.radians(sample.rot_axial)
    ay = math.radians(sample.rot_coronal)
    ax = math.radians(sample.rot_sagittal)
    rz = np.array([[math.cos(az), -math.sin(az), 0.0],
                   [math.sin(az), math.cos(az), 0.0],
                   [0.0, 0.0, 1.0]])
    ry = np.array([[math.cos(ay), 0.0, math.sin(ay)],
                   [0.0, 1.0, 0.0],
                   [-math.sin(ay), 0.0, math.cos(ay)]])
    rx = np.array([[1.0, 0.0, 0.0],
                   [0.0, math.cos(ax), -math.sin(ax)],
                   [0.0, math.sin(ax), math.cos(ax)]])
    return rx @ ry @ rz  # axial applied first, then coronal, then sagittal


def apply_rigid(volume: Volume, mask: Mask, sample: RigidSample,
                fill_hu: float = -1000.0) -> tuple[Volume, Mask]:
    """Apply one sampled transform to a volume (trilinear) and mask (nearest).

    The mirror flip happens first (exact index reversal, so it is an
    involution); rotations and translations follow via a single resampling
    about the grid center. Out-of-field voxels take fill_hu in the volume and
    0 in the mask. Identity parameters reproduce the inputs bitwise.
    """
    volume.require_same_grid(mask)
    vol_vals = volume.values
    mask_vals = mask.values
    if sample.mirror:
        vol_vals = vol_vals[::-1, :, :]
        mask_vals = mask_vals[::-1, :, :]

    has_rot = any((sample.rot_axial, sample.rot_coronal, sample.rot_sagittal))
    has_shift = any(sample.shift)
    if has_rot or has_shift:
        # Rotations are defined in physical (mm) space; anisotropic spacing is
        # folded in so the index-space matrix stays correct.
        spacing = np.asarray(volume.spacing)
        rot = _rotation_matrix(sample)
        m = np.diag(1.0 / spacing) @ rot @ np.diag(spacing)
        m_inv = np.linalg.inv(m)
        center = (np.asarray(volume.dims, dtype=float) - 1.0) / 2.0
        shift = np.asarray(sample.shift, dtype=float)
        offset = center - m_inv @ (center + shift)
        # grid-constant: voxels straddling the field edge blend with the fill
        vol_vals = ndimage.affine_transform(
            vol_vals, m_inv, offset=offset, order=1, mode="grid-constant",
            cval=fill_hu, prefilter=False)
        mask_vals = ndimage.affine_transform(
            mask_vals, m_inv, offset=offset, order=0, mode="grid-constant", cval=0)
    else:
        vol_vals = vol_vals.copy()
        mask_vals = mask_vals.copy()

    out_vol = Volume(vol_vals, volume.spacing, volume.origin.copy(), labeled=volume.labeled)
    out_mask = Mask(mask_vals, mask.spacing, mask.origin.copy())
    return out_vol, out_mask


def random_rigid(volume: Volume, mask: Mask, params: AugmentParams,
                 rng=None) -> tuple[Volume, Mask]:
    """Sample one rigid transform and apply it jointly to volume and mask."""
    volume.require_same_grid(mask)
    if rng is None:
        rng = np.random.default_rng(params.seed)
    sample = sample_rigid(params, volume.dims, rng)
    return apply_rigid(volume, mask, sample, fill_hu=params.fill_hu)
