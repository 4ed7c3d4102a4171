"""Shared 3D grid containers: scan volumes, binary masks, density atlases.

Arrays are indexed ``[x, y, z]`` with shape ``(nx, ny, nz)``. Voxel ``(i, j, k)``
spans ``[origin + i*spacing, origin + (i+1)*spacing)`` in millimeters and its
center sits at ``origin + (i + 0.5) * spacing``. World-to-voxel conversion uses
``floor``.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import ShapeMismatch


def _as_triple(x) -> tuple[float, float, float]:
    arr = np.asarray(x, dtype=float).reshape(-1)
    if arr.size == 1:
        arr = np.repeat(arr, 3)
    if arr.size != 3:
        raise ValueError(f"expected 3 components, got {arr.size}")
    return (float(arr[0]), float(arr[1]), float(arr[2]))


@dataclass
class Grid3:
    """A scalar field on a regular 3D grid with per-axis spacing in mm."""

    values: np.ndarray
    spacing: tuple[float, float, float] = (1.0, 1.0, 1.0)
    origin: np.ndarray = field(default_factory=lambda: np.zeros(3))

    _dtype = np.float32

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=self._dtype)
        if self.values.ndim != 3:
            raise ValueError(f"values must be 3D, got ndim={self.values.ndim}")
        if min(self.values.shape) < 1:
            raise ValueError(f"dims must be >= 1 per axis, got {self.values.shape}")
        self.spacing = _as_triple(self.spacing)
        if min(self.spacing) <= 0:
            raise ValueError(f"spacing must be positive, got {self.spacing}")
        self.origin = np.asarray(self.origin, dtype=float).reshape(3).copy()
        self._validate_values()

    def _validate_values(self):
        pass

    @property
    def dims(self) -> tuple[int, int, int]:
        return self.values.shape

    def same_grid(self, other: "Grid3") -> bool:
        return (
            self.dims == other.dims
            and np.allclose(self.spacing, other.spacing)
            and np.allclose(self.origin, other.origin)
        )

    def require_same_grid(self, other: "Grid3"):
        if not self.same_grid(other):
            raise ShapeMismatch(
                f"grids differ: {self.dims}/{self.spacing} vs {other.dims}/{other.spacing}"
            )

    def world_to_index(self, position) -> tuple[int, int, int] | None:
        """Voxel index containing a world position, or None if outside the grid."""
        p = np.asarray(position, dtype=float)
        idx = np.floor((p - self.origin) / np.asarray(self.spacing)).astype(int)
        if np.any(idx < 0) or np.any(idx >= np.asarray(self.dims)):
            return None
        return (int(idx[0]), int(idx[1]), int(idx[2]))

    def voxel_center(self, index) -> np.ndarray:
        """World position (mm) of a voxel center."""
        return self.origin + (np.asarray(index, dtype=float) + 0.5) * np.asarray(self.spacing)

    def axis_centers(self, axis: int) -> np.ndarray:
        """Centers of all voxels along one axis, in mm."""
        n = self.dims[axis]
        return self.origin[axis] + (np.arange(n) + 0.5) * self.spacing[axis]

    def copy(self):
        return type(self)(self.values.copy(), self.spacing, self.origin.copy())


@dataclass
class Volume(Grid3):
    """Scan volume in Hounsfield-unit-like intensities (float32 storage)."""

    labeled: bool = False

    def _validate_values(self):
        if not np.all(np.isfinite(self.values)):
            raise ValueError("volume values must be finite")

    def copy(self):
        return Volume(self.values.copy(), self.spacing, self.origin.copy(), labeled=self.labeled)


@dataclass
class Mask(Grid3):
    """Binary ground-truth mask (uint8 storage, strictly 0/1)."""

    _dtype = np.uint8

    def _validate_values(self):
        if self.values.max(initial=0) > 1:
            raise ValueError("mask values must be strictly binary")

    def count(self) -> int:
        return int(self.values.sum())
