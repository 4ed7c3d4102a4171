"""3D gradient (Perlin) noise and multi-octave fractal composition.

Classic lattice gradient noise: a seeded permutation table hashes each integer
lattice corner to one of 16 precomputed unit gradients, corner dot products are
blended with the quintic fade 6t^5 - 15t^4 + 10t^3, and the result is divided
by sqrt(3)/2 (the theoretical bound for unit gradients in 3D) so values stay
in [-1, 1]. Evaluation is vectorized over arrays of points.
"""

import functools
from dataclasses import dataclass

import numpy as np

from .errors import EmptyGrid
from .grids import Volume

_NORMALIZER = np.sqrt(3.0) / 2.0

# 12 cube-edge directions (normalized) plus 4 classic repeats.
_S = 1.0 / np.sqrt(2.0)
_GRADIENTS = np.array([
    (1, 1, 0), (-1, 1, 0), (1, -1, 0), (-1, -1, 0),
    (1, 0, 1), (-1, 0, 1), (1, 0, -1), (-1, 0, -1),
    (0, 1, 1), (0, -1, 1), (0, 1, -1), (0, -1, -1),
    (1, 1, 0), (-1, 1, 0), (0, -1, 1), (0, -1, -1),
], dtype=np.float64) * _S


@dataclass
class NoiseParams:
    """Multi-octave noise configuration."""

    octaves: int = 2
    base_frequency: float = 0.1  # cycles per mm
    persistence: float = 0.5
    lacunarity: float = 2.0
    amplitude_hu: float = 20.0
    seed: int = 0

    def __post_init__(self):
        if self.octaves < 1:
            raise ValueError("octaves must be >= 1")
        if self.base_frequency <= 0:
            raise ValueError("base_frequency must be positive")
        if self.persistence <= 0:
            raise ValueError("persistence must be positive")
        if self.lacunarity <= 1:
            raise ValueError("lacunarity must exceed 1")


@functools.lru_cache(maxsize=64)
def _permutation(seed: int) -> np.ndarray:
    perm = np.random.default_rng(seed).permutation(256).astype(np.int64)
    return np.concatenate([perm, perm])


def _fade(t: np.ndarray) -> np.ndarray:
    return t * t * t * (t * (t * 6.0 - 15.0) + 10.0)


def perlin3(p, seed: int = 0):
    """Gradient noise at points `p` (shape (..., 3), lattice units) in [-1, 1].

    Zero at every integer lattice point; deterministic in (p, seed). Scalars
    in, scalar out; arrays are evaluated elementwise.
    """
    pts = np.asarray(p, dtype=np.float64)
    scalar = pts.ndim == 1
    pts = np.atleast_2d(pts)
    if pts.shape[-1] != 3:
        raise ValueError("points must have 3 components")
    perm = _permutation(seed)

    cell = np.floor(pts)
    frac = pts - cell
    ix = cell[..., 0].astype(np.int64) & 255
    iy = cell[..., 1].astype(np.int64) & 255
    iz = cell[..., 2].astype(np.int64) & 255

    corner = {}
    for dx in (0, 1):
        for dy in (0, 1):
            for dz in (0, 1):
                h = perm[perm[perm[ix + dx] + iy + dy] + iz + dz] & 15
                g = _GRADIENTS[h]
                off = frac - np.array([dx, dy, dz], dtype=np.float64)
                corner[(dx, dy, dz)] = np.einsum("...k,...k->...", g, off)

    u = _fade(frac[..., 0])
    v = _fade(frac[..., 1])
    w = _fade(frac[..., 2])

    def lerp(t, a, b):
        return a + t * (b - a)

    x00 = lerp(u, corner[(0, 0, 0)], corner[(1, 0, 0)])
    x10 = lerp(u, corner[(0, 1, 0)], corner[(1, 1, 0)])
    x01 = lerp(u, corner[(0, 0, 1)], corner[(1, 0, 1)])
    x11 = lerp(u, corner[(0, 1, 1)], corner[(1, 1, 1)])
    y0 = lerp(v, x00, x10)
    y1 = lerp(v, x01, x11)
    out = lerp(w, y0, y1) / _NORMALIZER
    return float(out[0]) if scalar else out


def fbm(p, params: NoiseParams):
    """Octave sum of perlin3, normalized so the output stays in [-1, 1].

    Octave o evaluates perlin3(p * base_frequency * lacunarity^o, seed + o)
    weighted by persistence^o; the sum is divided by the total weight.
    """
    pts = np.asarray(p, dtype=np.float64)
    scalar = pts.ndim == 1
    pts = np.atleast_2d(pts)
    total = np.zeros(pts.shape[:-1], dtype=np.float64)
    weight_sum = 0.0
    for o in range(params.octaves):
        weight = params.persistence**o
        freq = params.base_frequency * params.lacunarity**o
        total += weight * perlin3(pts * freq, params.seed + o)
        weight_sum += weight
    out = total / weight_sum
    return float(out[0]) if scalar else out


def noise_volume(dims, spacing, params: NoiseParams, origin=(0.0, 0.0, 0.0)) -> Volume:
    """Volume whose voxel values are amplitude_hu * fbm(voxel center in mm).

    The field is evaluated in 3D, so slices along any axis agree with direct
    evaluation on that plane. Computed in z-slabs to bound memory.
    """
    nx, ny, nz = (int(d) for d in dims)
    if nx < 1 or ny < 1 or nz < 1:
        raise EmptyGrid(f"dims must be >= 1 per axis, got {dims}")
    spacing = np.asarray(spacing, dtype=float).reshape(-1)
    if spacing.size == 1:
        spacing = np.repeat(spacing, 3)
    origin = np.asarray(origin, dtype=float)
    xs = origin[0] + (np.arange(nx) + 0.5) * spacing[0]
    ys = origin[1] + (np.arange(ny) + 0.5) * spacing[1]
    zs = origin[2] + (np.arange(nz) + 0.5) * spacing[2]

    values = np.empty((nx, ny, nz), dtype=np.float32)
    slab = max(1, int(2**20 // max(nx * ny, 1)))  # ~1M points per chunk
    for k0 in range(0, nz, slab):
        k1 = min(k0 + slab, nz)
        pts = np.stack(np.meshgrid(xs, ys, zs[k0:k1], indexing="ij"), axis=-1)
        values[:, :, k0:k1] = (params.amplitude_hu * fbm(pts, params)).astype(np.float32)
    return Volume(values, tuple(spacing), origin.copy())


def add_noise(volume: Volume, noise: Volume) -> Volume:
    """Voxelwise sum of a volume and a noise volume."""
    volume.require_same_grid(noise)
    return Volume(volume.values + noise.values, volume.spacing, volume.origin.copy(),
                  labeled=volume.labeled)
