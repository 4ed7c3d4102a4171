"""End-to-end assembly of labeled training examples.

An example is built as grow (one tree per hemisphere, on disjoint half-atlases)
-> rasterize -> blend into a pre-contrast background -> add fractal noise ->
optional joint rigid augmentation. Everything is a pure function of the
example seed. Ground-truth enhancement and the Dice metric live here too, as
does a head-like phantom background for desk-scale runs without patient data.
"""

import concurrent.futures
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import io as vio
from .atlas import Atlas, binarize, ellipsoid_atlas, split_hemispheres
from .augment import AugmentParams, random_rigid
from .errors import EmptyGrid, LabeledBackgroundRefused
from .grids import Mask, Volume
from .noise import NoiseParams, add_noise, noise_volume
from .raster import blend_vessels, mask_union, rasterize_tree
from .tree import GrowthParams, Tree, grow_tree

# Sub-seed offsets off the example seed; growth, noise, augmentation and the
# phantom each get an independent stream.
_SEED_LEFT = 1
_SEED_RIGHT = 2
_SEED_NOISE = 3
_SEED_AUGMENT = 4
_SEED_PHANTOM = 5


@dataclass
class RootSpec:
    position: np.ndarray
    direction: np.ndarray

    def __post_init__(self):
        self.position = np.asarray(self.position, dtype=float).reshape(3)
        self.direction = np.asarray(self.direction, dtype=float).reshape(3)


@dataclass
class ExampleSpec:
    """Everything needed to build one (volume, mask) training pair."""

    background: Volume
    atlas: Atlas
    left_root: RootSpec
    right_root: RootSpec
    growth_left: GrowthParams
    growth_right: GrowthParams
    noise: NoiseParams
    atlas_threshold: float = 0.05
    midsagittal_x: int | None = None  # defaults to nx // 2 of the atlas
    contrast_hu: float = 300.0
    edge_sigma: float = 0.5
    augment: AugmentParams | None = None
    supersample: int = 2
    seed: int = 0


def _erode_toward_plane(half: Atlas, midsagittal_x: int, margin_mm: float, side: str):
    """Zero support columns within margin_mm of the midsagittal plane.

    Grown node spheres (including tips discontinued one step out of support)
    reach at most r_root * (1 + 1/beta) past a support voxel, so keeping the
    support that far from the plane guarantees rasterized vessels never cross.
    """
    plane_x = half.origin[0] + midsagittal_x * half.spacing[0]
    centers = half.axis_centers(0)
    if side == "left":
        cols = centers > plane_x - margin_mm
    else:
        cols = centers < plane_x + margin_mm
    half.values[cols, :, :] = 0


def _growth_margin_mm(spec: ExampleSpec, root: RootSpec, growth: GrowthParams) -> float:
    r_root = growth.beta0 * float(np.linalg.norm(root.direction))
    slack = 1.5  # headroom for rare survivor-reset branch expansions
    return spec.atlas.spacing[0] / 2.0 + slack * r_root * (1.0 + 1.0 / growth.beta0)


def grow_hemisphere_trees(spec: ExampleSpec) -> tuple[Tree, Tree, Atlas, Atlas]:
    """Grow the left and right trees on disjoint hemisphere atlases.

    Returns (left_tree, right_tree, left_atlas, right_atlas); the returned
    atlases are the post-growth (decremented) guidance fields.
    """
    binary = binarize(spec.atlas, spec.atlas_threshold)
    mid = spec.midsagittal_x if spec.midsagittal_x is not None else spec.atlas.dims[0] // 2
    left_atlas, right_atlas = split_hemispheres(binary, mid)
    _erode_toward_plane(left_atlas, mid, _growth_margin_mm(spec, spec.left_root, spec.growth_left), "left")
    _erode_toward_plane(right_atlas, mid, _growth_margin_mm(spec, spec.right_root, spec.growth_right), "right")

    left_tree = grow_tree(spec.growth_left, left_atlas,
                          spec.left_root.position, spec.left_root.direction,
                          rng=np.random.default_rng(spec.seed + _SEED_LEFT))
    right_tree = grow_tree(spec.growth_right, right_atlas,
                           spec.right_root.position, spec.right_root.direction,
                           rng=np.random.default_rng(spec.seed + _SEED_RIGHT))
    return left_tree, right_tree, left_atlas, right_atlas


def make_training_example(spec: ExampleSpec) -> tuple[Volume, Mask]:
    """Build one (volume, mask) pair, fully determined by spec.seed."""
    if spec.background.labeled:
        raise LabeledBackgroundRefused(
            "synthetic vessels are never rendered into labeled scans")
    left_tree, right_tree, _, _ = grow_hemisphere_trees(spec)

    grid = dict(dims=spec.background.dims, spacing=spec.background.spacing,
                origin=spec.background.origin)
    mask = mask_union(
        rasterize_tree(left_tree, supersample=spec.supersample, **grid),
        rasterize_tree(right_tree, supersample=spec.supersample, **grid),
    )
    volume = blend_vessels(spec.background, mask, spec.contrast_hu, spec.edge_sigma)

    noise_params = NoiseParams(
        octaves=spec.noise.octaves,
        base_frequency=spec.noise.base_frequency,
        persistence=spec.noise.persistence,
        lacunarity=spec.noise.lacunarity,
        amplitude_hu=spec.noise.amplitude_hu,
        seed=spec.seed + _SEED_NOISE,
    )
    volume = add_noise(volume, noise_volume(volume.dims, volume.spacing,
                                            noise_params, origin=volume.origin))
    if spec.augment is not None:
        volume, mask = random_rigid(volume, mask, spec.augment,
                                    rng=np.random.default_rng(spec.seed + _SEED_AUGMENT))
    return volume, mask


# --------------------------- ground truth & metric -------------------------- #

def expand_ground_truth(mask: Mask, volume: Volume, lo: float, hi: float) -> Mask:
    """Add voxels one axial slice above/below set voxels when their intensity
    lies in [lo, hi). Single pass over the input mask, no chaining."""
    if lo >= hi:
        raise ValueError(f"need lo < hi, got {lo}, {hi}")
    mask.require_same_grid(volume)
    src = mask.values.astype(bool)
    shifted = np.zeros_like(src)
    shifted[:, :, 1:] |= src[:, :, :-1]   # set voxel directly below
    shifted[:, :, :-1] |= src[:, :, 1:]   # set voxel directly above
    band = (volume.values >= lo) & (volume.values < hi)
    out = src | (shifted & band)
    return Mask(out.astype(np.uint8), mask.spacing, mask.origin.copy())


def dice(a: Mask, b: Mask) -> float:
    """Dice overlap 2|A&B| / (|A| + |B|); 1.0 when both masks are empty."""
    a.require_same_grid(b)
    ca, cb = a.count(), b.count()
    if ca + cb == 0:
        return 1.0
    inter = int(np.logical_and(a.values, b.values).sum())
    return 2.0 * inter / (ca + cb)


# ------------------------------ phantom background -------------------------- #

def phantom_background(dims, spacing, rng=None) -> Volume:
    """Head-like test volume: ellipsoidal bone shell (1000 HU) around textured
    parenchyma (35 HU plus low-amplitude fractal texture), air outside."""
    nx, ny, nz = (int(d) for d in dims)
    if nx < 1 or ny < 1 or nz < 1:
        raise EmptyGrid(f"dims must be >= 1 per axis, got {dims}")
    if rng is None:
        rng = np.random.default_rng(0)
    spacing = np.asarray(spacing, dtype=float).reshape(-1)
    if spacing.size == 1:
        spacing = np.repeat(spacing, 3)

    extent = np.array([nx, ny, nz]) * spacing
    center = extent / 2.0
    semiaxes = 0.42 * extent
    xs = (np.arange(nx) + 0.5) * spacing[0]
    ys = (np.arange(ny) + 0.5) * spacing[1]
    zs = (np.arange(nz) + 0.5) * spacing[2]
    ru = np.sqrt(
        ((xs - center[0]) / semiaxes[0])[:, None, None] ** 2
        + ((ys - center[1]) / semiaxes[1])[None, :, None] ** 2
        + ((zs - center[2]) / semiaxes[2])[None, None, :] ** 2
    )

    texture_params = NoiseParams(octaves=2, base_frequency=0.08, amplitude_hu=5.0,
                                 seed=int(rng.integers(2**32)))
    texture = noise_volume((nx, ny, nz), spacing, texture_params)
    values = np.full((nx, ny, nz), -1000.0, dtype=np.float64)
    interior = ru < 0.9
    shell = (ru >= 0.9) & (ru <= 1.0)
    values[interior] = 35.0 + texture.values[interior]
    values[shell] = 1000.0
    return Volume(values, tuple(spacing), np.zeros(3))


# ------------------------------ batch generation ---------------------------- #

def example_spec_from_config(config: dict, seed: int, base_dir=".") -> ExampleSpec:
    """Materialize an ExampleSpec from a JSON-style config document.

    `background` is either {"path": ...} or {"phantom": {"dims", "spacing"}};
    `atlas` is {"path": ...} or {"ellipsoid": {"dims", "spacing"}}. Growth
    parameters come from "growth" with optional "growth_left"/"growth_right"
    overrides. Relative paths resolve against base_dir.
    """
    base = Path(base_dir)

    bg_cfg = config["background"]
    if "path" in bg_cfg:
        background = vio.read_volume(base / bg_cfg["path"], expect="volume")
    elif "phantom" in bg_cfg:
        ph = bg_cfg["phantom"]
        background = phantom_background(ph["dims"], ph["spacing"],
                                        rng=np.random.default_rng(seed + _SEED_PHANTOM))
    else:
        raise ValueError("background needs 'path' or 'phantom'")

    atlas_cfg = config["atlas"]
    if "path" in atlas_cfg:
        atlas = vio.read_volume(base / atlas_cfg["path"], expect="atlas")
    elif "ellipsoid" in atlas_cfg:
        el = atlas_cfg["ellipsoid"]
        atlas = ellipsoid_atlas(el["dims"], el["spacing"])
    else:
        raise ValueError("atlas needs 'path' or 'ellipsoid'")

    roots = config["roots"]
    left_root = RootSpec(roots["left"]["position"], roots["left"]["direction"])
    right_root = RootSpec(roots["right"]["position"], roots["right"]["direction"])

    shared = dict(config.get("growth", {}))
    growth_left = GrowthParams(**{**shared, **config.get("growth_left", {})})
    growth_right = GrowthParams(**{**shared, **config.get("growth_right", {})})
    noise = NoiseParams(**config.get("noise", {}))
    blend = config.get("blend", {})
    aug_cfg = config.get("augment")
    augment = None
    if aug_cfg is not None:
        aug_kwargs = {k: tuple(v) if isinstance(v, list) else v for k, v in aug_cfg.items()}
        augment = AugmentParams(**aug_kwargs)

    return ExampleSpec(
        background=background,
        atlas=atlas,
        left_root=left_root,
        right_root=right_root,
        growth_left=growth_left,
        growth_right=growth_right,
        noise=noise,
        atlas_threshold=config.get("atlas_threshold", 0.05),
        midsagittal_x=config.get("midsagittal_x"),
        contrast_hu=blend.get("contrast_hu", 300.0),
        edge_sigma=blend.get("edge_sigma", 0.5),
        augment=augment,
        supersample=config.get("supersample", 2),
        seed=seed,
    )


def _generate_one(config: dict, out_dir: str, base_dir: str, seed: int, index: int) -> dict:
    spec = example_spec_from_config(config, seed, base_dir=base_dir)
    volume, mask = make_training_example(spec)
    vol_name = f"ex{index:04d}_volume.vvol"
    mask_name = f"ex{index:04d}_mask.vvol"
    vio.write_volume(volume, Path(out_dir) / vol_name)
    vio.write_volume(mask, Path(out_dir) / mask_name)
    return {"index": index, "seed": seed, "volume": vol_name, "mask": mask_name,
            "spec": config}


def generate_dataset(config: dict, out_dir, seed: int, count: int = 1,
                     jobs: int = 1, base_dir=".") -> Path:
    """Generate `count` examples (seeds seed+0 .. seed+count-1) plus a manifest.

    Examples are independent; with jobs > 1 they are built in worker processes.
    Output bytes do not depend on the job count. Returns the manifest path.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    args = [(config, str(out), str(base_dir), seed + i, i) for i in range(count)]
    if jobs > 1 and count > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as pool:
            entries = list(pool.map(_generate_one, *zip(*args)))
    else:
        entries = [_generate_one(*a) for a in args]
    manifest = {
        "format": "vasculsynth-manifest v1",
        "seed": seed,
        "count": count,
        "examples": entries,
    }
    manifest_path = out / "manifest.json"
    manifest_path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n",
                             encoding="utf-8")
    return manifest_path
