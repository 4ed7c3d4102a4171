"""Command-line interface.

Every stochastic subcommand requires --seed; repeated runs with identical
inputs, config and seed produce byte-identical outputs. Exit codes: 0 success,
1 usage error, 2 data error. `--config FILE` loads a JSON document whose
sections (growth, noise, blend, denoise, augment) provide parameter defaults
that individual flags override.
"""

import argparse
import dataclasses
import json
import re
import sys
from pathlib import Path

import numpy as np

from . import dataset as ds
from . import io as vio
from .atlas import binarize, build_atlas, split_hemispheres
from .augment import AugmentParams, random_rigid
from .denoise import DenoiseParams, temporal_nlm
from .errors import ParseError, VasculsynthError
from .grids import Mask
from .noise import NoiseParams, add_noise, noise_volume
from .raster import blend_vessels, mask_union, rasterize_tree
from .tree import GrowthParams, grow_tree, tree_from_text, tree_to_text


def _flag(name: str) -> str:
    return "--" + name.replace("_", "-")


def _add_params_flags(parser, cls, skip=("seed",)):
    """One long flag per dataclass field, so every parameter is reachable."""
    for f in dataclasses.fields(cls):
        if f.name in skip:
            continue
        default = f.default
        if isinstance(default, tuple):
            parser.add_argument(_flag(f.name), nargs=2, type=float, default=None,
                                metavar=("LO", "HI"))
        elif isinstance(default, bool):
            parser.add_argument(_flag(f.name), type=int, choices=(0, 1), default=None)
        elif isinstance(default, int):
            parser.add_argument(_flag(f.name), type=int, default=None)
        else:
            parser.add_argument(_flag(f.name), type=float, default=None)


def _load_config(path) -> dict:
    if path is None:
        return {}
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ParseError(f"{path}: config must be a JSON object")
    return doc


def _build_params(cls, section: dict, args, extra: dict | None = None):
    """Dataclass from defaults <- config section <- explicit flags."""
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = set(section) - names
    if unknown:
        raise ParseError(f"unknown {cls.__name__} config keys: {sorted(unknown)}")
    kwargs = {k: tuple(v) if isinstance(v, list) else v for k, v in section.items()}
    for name in names:
        val = getattr(args, name, None)
        if val is not None:
            kwargs[name] = tuple(val) if isinstance(val, list) else val
    if extra:
        kwargs.update(extra)
    return cls(**kwargs)


def _grid_from_args(args):
    if getattr(args, "like", None):
        ref = vio.read_volume(args.like)
        return ref.dims, ref.spacing, ref.origin
    if args.dims is None or args.spacing is None:
        raise ParseError("need either --like or both --dims and --spacing")
    origin = args.origin if args.origin is not None else (0.0, 0.0, 0.0)
    return tuple(args.dims), tuple(args.spacing), np.asarray(origin)


# ------------------------------- subcommands ------------------------------- #

def _cmd_grow(args):
    config = _load_config(args.config)
    params = _build_params(GrowthParams, config.get("growth", {}), args,
                           extra={"seed": args.seed})
    atlas = vio.read_volume(args.atlas, expect="atlas")
    tree = grow_tree(params, atlas, args.root_pos, args.root_dir,
                     rng=np.random.default_rng(args.seed))
    Path(args.out).write_text(tree_to_text(tree), encoding="utf-8")
    print(f"grew {len(tree)} nodes "
          f"({len(tree.discontinued)} discontinued) -> {args.out}")
    return 0


def _cmd_rasterize(args):
    dims, spacing, origin = _grid_from_args(args)
    mask = None
    for tree_path in args.tree:
        tree = tree_from_text(Path(tree_path).read_text(encoding="utf-8"))
        one = rasterize_tree(tree, dims, spacing, origin, supersample=args.supersample)
        mask = one if mask is None else mask_union(mask, one)
    vio.write_volume(mask, args.out)
    print(f"rasterized {len(args.tree)} tree(s), {mask.count()} voxels -> {args.out}")
    return 0


def _cmd_blend(args):
    config = _load_config(args.config).get("blend", {})
    contrast = args.contrast_hu if args.contrast_hu is not None \
        else config.get("contrast_hu", 300.0)
    edge = args.edge_sigma if args.edge_sigma is not None \
        else config.get("edge_sigma", 0.5)
    background = vio.read_volume(args.background, expect="volume")
    mask = vio.read_volume(args.mask, expect="mask")
    out = blend_vessels(background, mask, contrast, edge)
    vio.write_volume(out, args.out)
    return 0


def _cmd_noise(args):
    config = _load_config(args.config)
    params = _build_params(NoiseParams, config.get("noise", {}), args,
                           extra={"seed": args.seed})
    dims, spacing, origin = _grid_from_args(args)
    vol = noise_volume(dims, spacing, params, origin=origin)
    if args.add_to:
        vol = add_noise(vio.read_volume(args.add_to, expect="volume"), vol)
    vio.write_volume(vol, args.out)
    return 0


_FRAME_RE = re.compile(r"frame_(\d+)")


def _cmd_denoise(args):
    config = _load_config(args.config)
    params = _build_params(DenoiseParams, config.get("denoise", {}), args)
    paths = list(args.frames)
    if args.frames_dir:
        found = []
        for p in Path(args.frames_dir).iterdir():
            m = _FRAME_RE.search(p.name)
            if m and p.suffix == ".vvol":
                found.append((int(m.group(1)), p))
        paths.extend(str(p) for _, p in sorted(found))
    if not paths:
        raise ParseError("no frames given (positional paths or --frames-dir)")
    frames = [vio.read_volume(p, expect="volume") for p in paths]
    out = temporal_nlm(frames, params)
    vio.write_volume(out, args.out)
    print(f"denoised {len(frames)} frames -> {args.out}")
    return 0


def _cmd_augment(args):
    config = _load_config(args.config)
    params = _build_params(AugmentParams, config.get("augment", {}), args,
                           extra={"seed": args.seed})
    volume = vio.read_volume(args.volume, expect="volume")
    mask = vio.read_volume(args.mask, expect="mask")
    out_vol, out_mask = random_rigid(volume, mask, params,
                                     rng=np.random.default_rng(args.seed))
    vio.write_volume(out_vol, args.out_volume)
    vio.write_volume(out_mask, args.out_mask)
    return 0


def _cmd_atlas_build(args):
    masks = [vio.read_volume(p, expect="mask") for p in args.masks]
    vio.write_volume(build_atlas(masks), args.out)
    return 0


def _cmd_atlas_binarize(args):
    atlas = vio.read_volume(args.atlas, expect="atlas")
    vio.write_volume(binarize(atlas, args.threshold), args.out)
    return 0


def _cmd_atlas_split(args):
    atlas = vio.read_volume(args.atlas, expect="atlas")
    left, right = split_hemispheres(atlas, args.midsagittal_x)
    vio.write_volume(left, args.out_left)
    vio.write_volume(right, args.out_right)
    return 0


def _cmd_dataset_generate(args):
    config = _load_config(args.config)
    base_dir = Path(args.config).parent
    manifest = ds.generate_dataset(config, args.out_dir, args.seed,
                                   count=args.count, jobs=args.jobs,
                                   base_dir=base_dir)
    print(f"wrote {args.count} example(s), manifest {manifest}")
    return 0


def _cmd_expand_gt(args):
    mask = vio.read_volume(args.mask, expect="mask")
    volume = vio.read_volume(args.volume, expect="volume")
    out = ds.expand_ground_truth(mask, volume, args.lo, args.hi)
    vio.write_volume(out, args.out)
    print(f"expanded {mask.count()} -> {out.count()} voxels")
    return 0


def _cmd_dice(args):
    a = vio.read_volume(args.mask_a, expect="mask")
    b = vio.read_volume(args.mask_b, expect="mask")
    print(f"{ds.dice(a, b):.6f}")
    return 0


def _cmd_phantom(args):
    vol = ds.phantom_background(args.dims, args.spacing,
                                rng=np.random.default_rng(args.seed))
    vio.write_volume(vol, args.out)
    return 0


# --------------------------------- parser ---------------------------------- #

def _add_grid_flags(p, like_help="copy grid geometry from this .vvol"):
    p.add_argument("--like", help=like_help)
    p.add_argument("--dims", nargs=3, type=int, metavar=("NX", "NY", "NZ"))
    p.add_argument("--spacing", nargs=3, type=float, metavar=("SX", "SY", "SZ"))
    p.add_argument("--origin", nargs=3, type=float, metavar=("OX", "OY", "OZ"))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vasculsynth",
        description="Deterministic synthetic cerebrovascular volume toolkit.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("grow", help="grow a tree inside an atlas")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--config")
    p.add_argument("--atlas", required=True)
    p.add_argument("--root-pos", nargs=3, type=float, required=True,
                   metavar=("X", "Y", "Z"))
    p.add_argument("--root-dir", nargs=3, type=float, required=True,
                   metavar=("DX", "DY", "DZ"))
    p.add_argument("--out", required=True)
    _add_params_flags(p, GrowthParams)
    p.set_defaults(func=_cmd_grow)

    p = sub.add_parser("rasterize", help="voxelize tree(s) into a mask")
    p.add_argument("--tree", action="append", required=True)
    p.add_argument("--supersample", type=int, default=2)
    p.add_argument("--out", required=True)
    _add_grid_flags(p)
    p.set_defaults(func=_cmd_rasterize)

    p = sub.add_parser("blend", help="blend a vessel mask into a background volume")
    p.add_argument("--config")
    p.add_argument("--background", required=True)
    p.add_argument("--mask", required=True)
    p.add_argument("--contrast-hu", type=float, default=None)
    p.add_argument("--edge-sigma", type=float, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_blend)

    p = sub.add_parser("noise", help="generate a fractal noise volume")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--config")
    p.add_argument("--add-to", help="add the noise to this volume")
    p.add_argument("--out", required=True)
    _add_grid_flags(p)
    _add_params_flags(p, NoiseParams)
    p.set_defaults(func=_cmd_noise)

    p = sub.add_parser("denoise", help="temporal non-local-means across frames")
    p.add_argument("frames", nargs="*", help="frame volumes in temporal order")
    p.add_argument("--frames-dir", help="directory of frame_%%04d .vvol files")
    p.add_argument("--config")
    p.add_argument("--out", required=True)
    _add_params_flags(p, DenoiseParams)
    p.set_defaults(func=_cmd_denoise)

    p = sub.add_parser("augment", help="joint rigid augmentation of volume and mask")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--config")
    p.add_argument("--volume", required=True)
    p.add_argument("--mask", required=True)
    p.add_argument("--out-volume", required=True)
    p.add_argument("--out-mask", required=True)
    _add_params_flags(p, AugmentParams)
    p.set_defaults(func=_cmd_augment)

    p = sub.add_parser("atlas", help="density atlas operations")
    atlas_sub = p.add_subparsers(dest="atlas_command", required=True)
    pb = atlas_sub.add_parser("build", help="average binary masks into an atlas")
    pb.add_argument("masks", nargs="+")
    pb.add_argument("--out", required=True)
    pb.set_defaults(func=_cmd_atlas_build)
    pz = atlas_sub.add_parser("binarize", help="threshold an atlas to {0, 1}")
    pz.add_argument("atlas")
    pz.add_argument("--threshold", type=float, default=0.05)
    pz.add_argument("--out", required=True)
    pz.set_defaults(func=_cmd_atlas_binarize)
    ps = atlas_sub.add_parser("split", help="split into hemisphere atlases")
    ps.add_argument("atlas")
    ps.add_argument("--midsagittal-x", type=int, required=True)
    ps.add_argument("--out-left", required=True)
    ps.add_argument("--out-right", required=True)
    ps.set_defaults(func=_cmd_atlas_split)

    p = sub.add_parser("dataset", help="dataset assembly")
    data_sub = p.add_subparsers(dest="dataset_command", required=True)
    pg = data_sub.add_parser("generate", help="generate training examples + manifest")
    pg.add_argument("--seed", type=int, required=True)
    pg.add_argument("--config", required=True)
    pg.add_argument("--out-dir", required=True)
    pg.add_argument("--count", type=int, default=1)
    pg.add_argument("--jobs", type=int, default=1)
    pg.set_defaults(func=_cmd_dataset_generate)

    p = sub.add_parser("expand-gt", help="expand ground truth into adjacent axial slices")
    p.add_argument("--mask", required=True)
    p.add_argument("--volume", required=True)
    p.add_argument("--lo", type=float, default=95.0)
    p.add_argument("--hi", type=float, default=450.0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_expand_gt)

    p = sub.add_parser("dice", help="Dice coefficient of two masks")
    p.add_argument("mask_a")
    p.add_argument("mask_b")
    p.set_defaults(func=_cmd_dice)

    p = sub.add_parser("phantom", help="head-like synthetic background volume")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--dims", nargs=3, type=int, required=True)
    p.add_argument("--spacing", nargs=3, type=float, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_phantom)

    return parser


def run_cli(argv) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 0 for --help, nonzero for usage errors
        return 0 if exc.code in (0, None) else 1
    try:
        return args.func(args) or 0
    except (VasculsynthError, OSError, ValueError, KeyError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main():
    sys.exit(run_cli(sys.argv[1:]))


if __name__ == "__main__":
    main()
