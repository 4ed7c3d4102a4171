"""vasculsynth: deterministic synthetic cerebrovascular volumes.

Grows arterial trees with Murray's-law bifurcations under density-atlas
guidance, rasterizes them into voxel masks, blends them into CT-like
backgrounds with multi-octave gradient noise, and assembles labeled
volume/mask training pairs.
"""

from . import errors
from .atlas import (
    Atlas,
    binarize,
    build_atlas,
    decrement_neighborhood,
    ellipsoid_atlas,
    sample_target,
    split_hemispheres,
)
from .augment import AugmentParams, RigidSample, apply_rigid, random_rigid, sample_rigid
from .dataset import (
    ExampleSpec,
    RootSpec,
    dice,
    example_spec_from_config,
    expand_ground_truth,
    generate_dataset,
    grow_hemisphere_trees,
    make_training_example,
    phantom_background,
)
from .denoise import DenoiseParams, temporal_nlm
from .grids import Mask, Volume
from .io import read_volume, write_volume
from .noise import NoiseParams, add_noise, fbm, noise_volume, perlin3
from .raster import blend_vessels, connected_components, mask_union, rasterize_tree
from .tree import (
    GrowthParams,
    Node,
    Tree,
    apply_target_pull,
    audit_tree,
    bifurcation_angle,
    grow_tree,
    murray_existing_radius,
    murray_expected_radius,
    murray_residuals,
    perturb_direction,
    rotate_about_axis,
    spawn_bifurcation,
    tree_from_text,
    tree_to_text,
)

__version__ = "0.1.0"

__all__ = [
    "Atlas", "AugmentParams", "DenoiseParams", "ExampleSpec", "GrowthParams",
    "Mask", "NoiseParams", "Node", "RigidSample", "RootSpec", "Tree", "Volume",
    "add_noise", "apply_rigid", "apply_target_pull", "audit_tree",
    "bifurcation_angle", "binarize", "blend_vessels", "build_atlas",
    "connected_components", "decrement_neighborhood", "dice", "ellipsoid_atlas",
    "errors", "example_spec_from_config", "expand_ground_truth", "fbm",
    "generate_dataset", "grow_hemisphere_trees", "grow_tree",
    "make_training_example", "mask_union", "murray_existing_radius",
    "murray_expected_radius", "murray_residuals", "noise_volume", "perlin3",
    "perturb_direction", "phantom_background", "random_rigid", "rasterize_tree",
    "read_volume", "rotate_about_axis", "sample_rigid", "sample_target",
    "spawn_bifurcation", "split_hemispheres", "temporal_nlm", "tree_from_text",
    "tree_to_text", "write_volume",
]
