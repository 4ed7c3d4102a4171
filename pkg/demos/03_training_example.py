"""Assemble one complete training example on the head phantom.

Pipeline: grow one tree per hemisphere on disjoint half-atlases, rasterize
both into a single mask, blend the mask into the phantom background at
contrast intensity, then add two octaves of gradient noise. The whole example
is a pure function of the seed.
"""

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

import vasculsynth as vs

DIMS = (128, 128, 128)
SPACING = (1.0, 1.0, 1.0)

background = vs.phantom_background(DIMS, SPACING, np.random.default_rng(99))
spec = vs.ExampleSpec(
    background=background,
    # keep the atlas inside the phantom's parenchyma (skull shell starts
    # at 0.9 * 0.42 of the extent) so vessels never grow into bone or air
    atlas=vs.ellipsoid_atlas(DIMS, SPACING, semiaxes_frac=0.36),
    left_root=vs.RootSpec((44, 64, 28), (0, 0, 1)),
    right_root=vs.RootSpec((84, 64, 28), (0, 0, 1)),
    growth_left=vs.GrowthParams(max_nodes=2000, bifurcation_prob=0.2, r_min=0.5),
    growth_right=vs.GrowthParams(max_nodes=2000, bifurcation_prob=0.2, r_min=0.5),
    noise=vs.NoiseParams(octaves=2, base_frequency=0.25, amplitude_hu=15.0),
    contrast_hu=300.0,
    edge_sigma=0.5,
    seed=7,
)

volume, mask = vs.make_training_example(spec)
print(f"volume range: {volume.values.min():.0f} .. {volume.values.max():.0f} HU")
print(f"mask voxels:  {mask.count()}")

# vessels live in the contrast band used for ground-truth enhancement
inside = volume.values[mask.values == 1]
print(f"mask-voxel intensities: {inside.min():.0f} .. {inside.max():.0f} HU")

z = int(np.argmax(mask.values.sum(axis=(0, 1))))  # busiest axial slice
fig, axes = plt.subplots(1, 3, figsize=(12, 4))
axes[0].imshow(background.values[:, :, z].T, origin="lower", cmap="gray",
               vmin=-100, vmax=400)
axes[0].set_title("phantom background")
axes[1].imshow(volume.values[:, :, z].T, origin="lower", cmap="gray",
               vmin=-100, vmax=400)
axes[1].set_title("blended + noised volume")
axes[2].imshow(volume.values[:, :, z].T, origin="lower", cmap="gray",
               vmin=-100, vmax=400)
axes[2].contour(mask.values[:, :, z].T, levels=[0.5], colors="red", linewidths=0.8)
axes[2].set_title("ground-truth overlay")
for ax in axes:
    ax.axis("off")
fig.suptitle(f"axial slice z={z}")
fig.tight_layout()
fig.savefig("demos/output/03_training_example.png", dpi=120)
print("wrote demos/output/03_training_example.png")
