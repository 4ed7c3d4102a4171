"""Temporal denoising of a synthetic 4D sequence, then rigid augmentation.

A noisy 16-frame sequence around a fixed anatomy is collapsed into one clean
background via temporal non-local means (noise is independent across frames,
anatomy is not). The clean volume and a vessel mask then go through one
random rigid transform: rotations in the three anatomical planes, sub-grid
translations, and a sagittal mirror coin.
"""

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

import vasculsynth as vs

DIMS = (96, 96, 48)
rng = np.random.default_rng(31)

anatomy = vs.phantom_background(DIMS, (1.0, 1.0, 1.0), np.random.default_rng(5))
sigma = 25.0
frames = [
    vs.Volume(anatomy.values + rng.normal(0, sigma, DIMS).astype(np.float32),
              (1.0, 1.0, 1.0))
    for _ in range(16)
]

clean = vs.temporal_nlm(frames, vs.DenoiseParams(h=60.0, patch_radius=1))
res_before = float((frames[0].values - anatomy.values).std())
res_after = float((clean.values - anatomy.values).std())
print(f"residual noise: {res_before:.1f} HU -> {res_after:.1f} HU "
      f"({16**0.5:.1f}x reduction expected at best)")

mask_vals = np.zeros(DIMS, dtype=np.uint8)
mask_vals[40:56, 40:56, 16:32] = 1
mask = vs.Mask(mask_vals, (1.0, 1.0, 1.0))

aug = vs.AugmentParams(seed=0)
aug_vol, aug_mask = vs.random_rigid(clean, mask, aug, np.random.default_rng(8))
print(f"mask voxels before/after: {mask.count()} / {aug_mask.count()} "
      f"(nearest-neighbor keeps labels binary)")

z = 24
fig, axes = plt.subplots(1, 4, figsize=(14, 4))
axes[0].imshow(frames[0].values[:, :, z].T, origin="lower", cmap="gray",
               vmin=-150, vmax=250)
axes[0].set_title("one noisy frame")
axes[1].imshow(clean.values[:, :, z].T, origin="lower", cmap="gray",
               vmin=-150, vmax=250)
axes[1].set_title("temporal NLM output")
axes[2].imshow(clean.values[:, :, z].T, origin="lower", cmap="gray",
               vmin=-150, vmax=250)
axes[2].contour(mask.values[:, :, z].T, levels=[0.5], colors="red", linewidths=0.8)
axes[2].set_title("volume + mask")
axes[3].imshow(aug_vol.values[:, :, z].T, origin="lower", cmap="gray",
               vmin=-150, vmax=250)
axes[3].contour(aug_mask.values[:, :, z].T, levels=[0.5], colors="red", linewidths=0.8)
axes[3].set_title("after rigid augmentation")
for ax in axes:
    ax.axis("off")
fig.tight_layout()
fig.savefig("demos/output/04_denoise_and_augment.png", dpi=120)
print("wrote demos/output/04_denoise_and_augment.png")
