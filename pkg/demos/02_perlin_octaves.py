"""Gradient-noise volumes at one, two, and three octaves.

A single octave looks geometric; stacking octaves (each at double frequency
and half amplitude) produces the fractal texture that resembles CT noise.
The same slice through the 3D field is shown for each octave count.
"""

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

import vasculsynth as vs

fig, axes = plt.subplots(1, 3, figsize=(12, 4))
for ax, octaves in zip(axes, (1, 2, 3)):
    params = vs.NoiseParams(octaves=octaves, base_frequency=0.08,
                            amplitude_hu=1.0, seed=7)
    vol = vs.noise_volume((128, 128, 32), (1.0, 1.0, 1.0), params)
    ax.imshow(vol.values[:, :, 16].T, origin="lower", cmap="gray",
              vmin=-1, vmax=1)
    ax.set_title(f"{octaves} octave{'s' if octaves > 1 else ''}")
    ax.axis("off")
    print(f"octaves={octaves}: slice min {vol.values[:, :, 16].min():+.3f}, "
          f"max {vol.values[:, :, 16].max():+.3f}")

fig.tight_layout()
fig.savefig("demos/output/02_perlin_octaves.png", dpi=120)
print("wrote demos/output/02_perlin_octaves.png")
