# %% [markdown]
# # Degradations
#
# The harness simulates low resolution and blur on clean images.  This
# script builds one synthetic texture, applies every parametric degradation
# used in the experiments and reports how far each result drifts from the
# original.

# %%
import numpy as np

from elfd.harness.synthetic import make_texture_images
from elfd.imaging import degrade, degradation_label, gaussian_kernel, motion_kernel, parse_degradation

image = make_texture_images(n_classes=1, per_class=1, size=64, seed=0)[0][0]
print(image.shape, float(image.pixels.min()), float(image.pixels.max()))

# %% [markdown]
# Specs are written as short strings, the same form the config file and the
# `degrade` subcommand accept.

# %%
for text in ("lowres:2", "lowres:4", "gaussian:3:7", "motion:7:45"):
    spec = parse_degradation(text)
    out = degrade(image, spec)
    rms = np.sqrt(np.mean((out.pixels - image.pixels) ** 2))
    print(f"{degradation_label(spec):>9}  shape={out.shape}  rms change={rms:.4f}")

# %% [markdown]
# Motion kernels step along the major axis, so a 45 degree kernel of length 7
# has seven equal taps on the anti-diagonal (rows point down).

# %%
print(np.round(motion_kernel(7, 45).weights * 7, 3))
print("gaussian mass:", gaussian_kernel(3, 7).weights.sum())
