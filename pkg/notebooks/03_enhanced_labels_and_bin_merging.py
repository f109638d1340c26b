# %% [markdown]
# # Enhanced labels and bin merging
#
# An enhanced code combines four comparisons on a correlated plane with
# eight comparisons on a principal plane, giving 4096 possible labels per
# pixel.  Most labels are rare, so the histograms are compressed by greedily
# merging the least populated bins until 16 remain.

# %%
import numpy as np

from elfd.binmerge import apply_merge, learn_merge_map
from elfd.descriptors import FREQUENCY_PAIRS, extract_feature, label_image, raw_histograms
from elfd.harness.synthetic import make_texture_images
from elfd.stft import compute_planes

images = [img for cls in make_texture_images(n_classes=3, per_class=2, size=64, seed=1) for img in cls]
planes = [compute_planes(img, 11) for img in images]
labels = label_image(planes[0], "elmd", FREQUENCY_PAIRS[0])
print("distinct labels on one image:", len(np.unique(labels)), "of 4096")

# %% [markdown]
# One merge map is learned per frequency pair from counts pooled over every
# training image and region.

# %%
hists = np.stack([raw_histograms(None, 11, "elmd", p) for p in planes])  # images, pairs, regions, bins
maps = [learn_merge_map(hists[:, k].sum(axis=(0, 1)), 16) for k in range(len(FREQUENCY_PAIRS))]
sizes = sorted(len(g) for g in maps[0].groups())
print("group sizes for the first pair:", sizes)
merged = apply_merge(hists[0, 0], maps[0])
print("counts conserved:", merged.sum() == hists[0, 0].sum())

# %%
feature = extract_feature(images[0], 11, "elmd", maps, planes[0])
print(feature.layout.describe())
print("length", len(feature), "norm", round(float(np.linalg.norm(feature.values)), 12))
