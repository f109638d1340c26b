# %% [markdown]
# # Multi-scale competition
#
# A probe is coded against a dictionary of training features at each of
# eleven window sizes.  Each scale proposes the class with the smallest
# reconstruction residual together with a confidence, and the most confident
# scale wins.  Blur favours larger windows, which is why competition helps.

# %%
from elfd.harness.synthetic import make_texture_images
from elfd.imaging import GaussianBlur, degrade
from elfd.recognition import DEFAULT_SCALES, multiscale_recognize, recognize_single_scale, train_banks

data = make_texture_images(n_classes=10, per_class=10, size=64, seed=0)
train_images = [img for cls in data for img in cls[:5]]
train_ids = [k for k in range(10) for _ in range(5)]
bank = train_banks(train_images, train_ids, ["elmd"], DEFAULT_SCALES,
                   class_names=[f"class_{k:02d}" for k in range(10)])["elmd"]

# %%
probe = degrade(data[3][7], GaussianBlur(3, 7))
result = multiscale_recognize(bank, probe)
for r in result.per_scale:
    print(f"scale {r.scale:2d}  top={r.class_id}  confidence={r.confidence:+.3f}")
print("winner:", bank.class_names[result.identity], "at scale", result.winning_scale)

# %% [markdown]
# Accuracy over all blurred test probes, single scale 11 against
# competition.

# %%
single = competition = 0
for k, cls in enumerate(data):
    for img in cls[5:]:
        blurred = degrade(img, GaussianBlur(3, 7))
        single += recognize_single_scale(bank, 11, blurred).class_id == k
        competition += multiscale_recognize(bank, blurred).identity == k
print(f"single-scale 11: {single}/50   competition: {competition}/50")
