"""Dataset discovery, optional resizing and seeded train/test splits."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..imaging import GrayImage, load_pgm, resize_bicubic

__all__ = ["DatasetManifest", "Sample", "SPLIT_RNG", "scan_dataset", "split", "load_image", "center_crop_resize"]

# recorded in model manifests; bump if the split procedure changes
SPLIT_RNG = "numpy-PCG64-permutation-v1"


@dataclass(frozen=True)
class Sample:
    path: Path
    class_id: int

    def relative(self, root) -> str:
        return self.path.relative_to(root).as_posix()


@dataclass(frozen=True)
class DatasetManifest:
    root: Path
    classes: tuple  # ((name, (path, ...)), ...)

    @property
    def class_names(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.classes)


def _pgm_shape(path: Path) -> tuple[int, int]:
    return load_pgm(path).shape


def scan_dataset(path, resize=None) -> DatasetManifest:
    """One subdirectory per class holding ``*.pgm`` files; classes and files sorted by name.

    Without ``resize`` every image must have the same dimensions.
    """
    root = Path(path)
    if not root.is_dir():
        raise FileNotFoundError(f"dataset directory {root} does not exist")
    classes = []
    for d in sorted(p for p in root.iterdir() if p.is_dir()):
        files = tuple(sorted(f for f in d.iterdir() if f.suffix.lower() == ".pgm" and f.is_file()))
        if not files:
            raise ValueError(f"class directory {d} contains no PGM files")
        classes.append((d.name, files))
    if not classes:
        raise ValueError(f"dataset {root} has no class directories")
    if resize is None:
        shapes = {}
        for _, files in classes:
            for f in files:
                shapes.setdefault(_pgm_shape(f), f)
        if len(shapes) > 1:
            listing = ", ".join(f"{h}x{w} ({f.name})" for (h, w), f in shapes.items())
            raise ValueError(f"mixed image dimensions without resize: {listing}")
    return DatasetManifest(root, tuple(classes))


def split(manifest: DatasetManifest, seed: int, n_train: int) -> tuple[list[Sample], list[Sample]]:
    """Per class, a seeded permutation picks ``n_train`` training images; the rest are test probes."""
    rng = np.random.Generator(np.random.PCG64(seed))
    train, test = [], []
    for cid, (name, files) in enumerate(manifest.classes):
        if n_train >= len(files):
            raise ValueError(f"class {name} has no test samples ({len(files)} images, n_train={n_train})")
        perm = rng.permutation(len(files))
        chosen = set(perm[:n_train].tolist())
        for i, f in enumerate(files):
            (train if i in chosen else test).append(Sample(f, cid))
    return train, test


def center_crop_resize(pixels: np.ndarray, height: int, width: int) -> np.ndarray:
    """Crop the largest centered window with the target aspect ratio, then resample bicubically."""
    h, w = pixels.shape
    if h * width > w * height:
        ch, cw = max(1, round(w * height / width)), w
    else:
        ch, cw = h, max(1, round(h * width / height))
    r0, c0 = (h - ch) // 2, (w - cw) // 2
    crop = pixels[r0:r0 + ch, c0:c0 + cw]
    if crop.shape == (height, width):
        return crop
    return np.clip(resize_bicubic(crop, height, width), 0.0, 1.0)


def load_image(path, resize=None) -> GrayImage:
    img = load_pgm(path)
    if resize is None:
        return img
    return GrayImage(center_crop_resize(img.pixels, *resize))
