"""Procedural texture classes for desk-scale experiments.

Each class owns a large canvas of oriented gratings and band-pass noise
with its own frequencies and orientations; samples are random crops of
the canvas plus a little pixel noise.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from ..imaging import GrayImage, save_pgm

__all__ = ["class_canvas", "make_texture_images", "write_texture_dataset"]


def _bandpass_noise(rng: np.random.Generator, n: int, freq: float, theta: float, width: float) -> np.ndarray:
    fy = np.fft.fftfreq(n)[:, None]
    fx = np.fft.fftfreq(n)[None, :]
    cx, cy = freq * np.cos(theta), freq * np.sin(theta)
    bump = np.exp(-((fx - cx) ** 2 + (fy - cy) ** 2) / (2 * width**2))
    bump += np.exp(-((fx + cx) ** 2 + (fy + cy) ** 2) / (2 * width**2))
    noise = rng.standard_normal((n, n))
    out = np.real(np.fft.ifft2(np.fft.fft2(noise) * bump))
    return out / out.std()


def class_canvas(rng: np.random.Generator, n: int, index: int, n_classes: int) -> np.ndarray:
    """Zero-mean, unit-variance texture of size ``n`` x ``n`` for class ``index``.

    Two oriented components (a grating plus narrow-band noise around the
    same frequency); orientations are spread evenly over the classes so
    that no two classes share a dominant direction.
    """
    yy, xx = np.mgrid[0:n, 0:n]
    theta = index * np.pi / n_classes + rng.uniform(-0.05, 0.05)
    components = [
        ((0.07, 0.11, 0.15)[index % 3], theta),
        ((0.13, 0.2)[index % 2], theta + np.pi / 2 * (1 + (index % 3) / 3)),
    ]
    tex = np.zeros((n, n))
    for freq, angle in components:
        phase = rng.uniform(0, 2 * np.pi)
        tex += np.cos(2 * np.pi * freq * (np.cos(angle) * xx + np.sin(angle) * yy) + phase)
        tex += 0.7 * _bandpass_noise(rng, n, freq, angle, 0.02)
    return tex / tex.std()


def make_texture_images(n_classes: int = 10, per_class: int = 10, size: int = 64,
                        seed: int = 0, noise: float = 0.02) -> list[list[GrayImage]]:
    """``per_class`` crops for each of ``n_classes`` texture classes."""
    rng = np.random.default_rng(seed)
    out = []
    for k in range(n_classes):
        canvas = class_canvas(rng, 4 * size, k, n_classes)
        crops = []
        for _ in range(per_class):
            r, c = rng.integers(0, canvas.shape[0] - size, size=2)
            patch = canvas[r:r + size, c:c + size]
            patch = 0.5 + 0.15 * patch + noise * rng.standard_normal((size, size))
            crops.append(GrayImage(np.clip(patch, 0.0, 1.0)))
        out.append(crops)
    return out


def write_texture_dataset(root, n_classes: int = 10, per_class: int = 10, size: int = 64,
                          seed: int = 0) -> Path:
    """Write the texture classes as ``root/class_XX/img_YY.pgm``."""
    root = Path(root)
    for k, crops in enumerate(make_texture_images(n_classes, per_class, size, seed)):
        d = root / f"class_{k:02d}"
        d.mkdir(parents=True, exist_ok=True)
        for j, img in enumerate(crops):
            save_pgm(img, d / f"img_{j:02d}.pgm")
    return root
