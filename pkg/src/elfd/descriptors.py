"""LFD and Enhanced LFD label images, regional histograms and feature assembly.

``lmd``/``lpd`` give 8-bit codes from the 8-neighborhood of each pixel on a
single frequency plane.  ``elmd``/``elpd`` give 12-bit codes: bits 0-3
compare against the 4-neighborhood on the correlated plane, bits 4-11
against the 8-neighborhood on the principal plane.  Magnitude variants use
``>=`` on |F|, phase variants test quadrant equality.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations
from typing import Sequence

import numpy as np

from .stft import StftPlanes, compute_planes

__all__ = [
    "KINDS",
    "EIGHT_RING",
    "FOUR_CROSS",
    "FREQUENCY_PAIRS",
    "LAYOUT_VERSION",
    "FeatureLayout",
    "FeatureVector",
    "bin_count",
    "targets",
    "encode_bits",
    "magnitude_bit",
    "phase_bit",
    "label_image",
    "label_images",
    "regional_histograms",
    "region_bounds",
    "raw_histograms",
    "assemble_feature",
    "extract_feature",
]

KINDS = ("lmd", "lpd", "elmd", "elpd")

# (row, col) offsets; clockwise from top-left
EIGHT_RING = ((-1, -1), (-1, 0), (-1, 1), (0, 1), (1, 1), (1, 0), (1, -1), (0, -1))
# up, right, down, left
FOUR_CROSS = ((-1, 0), (0, 1), (1, 0), (0, -1))

# ordered (principal, correlated) frequency indices, 0-based
FREQUENCY_PAIRS = tuple(permutations(range(4), 2))

GRID = 4
LAYOUT_VERSION = "elfd-layout-1"


def _check_kind(kind: str) -> None:
    if kind not in KINDS:
        raise ValueError(f"unknown descriptor kind {kind!r}; expected one of {KINDS}")


def is_enhanced(kind: str) -> bool:
    _check_kind(kind)
    return kind.startswith("e")


def bin_count(kind: str) -> int:
    return 4096 if is_enhanced(kind) else 256


def targets(kind: str) -> tuple:
    """Plane indices (lmd/lpd) or frequency pairs (elmd/elpd) in layout order."""
    return FREQUENCY_PAIRS if is_enhanced(kind) else (0, 1, 2, 3)


def encode_bits(bits: Sequence[int]) -> int:
    """Integer whose bit w-1 is ``bits[w-1]``."""
    value = 0
    for w, b in enumerate(bits):
        if b not in (0, 1):
            raise ValueError(f"bit {w} is {b!r}, expected 0 or 1")
        value |= int(b) << w
    return value


def magnitude_bit(m_k, m_m):
    """1 where the center magnitude is >= the neighbor magnitude."""
    return (np.asarray(m_k) >= np.asarray(m_m)).astype(np.uint16)


def phase_bit(q_k, q_m):
    """1 where center and neighbor phases share a quadrant."""
    return (np.asarray(q_k) == np.asarray(q_m)).astype(np.uint16)


def _neighbor_bits(values: np.ndarray, offsets, compare) -> list[np.ndarray]:
    H, W = values.shape
    padded = np.pad(values, 1, mode="edge")
    return [compare(values, padded[1 + dr:1 + dr + H, 1 + dc:1 + dc + W]) for dr, dc in offsets]


def label_image(planes: StftPlanes, kind: str, target) -> np.ndarray:
    """Per-pixel codes for one plane index (lmd/lpd) or one (principal, correlated) pair."""
    _check_kind(kind)
    if kind in ("lmd", "elmd"):
        values, compare = planes.magnitude(), magnitude_bit
    else:
        values, compare = planes.quadrant(), phase_bit
    if is_enhanced(kind):
        principal, correlated = target
        if principal == correlated:
            raise ValueError("principal and correlated planes must differ")
        bits = _neighbor_bits(values[correlated], FOUR_CROSS, compare)
        bits += _neighbor_bits(values[principal], EIGHT_RING, compare)
    else:
        bits = _neighbor_bits(values[int(target)], EIGHT_RING, compare)
    labels = np.zeros(planes.shape, dtype=np.uint16)
    for w, b in enumerate(bits):
        labels |= b << w
    return labels


def label_images(planes: StftPlanes, kind: str) -> list[np.ndarray]:
    return [label_image(planes, kind, t) for t in targets(kind)]


def region_bounds(height: int, width: int, grid: int = GRID):
    """Row and column edges of the ``grid`` x ``grid`` partition; the last region absorbs the remainder."""
    if height < grid or width < grid:
        raise ValueError(f"image {height}x{width} smaller than the {grid}x{grid} region grid")
    rh, cw = height // grid, width // grid
    rows = [i * rh for i in range(grid)] + [height]
    cols = [j * cw for j in range(grid)] + [width]
    return rows, cols


def regional_histograms(labels: np.ndarray, bins: int) -> np.ndarray:
    """Label counts per region, shape (16, bins), regions in row-major order."""
    labels = np.asarray(labels)
    if labels.size and (labels.min() < 0 or labels.max() >= bins):
        raise AssertionError(f"label outside [0, {bins})")
    rows, cols = region_bounds(*labels.shape)
    out = np.empty((GRID * GRID, bins), dtype=np.int64)
    for i in range(GRID):
        for j in range(GRID):
            block = labels[rows[i]:rows[i + 1], cols[j]:cols[j + 1]]
            out[i * GRID + j] = np.bincount(block.ravel(), minlength=bins)
    return out


def raw_histograms(image, scale: int, kind: str, planes: StftPlanes | None = None) -> np.ndarray:
    """Regional histograms for every plane/pair, shape (n_targets, 16, bins)."""
    if planes is None:
        planes = compute_planes(image, scale)
    bins = bin_count(kind)
    return np.stack([regional_histograms(lab, bins) for lab in label_images(planes, kind)])


@dataclass(frozen=True)
class FeatureLayout:
    kind: str
    scale: int
    valid_bins: int
    version: str = LAYOUT_VERSION

    @property
    def targets(self) -> tuple:
        return targets(self.kind)

    @property
    def dimension(self) -> int:
        return len(self.targets) * GRID * GRID * self.valid_bins

    def describe(self) -> str:
        order = "pair" if is_enhanced(self.kind) else "plane"
        return f"{order}-major,region-row-major,valid-bin"


@dataclass(frozen=True, eq=False)
class FeatureVector:
    values: np.ndarray
    layout: FeatureLayout

    def __len__(self):
        return len(self.values)


def assemble_feature(hist_sets, merge_maps, layout: FeatureLayout) -> FeatureVector:
    """Merge, L1-normalize each region, concatenate in layout order and L2-normalize.

    ``hist_sets[t]`` is the (16, B) regional histogram array for target t.
    """
    if len(hist_sets) != len(layout.targets) or len(merge_maps) != len(hist_sets):
        raise ValueError(
            f"{layout.kind} needs {len(layout.targets)} histogram sets and merge maps, "
            f"got {len(hist_sets)} and {len(merge_maps)}"
        )
    parts = []
    for hists, mmap in zip(hist_sets, merge_maps):
        hists = np.asarray(hists)
        if hists.shape[-1] != mmap.source_bins or mmap.valid_bins != layout.valid_bins:
            raise ValueError(
                f"merge map {mmap.source_bins}->{mmap.valid_bins} does not fit histograms of "
                f"{hists.shape[-1]} bins with {layout.valid_bins} valid bins"
            )
        merged = mmap.apply(hists).astype(np.float64)
        totals = merged.sum(axis=1, keepdims=True)
        parts.append(np.divide(merged, totals, out=np.zeros_like(merged), where=totals > 0))
    values = np.concatenate([p.ravel() for p in parts])
    norm = np.linalg.norm(values)
    if norm > 0:
        values = values / norm
    return FeatureVector(values, layout)


def extract_feature(image, scale: int, kind: str, merge_maps, planes: StftPlanes | None = None) -> FeatureVector:
    """Full pipeline for one image at one scale."""
    hists = raw_histograms(image, scale, kind, planes)
    layout = FeatureLayout(kind, scale, merge_maps[0].valid_bins)
    return assemble_feature(hists, merge_maps, layout)
