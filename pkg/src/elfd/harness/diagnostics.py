"""Diagnostic dumps: label images, STFT planes, regional histograms, per-scale confidences."""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from ..descriptors import bin_count, label_image, regional_histograms, targets
from ..imaging import save_pgm
from ..recognition import ScaleBank, multiscale_recognize
from ..stft import compute_planes

__all__ = ["scaled_to_unit", "target_name", "inspect_image", "write_confidences"]


def scaled_to_unit(values: np.ndarray) -> np.ndarray:
    """Min-max scale to [0, 1]; a constant array maps to zeros."""
    values = np.asarray(values, dtype=np.float64)
    lo, hi = values.min(), values.max()
    if hi == lo:
        return np.zeros_like(values)
    return (values - lo) / (hi - lo)


def target_name(kind: str, target) -> str:
    """1-based frequency naming, e.g. ``u1`` or ``u1u2``."""
    if isinstance(target, tuple):
        return f"u{target[0] + 1}u{target[1] + 1}"
    return f"u{target + 1}"


def write_histograms(hists: np.ndarray, prefix: Path) -> list[Path]:
    paths = []
    for r, h in enumerate(hists):
        p = prefix.parent / f"{prefix.name}_region{r:02d}.csv"
        with open(p, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["bin", "count"])
            w.writerows((b, int(c)) for b, c in enumerate(h))
        paths.append(p)
    return paths


def write_confidences(bank: ScaleBank, image, path) -> list[tuple]:
    """One row per scale: (scale, top class name, confidence)."""
    result = multiscale_recognize(bank, image)
    rows = [(r.scale, bank.class_names[r.class_id], r.confidence) for r in result.per_scale]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["scale", "top_class", "confidence"])
        w.writerows((s, c, f"{v:.17g}") for s, c, v in rows)
    return rows


def inspect_image(image, scale: int, kind: str, out_dir, target=None, planes_too: bool = False,
                  bank: ScaleBank | None = None) -> list[Path]:
    """Write label PGM(s) and 16 histogram CSVs per label image.

    ``target`` restricts output to one plane index or (principal,
    correlated) pair.  ``planes_too`` adds min-max scaled magnitude and
    phase PGMs; ``bank`` adds a per-scale confidence CSV.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    planes = compute_planes(image, scale)
    chosen = targets(kind) if target is None else (target,)
    bins = bin_count(kind)
    written = []
    for t in chosen:
        labels = label_image(planes, kind, t)
        stem = out / f"{kind}_s{scale}_{target_name(kind, t)}"
        p = stem.with_suffix(".pgm")
        save_pgm(labels / (bins - 1), p)
        written.append(p)
        written += write_histograms(regional_histograms(labels, bins), stem)
    if planes_too:
        for k in range(len(planes.frequencies)):
            for name, values in (("magnitude", planes.magnitude(k)), ("phase", planes.phase(k))):
                p = out / f"{name}_s{scale}_u{k + 1}.pgm"
                save_pgm(scaled_to_unit(values), p)
                written.append(p)
    if bank is not None:
        p = out / f"confidence_{bank.kind}.csv"
        write_confidences(bank, image, p)
        written.append(p)
    return written
