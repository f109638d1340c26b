"""Model archive: one directory per descriptor kind.

Layout::

    <kind>/manifest.txt
    <kind>/scale_011/map_00.txt ...      merge maps, layout order
    <kind>/scale_011/dictionary.bin

``dictionary.bin``: 8-byte magic, little-endian uint32 d and N, d*N
float64 values column-major, then N int32 class ids.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from ..binmerge import load_merge_map, save_merge_map
from ..descriptors import FeatureLayout, targets
from ..imaging import ParseError
from ..recognition import Dictionary, ScaleBank, ScaleModel

__all__ = ["ARCHIVE_VERSION", "DICT_MAGIC", "write_dictionary", "read_dictionary",
           "write_bank", "read_bank", "read_manifest"]

ARCHIVE_VERSION = "1"
DICT_MAGIC = b"ELFDDIC1"


def write_dictionary(dictionary: Dictionary, path) -> None:
    D = dictionary.columns
    d, n = D.shape
    with open(path, "wb") as fh:
        fh.write(DICT_MAGIC)
        fh.write(struct.pack("<II", d, n))
        fh.write(np.asarray(D, dtype="<f8").tobytes(order="F"))
        fh.write(np.asarray(dictionary.class_ids, dtype="<i4").tobytes())


def read_dictionary(path, class_count: int | None = None) -> Dictionary:
    data = Path(path).read_bytes()
    if data[:8] != DICT_MAGIC:
        raise ParseError(f"{path}: bad dictionary magic {data[:8]!r}")
    if len(data) < 16:
        raise ParseError(f"{path}: truncated dictionary header")
    d, n = struct.unpack("<II", data[8:16])
    need = 16 + 8 * d * n + 4 * n
    if len(data) != need:
        raise ParseError(f"{path}: expected {need} bytes for a {d}x{n} dictionary, got {len(data)}")
    D = np.frombuffer(data, dtype="<f8", count=d * n, offset=16).reshape((d, n), order="F")
    ids = np.frombuffer(data, dtype="<i4", count=n, offset=16 + 8 * d * n)
    return Dictionary(D.astype(np.float64), ids.astype(np.int64), -1 if class_count is None else class_count)


def _scale_dir(root: Path, scale: int) -> Path:
    return root / f"scale_{scale:03d}"


def write_bank(bank: ScaleBank, root, extra: dict[str, str] | None = None) -> Path:
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    layout = FeatureLayout(bank.kind, bank.scales[0], bank.valid_bins, bank.layout_version)
    entries = {
        "version": ARCHIVE_VERSION,
        "kind": bank.kind,
        "layout": bank.layout_version,
        "layout_order": layout.describe(),
        "scales": ",".join(map(str, bank.scales)),
        "lambda": repr(bank.lam),
        "valid_bins": str(bank.valid_bins),
        "dimension": str(layout.dimension),
        "classes": str(len(bank.class_names)),
    }
    entries.update(extra or {})
    lines = [f"{k}={v}" for k, v in entries.items()]
    lines += [f"class.{i}={name}" for i, name in enumerate(bank.class_names)]
    (root / "manifest.txt").write_text("\n".join(lines) + "\n")
    for scale, model in bank.models.items():
        sd = _scale_dir(root, scale)
        sd.mkdir(exist_ok=True)
        for t, mmap in enumerate(model.merge_maps):
            save_merge_map(mmap, sd / f"map_{t:02d}.txt")
        write_dictionary(model.dictionary, sd / "dictionary.bin")
    return root


def read_manifest(root) -> dict[str, str]:
    path = Path(root) / "manifest.txt"
    if not path.exists():
        raise FileNotFoundError(f"no model manifest at {path}")
    out = {}
    for line in path.read_text().splitlines():
        if line.strip():
            key, sep, value = line.partition("=")
            if not sep:
                raise ParseError(f"{path}: malformed line {line!r}")
            out[key] = value
    return out


def read_bank(root) -> ScaleBank:
    root = Path(root)
    m = read_manifest(root)
    if m.get("version") != ARCHIVE_VERSION:
        raise ParseError(f"{root}: unsupported archive version {m.get('version')!r}")
    kind = m["kind"]
    n_classes = int(m["classes"])
    names = [m[f"class.{i}"] for i in range(n_classes)]
    lam = float(m["lambda"])
    models = {}
    for scale in (int(s) for s in m["scales"].split(",")):
        sd = _scale_dir(root, scale)
        maps = [load_merge_map(sd / f"map_{t:02d}.txt") for t in range(len(targets(kind)))]
        dictionary = read_dictionary(sd / "dictionary.bin", n_classes)
        models[scale] = ScaleModel(scale, maps, dictionary, lam)
    return ScaleBank(kind, models, tuple(names), lam, m["layout"])
