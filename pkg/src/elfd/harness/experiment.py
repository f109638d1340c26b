"""Training of scale banks and the degradation-protocol evaluation.

Every accuracy in a results table is recomputed from the per-probe
prediction log, which is always written next to it.
"""

from __future__ import annotations

import csv
import io
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from ..imaging import degradation_label, degrade, parse_degradation
from ..recognition import ScaleBank, compete, recognize_single_scale, train_banks
from ..stft import compute_planes
from .archive import read_bank, read_manifest, write_bank
from .config import ExperimentConfig
from .dataset import SPLIT_RNG, load_image, scan_dataset, split

__all__ = [
    "PredictionRow",
    "ResultsTable",
    "LOG_FIELDS",
    "train",
    "evaluate",
    "recognize_probe",
    "table_from_log",
    "read_log",
    "variant_name",
]

log = logging.getLogger(__name__)

LOG_FIELDS = ("probe", "degradation", "kind", "mode", "predicted", "true", "winning_scale", "confidence")


def variant_name(kind: str, mode: str) -> str:
    return kind + ("s" if mode == "single" else "c")


@dataclass(frozen=True)
class PredictionRow:
    probe: str
    degradation: str
    kind: str
    mode: str
    predicted: str
    true: str
    winning_scale: int
    confidence: float

    def as_csv(self) -> list[str]:
        return [self.probe, self.degradation, self.kind, self.mode, self.predicted, self.true,
                str(self.winning_scale), f"{self.confidence:.17g}"]


@dataclass(frozen=True)
class ResultsTable:
    """Accuracy percentages; rows are degradations, columns are kind/mode variants."""

    rows: tuple
    columns: tuple
    cells: dict  # (row, column) -> percentage

    def average(self, column: str) -> float:
        return sum(self.cells[(r, column)] for r in self.rows) / len(self.rows)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["degradation", *self.columns])
        for r in self.rows:
            w.writerow([r, *(f"{self.cells[(r, c)]:.2f}" for c in self.columns)])
        w.writerow(["average", *(f"{self.average(c):.2f}" for c in self.columns)])
        return buf.getvalue()

    def to_text(self) -> str:
        body = [[r, *(f"{self.cells[(r, c)]:.2f}" for c in self.columns)] for r in self.rows]
        body.append(["average", *(f"{self.average(c):.2f}" for c in self.columns)])
        head = ["", *self.columns]
        widths = [max(len(row[i]) for row in [head, *body]) for i in range(len(head))]
        fmt = lambda row: "  ".join(v.ljust(widths[0]) if i == 0 else v.rjust(widths[i])
                                    for i, v in enumerate(row))
        return "\n".join(fmt(row) for row in [head, *body]) + "\n"


def table_from_log(rows) -> ResultsTable:
    """Accuracy per (degradation, variant), in first-seen order."""
    row_keys, col_keys, hits, totals = [], [], {}, {}
    for p in rows:
        col = variant_name(p.kind, p.mode)
        if p.degradation not in row_keys:
            row_keys.append(p.degradation)
        if col not in col_keys:
            col_keys.append(col)
        key = (p.degradation, col)
        totals[key] = totals.get(key, 0) + 1
        hits[key] = hits.get(key, 0) + (p.predicted == p.true)
    cells = {k: 100.0 * hits[k] / totals[k] for k in totals}
    return ResultsTable(tuple(row_keys), tuple(col_keys), cells)


def write_log(rows, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(LOG_FIELDS)
        for p in rows:
            w.writerow(p.as_csv())


def read_log(path) -> list[PredictionRow]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        return [
            PredictionRow(r["probe"], r["degradation"], r["kind"], r["mode"], r["predicted"], r["true"],
                          int(r["winning_scale"]), float(r["confidence"]))
            for r in reader
        ]


def _model_dir(output) -> Path:
    return Path(output) / "model"


def _write_split(path: Path, samples, root) -> None:
    path.write_text("".join(s.relative(root) + "\n" for s in samples))


def train(config: ExperimentConfig) -> Path:
    """Learn and write one scale bank per configured kind; returns the model directory."""
    manifest = scan_dataset(config.dataset, config.resize)
    train_set, test_set = split(manifest, config.seed, config.n_train)
    images = [load_image(s.path, config.resize) for s in train_set]
    log.info("training %s on %d images at scales %s", ",".join(config.kinds), len(images),
             config.train_scales)
    banks = train_banks(images, [s.class_id for s in train_set], config.kinds, config.train_scales,
                        manifest.class_names, config.valid_bins, config.lam)
    out = Path(config.output)
    out.mkdir(parents=True, exist_ok=True)
    _write_split(out / "split_train.txt", train_set, manifest.root)
    _write_split(out / "split_test.txt", test_set, manifest.root)
    extra = {
        "dataset": Path(config.dataset).name,
        "seed": str(config.seed),
        "n_train": str(config.n_train),
        "split_rng": SPLIT_RNG,
        "resize": "none" if config.resize is None else f"{config.resize[0]}x{config.resize[1]}",
        "image_shape": "x".join(map(str, images[0].shape)),
    }
    for kind, bank in banks.items():
        write_bank(bank, _model_dir(out) / kind, extra)
    return _model_dir(out)


def _load_banks(config: ExperimentConfig, archive) -> dict[str, ScaleBank]:
    archive = Path(archive)
    banks = {}
    for kind in config.kinds:
        m = read_manifest(archive / kind)
        for key, expect in (("seed", str(config.seed)), ("n_train", str(config.n_train)),
                            ("split_rng", SPLIT_RNG)):
            if m.get(key) != expect:
                raise ValueError(f"archive {archive / kind} has {key}={m.get(key)}, config expects {expect}")
        bank = read_bank(archive / kind)
        missing = set(config.train_scales) - set(bank.scales)
        if missing:
            raise ValueError(f"archive {archive / kind} lacks scales {sorted(missing)}")
        banks[kind] = bank
    return banks


def recognize_probe(banks: dict[str, ScaleBank], image, config: ExperimentConfig) -> dict:
    """Per kind, the (mode -> RecognitionResult) outcomes; STFT planes are shared across kinds."""
    planes = {s: compute_planes(image, s) for s in config.train_scales}
    out = {}
    for kind, bank in banks.items():
        per_scale = {s: recognize_single_scale(bank, s, image, planes[s]) for s in config.train_scales}
        modes = {}
        if "single" in config.modes:
            modes["single"] = compete([per_scale[config.single_scale]])
        if "competition" in config.modes:
            modes["competition"] = compete([per_scale[s] for s in config.scales])
        out[kind] = modes
    return out


_WORKER = {}


def _init_worker(config, archive):
    _WORKER["config"] = config
    _WORKER["banks"] = _load_banks(config, archive)


def _probe_rows(task) -> list[PredictionRow]:
    config, banks = _WORKER["config"], _WORKER["banks"]
    path, rel, true_name, deg_text = task
    spec = parse_degradation(deg_text)
    image = load_image(path, config.resize)
    if spec is not None:
        image = degrade(image, spec)
    rows = []
    for kind, modes in recognize_probe(banks, image, config).items():
        names = banks[kind].class_names
        for mode, res in modes.items():
            rows.append(PredictionRow(rel, degradation_label(spec), kind, mode, names[res.identity],
                                      true_name, res.winning_scale, res.confidence))
    return rows


def evaluate(config: ExperimentConfig, archive=None) -> ResultsTable:
    """Degrade every probe, recognize it with each kind and mode, and write log and tables."""
    archive = Path(archive) if archive is not None else _model_dir(config.output)
    manifest = scan_dataset(config.dataset, config.resize)
    train_set, test_set = split(manifest, config.seed, config.n_train)
    probes = test_set if config.probes == "test" else train_set
    names = manifest.class_names
    tasks = [(str(s.path), s.relative(manifest.root), names[s.class_id], d)
             for d in config.degradations for s in probes]
    if config.workers > 1:
        with ProcessPoolExecutor(config.workers, initializer=_init_worker,
                                 initargs=(config, archive)) as pool:
            chunks = list(pool.map(_probe_rows, tasks, chunksize=4))
    else:
        _init_worker(config, archive)
        chunks = [_probe_rows(t) for t in tasks]
    rows = [r for chunk in chunks for r in chunk]
    table = table_from_log(rows)
    out = Path(config.output)
    out.mkdir(parents=True, exist_ok=True)
    write_log(rows, out / "predictions.csv")
    (out / "results.csv").write_text(table.to_csv())
    (out / "results.txt").write_text(table.to_text())
    return table
