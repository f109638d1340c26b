"""Ridge-coding classifier, generalized confidence and multi-scale competition.

A probe feature y is coded over the dictionary of training features D,

    alpha = argmin ||y - D alpha||^2 + lam ||alpha||^2,

and scored per class by the reconstruction residual ||y - D_i alpha_i||.
Each scale gives a first candidate and its confidence
1 - d_best / d_runner_up; the scale with the highest confidence decides.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, NamedTuple, Sequence

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .binmerge import learn_merge_map
from .descriptors import (
    LAYOUT_VERSION,
    FeatureLayout,
    assemble_feature,
    raw_histograms,
)
from .stft import StftPlanes, compute_planes

__all__ = [
    "DEFAULT_LAMBDA",
    "DEFAULT_SCALES",
    "SINGLE_SCALE",
    "DEFAULT_VALID_BINS",
    "DEGENERATE_CONFIDENCE",
    "Dictionary",
    "CodingSolution",
    "RidgeCoder",
    "ScaleModel",
    "ScaleBank",
    "ScaleResult",
    "RecognitionResult",
    "solve_coding",
    "class_distances",
    "generalized_confidence",
    "first_candidate_confidence",
    "train_banks",
    "recognize_single_scale",
    "compete",
    "multiscale_recognize",
]

DEFAULT_LAMBDA = 0.01
SINGLE_SCALE = 11
DEFAULT_SCALES = tuple(range(11, 32, 2))
DEFAULT_VALID_BINS = {"lmd": 48, "lpd": 48, "elmd": 16, "elpd": 16}
# confidence for a non-best class whose runner-up distance is zero
DEGENERATE_CONFIDENCE = -1e9
_TINY = 1e-12


@dataclass(frozen=True, eq=False)
class Dictionary:
    """Training features as unit-norm columns of a (d, N) matrix."""

    columns: np.ndarray
    class_ids: np.ndarray
    class_count: int = field(default=-1)

    def __post_init__(self):
        D = np.array(self.columns, dtype=np.float64, copy=True)
        ids = np.array(self.class_ids, dtype=np.int64, copy=True)
        if D.ndim != 2 or ids.shape != (D.shape[1],):
            raise ValueError(f"columns {D.shape} and class ids {ids.shape} disagree")
        if not np.all(np.isfinite(D)):
            raise ValueError("dictionary has non-finite entries")
        if not np.allclose(np.linalg.norm(D, axis=0), 1.0, rtol=0, atol=1e-9):
            raise ValueError("dictionary columns must have unit L2 norm")
        c = self.class_count if self.class_count >= 0 else int(ids.max()) + 1
        if ids.min() < 0 or ids.max() >= c:
            raise ValueError(f"class ids must lie in [0, {c})")
        if np.bincount(ids, minlength=c).min() == 0:
            raise ValueError("every class needs at least one column")
        D.flags.writeable = False
        ids.flags.writeable = False
        object.__setattr__(self, "columns", D)
        object.__setattr__(self, "class_ids", ids)
        object.__setattr__(self, "class_count", c)

    @property
    def dimension(self) -> int:
        return self.columns.shape[0]

    @property
    def size(self) -> int:
        return self.columns.shape[1]


class CodingSolution(NamedTuple):
    alpha: np.ndarray
    lam: float


def _check_finite(*arrays):
    for a in arrays:
        if not np.all(np.isfinite(a)):
            raise ValueError("non-finite input to the coding solver")


class RidgeCoder:
    """Cholesky factorization of D^T D + lam I, reused across probes."""

    def __init__(self, D, lam: float = DEFAULT_LAMBDA):
        D = np.asarray(D, dtype=np.float64)
        if D.ndim != 2 or D.shape[0] < 1 or D.shape[1] < 1:
            raise ValueError(f"dictionary must be a non-empty matrix, got shape {D.shape}")
        if not lam > 0:
            raise ValueError(f"lambda must be > 0, got {lam}")
        _check_finite(D)
        self.D = D
        self.lam = float(lam)
        gram = D.T @ D
        gram[np.diag_indices_from(gram)] += self.lam
        self._factor = cho_factor(gram, lower=True)

    def solve(self, y) -> CodingSolution:
        y = np.asarray(y, dtype=np.float64)
        _check_finite(y)
        return CodingSolution(cho_solve(self._factor, self.D.T @ y), self.lam)


def solve_coding(D, y, lam: float = DEFAULT_LAMBDA) -> CodingSolution:
    """alpha = (D^T D + lam I)^-1 D^T y."""
    return RidgeCoder(D, lam).solve(y)


def class_distances(D, class_ids, alpha, y, class_count: int | None = None) -> np.ndarray:
    """Residual ||y - D_i alpha_i|| using only the columns of each class i."""
    D = np.asarray(D, dtype=np.float64)
    class_ids = np.asarray(class_ids)
    y = np.asarray(y, dtype=np.float64)
    alpha = np.asarray(alpha, dtype=np.float64)
    c = int(class_ids.max()) + 1 if class_count is None else class_count
    out = np.empty(c)
    for i in range(c):
        sel = class_ids == i
        out[i] = np.linalg.norm(y - D[:, sel] @ alpha[sel])
    return out


def generalized_confidence(distances) -> np.ndarray:
    """e_i = 1 - d_i / min_{k != i} d_k for every class.

    A zero runner-up distance gives 0 when d_i is also zero and
    ``DEGENERATE_CONFIDENCE`` otherwise.
    """
    d = np.asarray(distances, dtype=np.float64)
    if d.ndim != 1 or d.size < 2:
        raise ValueError("generalized confidence needs at least 2 classes")
    if np.any(d < 0) or not np.all(np.isfinite(d)):
        raise ValueError("distances must be finite and non-negative")
    order = np.argsort(d, kind="stable")
    lowest, second = d[order[0]], d[order[1]]
    others_min = np.full(d.size, lowest)
    others_min[order[0]] = second
    conf = np.empty(d.size)
    for i in range(d.size):
        if others_min[i] < _TINY:
            conf[i] = 0.0 if d[i] < _TINY else DEGENERATE_CONFIDENCE
        else:
            conf[i] = 1.0 - d[i] / others_min[i]
    return conf


def first_candidate_confidence(distances) -> tuple[int, float]:
    """Nearest class (lowest id on ties) and its generalized confidence."""
    conf = generalized_confidence(distances)
    best = int(np.argmin(distances))
    return best, float(conf[best])


def _is_degenerate(distances) -> bool:
    d = np.sort(np.asarray(distances))
    return bool(d[1] < _TINY)


# ---------------------------------------------------------------------------
# Scale banks
# ---------------------------------------------------------------------------


@dataclass(eq=False)
class ScaleModel:
    scale: int
    merge_maps: tuple
    dictionary: Dictionary
    lam: float = DEFAULT_LAMBDA

    def __post_init__(self):
        self.merge_maps = tuple(self.merge_maps)
        self.coder = RidgeCoder(self.dictionary.columns, self.lam)


@dataclass(eq=False)
class ScaleBank:
    """Per-scale merge maps and dictionaries for one descriptor kind."""

    kind: str
    models: Mapping[int, ScaleModel]
    class_names: tuple
    lam: float = DEFAULT_LAMBDA
    layout_version: str = LAYOUT_VERSION

    def __post_init__(self):
        if not self.models:
            raise ValueError("a scale bank needs at least one scale")
        self.models = {s: self.models[s] for s in sorted(self.models)}
        self.class_names = tuple(self.class_names)
        for m in self.models.values():
            if m.dictionary.class_count != len(self.class_names):
                raise ValueError("every scale must cover the same classes")

    @property
    def scales(self) -> tuple[int, ...]:
        return tuple(self.models)

    @property
    def valid_bins(self) -> int:
        return next(iter(self.models.values())).merge_maps[0].valid_bins

    def feature(self, image, scale: int, planes: StftPlanes | None = None) -> np.ndarray:
        model = self.models[scale]
        hists = raw_histograms(image, scale, self.kind, planes)
        layout = FeatureLayout(self.kind, scale, model.merge_maps[0].valid_bins, self.layout_version)
        return assemble_feature(hists, model.merge_maps, layout).values


class ScaleResult(NamedTuple):
    class_id: int
    confidence: float
    distances: np.ndarray
    scale: int
    degenerate: bool = False


@dataclass(frozen=True, eq=False)
class RecognitionResult:
    identity: int
    winning_scale: int
    confidence: float
    per_scale: tuple

    @property
    def degenerate(self) -> bool:
        return any(r.degenerate for r in self.per_scale)


def train_banks(
    images: Sequence,
    class_ids: Sequence[int],
    kinds: Sequence[str],
    scales: Sequence[int] = DEFAULT_SCALES,
    class_names: Sequence[str] | None = None,
    valid_bins: Mapping[str, int] | None = None,
    lam: float = DEFAULT_LAMBDA,
) -> dict[str, ScaleBank]:
    """Learn merge maps and dictionaries for every kind and scale.

    One merge map per (kind, plane or pair) is learned from the label
    histogram pooled over all training images and regions.
    """
    ids = np.asarray(class_ids, dtype=np.int64)
    if len(images) != ids.size or ids.size == 0:
        raise ValueError("need one class id per training image")
    if class_names is None:
        class_names = [str(i) for i in range(int(ids.max()) + 1)]
    vb = dict(DEFAULT_VALID_BINS)
    vb.update(valid_bins or {})
    models: dict[str, dict[int, ScaleModel]] = {k: {} for k in kinds}
    for scale in sorted(set(int(s) for s in scales)):
        planes = [compute_planes(img, scale) for img in images]
        for kind in kinds:
            hists = np.stack([raw_histograms(None, scale, kind, p) for p in planes])
            pooled = hists.sum(axis=(0, 2))  # (targets, bins)
            maps = [learn_merge_map(pooled[t], vb[kind]) for t in range(pooled.shape[0])]
            layout = FeatureLayout(kind, scale, vb[kind])
            cols = [assemble_feature(h, maps, layout).values for h in hists]
            dictionary = Dictionary(np.column_stack(cols), ids, len(class_names))
            models[kind][scale] = ScaleModel(scale, maps, dictionary, lam)
    return {k: ScaleBank(k, models[k], tuple(class_names), lam) for k in kinds}


def recognize_single_scale(bank: ScaleBank, scale: int, image, planes: StftPlanes | None = None) -> ScaleResult:
    if scale not in bank.models:
        raise ValueError(f"scale {scale} not in bank (scales {bank.scales})")
    model = bank.models[scale]
    y = bank.feature(image, scale, planes)
    alpha = model.coder.solve(y).alpha
    d = class_distances(model.dictionary.columns, model.dictionary.class_ids, alpha, y,
                        model.dictionary.class_count)
    cls, conf = first_candidate_confidence(d)
    return ScaleResult(cls, conf, d, scale, _is_degenerate(d))


def compete(per_scale: Sequence[ScaleResult]) -> RecognitionResult:
    """Pick the scale with the highest first-candidate confidence (smallest scale on ties)."""
    per_scale = sorted(per_scale, key=lambda r: r.scale)
    winner = per_scale[0]
    for r in per_scale[1:]:
        if r.confidence > winner.confidence:
            winner = r
    return RecognitionResult(winner.class_id, winner.scale, winner.confidence, tuple(per_scale))


def multiscale_recognize(bank: ScaleBank, image, planes: Mapping[int, StftPlanes] | None = None) -> RecognitionResult:
    """Run every scale of the bank and keep the most confident answer."""
    planes = planes or {}
    return compete([recognize_single_scale(bank, s, image, planes.get(s)) for s in bank.scales])
