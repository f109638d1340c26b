"""Experiment configuration as a plain-text ``key=value`` file."""

from __future__ import annotations

from dataclasses import dataclass, field, fields, replace
from pathlib import Path

from ..descriptors import KINDS
from ..imaging import parse_degradation
from ..recognition import DEFAULT_LAMBDA, DEFAULT_SCALES, DEFAULT_VALID_BINS, SINGLE_SCALE

__all__ = ["ExperimentConfig", "load_config", "parse_config", "CONFIG_KEYS"]

MODES = ("single", "competition")
DEFAULT_DEGRADATIONS = ("lowres:2", "gaussian:3:7", "motion:7:45", "lowres:4")


def _csv(text: str) -> tuple[str, ...]:
    return tuple(t.strip() for t in text.split(",") if t.strip())


def _parse_scales(text: str) -> tuple[int, ...]:
    """``11,13,15`` or ``11:31:2`` (inclusive range)."""
    text = text.strip()
    if ":" in text:
        lo, hi, step = (int(v) for v in text.split(":"))
        return tuple(range(lo, hi + 1, step))
    return tuple(int(v) for v in _csv(text))


def _parse_valid_bins(text: str) -> dict[str, int]:
    out = dict(DEFAULT_VALID_BINS)
    for item in _csv(text):
        kind, _, value = item.partition(":")
        if kind not in KINDS:
            raise ValueError(f"valid_bins: unknown kind {kind!r}")
        out[kind] = int(value)
    return out


def _parse_resize(text: str):
    text = text.strip().lower()
    if text in ("", "none"):
        return None
    h, _, w = text.partition("x")
    return int(h), int(w)


@dataclass(frozen=True)
class ExperimentConfig:
    """Settings for train/evaluate; defaults follow the published parameter regime."""

    dataset: str = ""
    seed: int = 0
    n_train: int = 5
    kinds: tuple = KINDS
    modes: tuple = MODES
    single_scale: int = SINGLE_SCALE
    scales: tuple = DEFAULT_SCALES
    valid_bins: dict = field(default_factory=lambda: dict(DEFAULT_VALID_BINS))
    lam: float = DEFAULT_LAMBDA
    degradations: tuple = DEFAULT_DEGRADATIONS
    probes: str = "test"
    output: str = "elfd-out"
    resize: tuple | None = None
    workers: int = 1

    def __post_init__(self):
        for k in self.kinds:
            if k not in KINDS:
                raise ValueError(f"unknown descriptor kind {k!r}")
        for m in self.modes:
            if m not in MODES:
                raise ValueError(f"unknown scale mode {m!r}; expected {MODES}")
        for s in self.scales + (self.single_scale,):
            if s < 3 or s % 2 == 0:
                raise ValueError(f"scales must be odd and >= 3, got {s}")
        if self.probes not in ("test", "train"):
            raise ValueError("probes must be 'test' or 'train'")
        for d in self.degradations:
            parse_degradation(d)
        if self.n_train < 1:
            raise ValueError("n_train must be >= 1")

    @property
    def train_scales(self) -> tuple[int, ...]:
        """Every scale a model needs for the configured modes."""
        s = set()
        if "single" in self.modes:
            s.add(self.single_scale)
        if "competition" in self.modes:
            s.update(self.scales)
        return tuple(sorted(s))

    def with_overrides(self, overrides: dict[str, str]) -> "ExperimentConfig":
        return parse_config(overrides, base=self)

    def to_text(self) -> str:
        vb = ",".join(f"{k}:{v}" for k, v in self.valid_bins.items())
        resize = "none" if self.resize is None else f"{self.resize[0]}x{self.resize[1]}"
        items = [
            ("dataset", self.dataset),
            ("seed", self.seed),
            ("n_train", self.n_train),
            ("kinds", ",".join(self.kinds)),
            ("modes", ",".join(self.modes)),
            ("single_scale", self.single_scale),
            ("scales", ",".join(map(str, self.scales))),
            ("valid_bins", vb),
            ("lambda", repr(self.lam)),
            ("degradations", ",".join(self.degradations)),
            ("probes", self.probes),
            ("output", self.output),
            ("resize", resize),
            ("workers", self.workers),
        ]
        return "".join(f"{k}={v}\n" for k, v in items)


_PARSERS = {
    "dataset": ("dataset", str),
    "seed": ("seed", int),
    "n_train": ("n_train", int),
    "kinds": ("kinds", _csv),
    "modes": ("modes", _csv),
    "single_scale": ("single_scale", int),
    "scales": ("scales", _parse_scales),
    "valid_bins": ("valid_bins", _parse_valid_bins),
    "lambda": ("lam", float),
    "degradations": ("degradations", _csv),
    "probes": ("probes", str),
    "output": ("output", str),
    "resize": ("resize", _parse_resize),
    "workers": ("workers", int),
}
CONFIG_KEYS = tuple(_PARSERS)
assert {f.name for f in fields(ExperimentConfig)} == {a for a, _ in _PARSERS.values()}


def parse_config(values: dict[str, str], base: ExperimentConfig | None = None) -> ExperimentConfig:
    changes = {}
    for key, raw in values.items():
        if key not in _PARSERS:
            raise ValueError(f"unknown config key {key!r}")
        attr, conv = _PARSERS[key]
        try:
            changes[attr] = conv(raw)
        except ValueError as exc:
            raise ValueError(f"config key {key}: {exc}") from None
    return replace(base or ExperimentConfig(), **changes)


def load_config(path) -> ExperimentConfig:
    """Read ``key=value`` lines; blank lines and ``#`` comments are ignored."""
    values = {}
    for n, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ValueError(f"{path}:{n}: expected key=value")
        values[key.strip()] = value.strip()
    return parse_config(values)
