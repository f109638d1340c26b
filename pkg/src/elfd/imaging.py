"""Grayscale rasters, PGM I/O and the degradation simulator.

Images are stored as float64 arrays of shape (height, width) with samples
in [0, 1].  Degradations cover box-average downsampling (with bicubic
upsampling back to the original geometry), Gaussian blur, linear motion
blur and arbitrary user-supplied kernels.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from os import PathLike
from pathlib import Path
from typing import Union

import numpy as np

__all__ = [
    "ParseError",
    "GrayImage",
    "Kernel",
    "LowRes",
    "GaussianBlur",
    "MotionBlur",
    "CustomKernel",
    "DegradationSpec",
    "load_pgm",
    "save_pgm",
    "gaussian_kernel",
    "motion_kernel",
    "load_kernel",
    "save_kernel",
    "convolve",
    "box_downsample",
    "resize_bicubic",
    "degrade",
    "parse_degradation",
    "degradation_label",
]


class ParseError(ValueError):
    """Raised for malformed PGM or kernel files."""


@dataclass(frozen=True, eq=False)
class GrayImage:
    """Immutable grayscale raster with samples in [0, 1]."""

    pixels: np.ndarray

    def __post_init__(self):
        arr = np.array(self.pixels, dtype=np.float64, copy=True)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError(f"image must be a non-empty 2-D array, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("image samples must be finite")
        if arr.min() < 0.0 or arr.max() > 1.0:
            raise ValueError("image samples must lie in [0, 1]")
        arr.flags.writeable = False
        object.__setattr__(self, "pixels", arr)

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.pixels.shape

    @property
    def samples(self) -> np.ndarray:
        """Row-major flat view of the samples."""
        return self.pixels.ravel()

    def __eq__(self, other):
        if not isinstance(other, GrayImage):
            return NotImplemented
        return self.shape == other.shape and np.array_equal(self.pixels, other.pixels)

    def __repr__(self):
        return f"GrayImage(width={self.width}, height={self.height})"


@dataclass(frozen=True, eq=False)
class Kernel:
    """Normalized, non-negative blur kernel with odd dimensions."""

    weights: np.ndarray

    def __post_init__(self):
        w = np.array(self.weights, dtype=np.float64, copy=True)
        if w.ndim != 2:
            raise ValueError("kernel weights must be 2-D")
        if w.shape[0] % 2 == 0 or w.shape[1] % 2 == 0:
            raise ValueError(f"kernel dimensions must be odd, got {w.shape}")
        if not np.all(np.isfinite(w)) or np.any(w < 0):
            raise ValueError("kernel weights must be finite and non-negative")
        if abs(w.sum() - 1.0) > 1e-9:
            raise ValueError(f"kernel weights must sum to 1, got {w.sum()!r}")
        w.flags.writeable = False
        object.__setattr__(self, "weights", w)

    @property
    def height(self) -> int:
        return self.weights.shape[0]

    @property
    def width(self) -> int:
        return self.weights.shape[1]

    def __repr__(self):
        return f"Kernel({self.height}x{self.width})"


@dataclass(frozen=True)
class LowRes:
    factor: int

    def __post_init__(self):
        if int(self.factor) != self.factor or self.factor < 2:
            raise ValueError(f"LowRes factor must be an integer >= 2, got {self.factor}")


@dataclass(frozen=True)
class GaussianBlur:
    sigma: float
    size: int

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError(f"GaussianBlur sigma must be > 0, got {self.sigma}")
        _check_odd_size(self.size)


@dataclass(frozen=True)
class MotionBlur:
    length: int
    angle: float

    def __post_init__(self):
        if int(self.length) != self.length or self.length < 1:
            raise ValueError(f"MotionBlur length must be an integer >= 1, got {self.length}")


@dataclass(frozen=True)
class CustomKernel:
    source: str


DegradationSpec = Union[LowRes, GaussianBlur, MotionBlur, CustomKernel]


def _check_odd_size(size):
    if int(size) != size or size < 1 or size % 2 == 0:
        raise ValueError(f"kernel size must be an odd integer >= 1, got {size}")


def _pixels(image) -> np.ndarray:
    if isinstance(image, GrayImage):
        return image.pixels
    return np.asarray(image, dtype=np.float64)


# ---------------------------------------------------------------------------
# PGM I/O
# ---------------------------------------------------------------------------

_TOKEN = re.compile(rb"\s*(?:#[^\n]*\n\s*)*(\S+)")


def load_pgm(path: str | PathLike) -> GrayImage:
    """Read an 8-bit binary PGM (P5) file.

    Samples are scaled by 1/255.  Comments between header tokens are skipped.
    """
    data = Path(path).read_bytes()
    pos = 0
    fields = []
    for name in ("magic", "width", "height", "maxval"):
        m = _TOKEN.match(data, pos)
        if m is None:
            raise ParseError(f"{path}: malformed header, missing {name}")
        fields.append(m.group(1))
        pos = m.end()
    magic, width, height, maxval = fields
    if magic != b"P5":
        raise ParseError(f"{path}: magic must be P5, got {magic!r}")
    try:
        width, height, maxval = int(width), int(height), int(maxval)
    except ValueError:
        raise ParseError(f"{path}: non-integer width/height/maxval in header") from None
    if width < 1:
        raise ParseError(f"{path}: width must be >= 1, got {width}")
    if height < 1:
        raise ParseError(f"{path}: height must be >= 1, got {height}")
    if maxval != 255:
        raise ParseError(f"{path}: unsupported maxval {maxval} (only 255)")
    if pos >= len(data) or not data[pos:pos + 1].isspace():
        raise ParseError(f"{path}: malformed header, no whitespace after maxval")
    pos += 1
    n = width * height
    raster = data[pos:pos + n]
    if len(raster) < n:
        raise ParseError(f"{path}: truncated data, expected {n} bytes, got {len(raster)}")
    arr = np.frombuffer(raster, dtype=np.uint8).reshape(height, width)
    return GrayImage(arr / 255.0)


def save_pgm(image, path: str | PathLike) -> None:
    """Write ``image`` as an 8-bit P5 file, quantizing by round(x * 255)."""
    pix = _pixels(image)
    q = np.clip(np.round(pix * 255.0), 0, 255).astype(np.uint8)
    header = f"P5\n{q.shape[1]} {q.shape[0]}\n255\n".encode("ascii")
    try:
        with open(path, "wb") as fh:
            fh.write(header)
            fh.write(q.tobytes())
    except OSError as exc:
        raise OSError(f"cannot write PGM to {path}: {exc}") from exc


# ---------------------------------------------------------------------------
# Kernels
# ---------------------------------------------------------------------------


def gaussian_kernel(sigma: float, size: int) -> Kernel:
    """Normalized ``size`` x ``size`` Gaussian centered on the middle tap."""
    if not sigma > 0:
        raise ValueError(f"sigma must be > 0, got {sigma}")
    _check_odd_size(size)
    half = size // 2
    d = np.arange(-half, half + 1, dtype=np.float64)
    w = np.exp(-(d[:, None] ** 2 + d[None, :] ** 2) / (2.0 * sigma * sigma))
    return Kernel(w / w.sum())


def _round_half_away(x: float) -> int:
    return int(math.copysign(math.floor(abs(x) + 0.5), x))


def motion_kernel(length: int, angle: float) -> Kernel:
    """Equal-weight line of ``length`` taps at ``angle`` degrees.

    The line is stepped one pixel at a time along its major axis, so a
    length-7 line at 45 degrees occupies exactly seven diagonal pixels.
    Angles are counter-clockwise with rows growing downward.
    """
    if int(length) != length or length < 1:
        raise ValueError(f"length must be an integer >= 1, got {length}")
    length = int(length)
    theta = math.radians(angle)
    cx, cy = math.cos(theta), -math.sin(theta)
    major = max(abs(cx), abs(cy))
    step_col, step_row = cx / major, cy / major
    start = -((length - 1) // 2)
    taps = [
        (_round_half_away(s * step_row), _round_half_away(s * step_col))
        for s in range(start, start + length)
    ]
    half = max(max(abs(r), abs(c)) for r, c in taps)
    w = np.zeros((2 * half + 1, 2 * half + 1))
    for r, c in taps:
        w[half + r, half + c] += 1.0
    return Kernel(w / length)


def load_kernel(path: str | PathLike) -> Kernel:
    """Read a kernel text file.

    Format: first line ``height width``, then ``height`` rows of ``width``
    whitespace-separated reals.  Weights within 1% of unit mass are
    renormalized; anything else is rejected.
    """
    lines = [ln for ln in Path(path).read_text().splitlines() if ln.strip()]
    if not lines:
        raise ParseError(f"{path}: empty kernel file")
    head = lines[0].split()
    try:
        height, width = int(head[0]), int(head[1])
    except (ValueError, IndexError):
        raise ParseError(f"{path}: first line must be 'height width'") from None
    if len(head) != 2 or height < 1 or width < 1:
        raise ParseError(f"{path}: bad kernel dimensions {lines[0]!r}")
    if height % 2 == 0 or width % 2 == 0:
        raise ParseError(f"{path}: kernel dimensions must be odd, got {height}x{width}")
    rows = lines[1:]
    if len(rows) != height:
        raise ParseError(f"{path}: expected {height} rows, got {len(rows)}")
    if any(len(row.split()) != width for row in rows):
        raise ParseError(f"{path}: every row must have {width} values")
    try:
        w = np.array([[float(v) for v in row.split()] for row in rows])
    except ValueError:
        raise ParseError(f"{path}: non-numeric kernel weight") from None
    if not np.all(np.isfinite(w)):
        raise ParseError(f"{path}: non-finite kernel weight")
    if np.any(w < 0):
        raise ParseError(f"{path}: negative kernel weight")
    total = w.sum()
    if abs(total - 1.0) > 0.01:
        raise ParseError(f"{path}: kernel mass {total!r} is not within 1% of 1")
    return Kernel(w / total)


def save_kernel(kernel: Kernel, path: str | PathLike) -> None:
    w = kernel.weights
    out = [f"{w.shape[0]} {w.shape[1]}"]
    out += [" ".join(repr(float(v)) for v in row) for row in w]
    Path(path).write_text("\n".join(out) + "\n")


# ---------------------------------------------------------------------------
# Filtering and resampling
# ---------------------------------------------------------------------------


def _convolve_raw(pix: np.ndarray, weights: np.ndarray) -> np.ndarray:
    kh, kw = weights.shape
    H, W = pix.shape
    if kh > 2 * H or kw > 2 * W:
        raise ValueError(f"kernel {kh}x{kw} larger than twice the image extent {H}x{W}")
    ph, pw = kh // 2, kw // 2
    padded = np.pad(pix, ((ph, ph), (pw, pw)), mode="edge")
    out = np.zeros_like(pix)
    # out(y, x) = sum_{a, b} k(a, b) f(y - a, x - b), offsets centered on the kernel
    for i in range(kh):
        for j in range(kw):
            wt = weights[i, j]
            if wt != 0.0:
                r0 = kh - 1 - i
                c0 = kw - 1 - j
                out += wt * padded[r0:r0 + H, c0:c0 + W]
    return out


def convolve(image, kernel: Kernel) -> GrayImage:
    """Convolve with replicate padding; output has the input's size and is clamped to [0, 1]."""
    out = _convolve_raw(_pixels(image), kernel.weights)
    return GrayImage(np.clip(out, 0.0, 1.0))


def box_downsample(image, factor: int) -> np.ndarray:
    """Average non-overlapping ``factor`` x ``factor`` blocks; trailing remainder rows/cols are dropped."""
    pix = _pixels(image)
    h, w = pix.shape[0] // factor, pix.shape[1] // factor
    if h < 1 or w < 1:
        raise ValueError(f"image {pix.shape} too small for factor {factor}")
    blocks = pix[: h * factor, : w * factor].reshape(h, factor, w, factor)
    return blocks.mean(axis=(1, 3))


def _keys_cubic(t: np.ndarray, a: float = -0.5) -> np.ndarray:
    t = np.abs(t)
    out = np.zeros_like(t)
    near = t <= 1
    far = (t > 1) & (t < 2)
    out[near] = (a + 2) * t[near] ** 3 - (a + 3) * t[near] ** 2 + 1
    out[far] = a * t[far] ** 3 - 5 * a * t[far] ** 2 + 8 * a * t[far] - 4 * a
    return out


def _cubic_matrix(n_out: int, n_in: int, scale: float) -> np.ndarray:
    """Row i holds the bicubic weights mapping ``n_in`` samples to output sample i.

    Pixel centers are aligned: output i sits at input coordinate
    (i + 0.5) / scale - 0.5.  Out-of-range taps are clamped to the border.
    """
    src = (np.arange(n_out) + 0.5) / scale - 0.5
    base = np.floor(src).astype(int)
    A = np.zeros((n_out, n_in))
    rows = np.arange(n_out)
    for off in range(-1, 3):
        idx = base + off
        wt = _keys_cubic(src - idx)
        np.add.at(A, (rows, np.clip(idx, 0, n_in - 1)), wt)
    return A


def resize_bicubic(pixels: np.ndarray, height: int, width: int, scale=None) -> np.ndarray:
    """Separable Keys bicubic resampling (a = -0.5) without clamping.

    ``scale`` overrides the (row, col) magnification; by default it is the
    ratio of output to input size.
    """
    pixels = np.asarray(pixels, dtype=np.float64)
    h, w = pixels.shape
    sy, sx = scale if scale is not None else (height / h, width / w)
    return _cubic_matrix(height, h, sy) @ pixels @ _cubic_matrix(width, w, sx).T


def degrade(image, spec: DegradationSpec) -> GrayImage:
    """Apply one degradation; the output always has the input's dimensions."""
    pix = _pixels(image)
    if isinstance(spec, LowRes):
        f = int(spec.factor)
        small = box_downsample(pix, f)
        out = resize_bicubic(small, pix.shape[0], pix.shape[1], scale=(f, f))
        return GrayImage(np.clip(out, 0.0, 1.0))
    if isinstance(spec, GaussianBlur):
        kernel = gaussian_kernel(spec.sigma, spec.size)
    elif isinstance(spec, MotionBlur):
        kernel = motion_kernel(spec.length, spec.angle)
    elif isinstance(spec, CustomKernel):
        kernel = load_kernel(spec.source)
    else:
        raise TypeError(f"unknown degradation {spec!r}")
    return convolve(pix, kernel)


def parse_degradation(text: str) -> DegradationSpec | None:
    """Parse ``lowres:F``, ``gaussian:SIGMA:SIZE``, ``motion:LEN:ANGLE``, ``kernel:PATH`` or ``none``."""
    name, _, rest = text.strip().partition(":")
    name = name.lower()
    args = rest.split(":") if rest else []
    try:
        if name == "none" and not args:
            return None
        if name == "lowres" and len(args) == 1:
            return LowRes(int(args[0]))
        if name == "gaussian" and len(args) == 2:
            return GaussianBlur(float(args[0]), int(args[1]))
        if name == "motion" and len(args) == 2:
            return MotionBlur(int(args[0]), float(args[1]))
        if name == "kernel" and rest:
            return CustomKernel(rest)
    except ValueError as exc:
        raise ValueError(f"bad degradation {text!r}: {exc}") from None
    raise ValueError(f"bad degradation {text!r}")


def degradation_label(spec: DegradationSpec | None) -> str:
    """Short row label, e.g. ``LR2``, ``Gaussian``, ``motion``, or the kernel file stem."""
    if spec is None:
        return "clean"
    if isinstance(spec, LowRes):
        return f"LR{spec.factor}"
    if isinstance(spec, GaussianBlur):
        return "Gaussian"
    if isinstance(spec, MotionBlur):
        return "motion"
    return Path(spec.source).stem
