"""Windowed short-term Fourier transform at four low frequencies.

For a window of ``W`` taps the response at pixel x and frequency u is

    F_x(u) = sum_r f(x + r) w(r) exp(-2j pi u.r)

over offsets r in [-(W-1)/2, (W-1)/2]^2, using coordinates relative to the
window center and replicate padding at the image border.  Frequencies are
(horizontal, vertical) pairs in cycles per pixel; offsets are (row, col),
so u.r = u[0] * dcol + u[1] * drow.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .imaging import GrayImage, Kernel

__all__ = [
    "WindowSpec",
    "StftPlanes",
    "frequency_set",
    "gaussian_window",
    "window_spec",
    "stft_plane",
    "compute_planes",
    "quadrant",
    "local_spectrum",
    "kernel_spectrum",
]


@dataclass(frozen=True)
class WindowSpec:
    size: int
    sigma: float

    def __post_init__(self):
        if int(self.size) != self.size or self.size < 1 or self.size % 2 == 0:
            raise ValueError(f"window size must be odd and positive, got {self.size}")
        if not self.sigma > 0:
            raise ValueError(f"window sigma must be > 0, got {self.sigma}")


def window_spec(scale: int) -> WindowSpec:
    """Gaussian window for a scale, sigma = W / 6."""
    return WindowSpec(scale, scale / 6.0)


def frequency_set(scale: int) -> tuple[tuple[float, float], ...]:
    """The four frequencies u1..u4 for a ``scale`` x ``scale`` window."""
    a = 1.0 / scale
    return ((a, 0.0), (0.0, a), (a, a), (a, -a))


def _gaussian_1d(spec: WindowSpec) -> np.ndarray:
    half = spec.size // 2
    d = np.arange(-half, half + 1, dtype=np.float64)
    return np.exp(-(d * d) / (2.0 * spec.sigma * spec.sigma))


def gaussian_window(spec: WindowSpec) -> np.ndarray:
    """Unnormalized ``W`` x ``W`` Gaussian window with peak value 1."""
    g = _gaussian_1d(spec)
    return np.outer(g, g)


def _as_pixels(image) -> np.ndarray:
    if isinstance(image, GrayImage):
        return image.pixels
    return np.asarray(image, dtype=np.float64)


def stft_plane(image, window: np.ndarray, u) -> np.ndarray:
    """Complex STFT response of every pixel for one frequency.

    Direct summation over all window taps; ``window`` may be any odd-sized
    2-D weight array.
    """
    pix = _as_pixels(image)
    window = np.asarray(window, dtype=np.float64)
    kh, kw = window.shape
    H, W = pix.shape
    if kh % 2 == 0 or kw % 2 == 0:
        raise ValueError(f"window dimensions must be odd, got {window.shape}")
    if kh > 2 * H or kw > 2 * W:
        raise ValueError(f"window {window.shape} larger than twice the image {pix.shape}")
    ph, pw = kh // 2, kw // 2
    padded = np.pad(pix, ((ph, ph), (pw, pw)), mode="edge")
    drow = np.arange(-ph, ph + 1)[:, None]
    dcol = np.arange(-pw, pw + 1)[None, :]
    taps = window * np.exp(-2j * np.pi * (u[0] * dcol + u[1] * drow))
    out = np.zeros(pix.shape, dtype=np.complex128)
    for i in range(kh):
        for j in range(kw):
            out += taps[i, j] * padded[i:i + H, j:j + W]
    return out


def _filter_axis(arr: np.ndarray, taps: np.ndarray, axis: int, n_out: int) -> np.ndarray:
    out = None
    for t, c in enumerate(taps):
        sl = [slice(None), slice(None)]
        sl[axis] = slice(t, t + n_out)
        term = c * arr[tuple(sl)]
        out = term if out is None else out + term
    return out


@dataclass(frozen=True, eq=False)
class StftPlanes:
    """Complex responses at the four frequencies of one scale, shape (4, H, W)."""

    scale: int
    frequencies: tuple
    responses: np.ndarray

    def __post_init__(self):
        if self.responses.ndim != 3 or self.responses.shape[0] != len(self.frequencies):
            raise ValueError("responses must have shape (n_frequencies, H, W)")

    @property
    def shape(self) -> tuple[int, int]:
        return self.responses.shape[1:]

    def magnitude(self, index=None) -> np.ndarray:
        r = self.responses if index is None else self.responses[index]
        return np.abs(r)

    def phase(self, index=None) -> np.ndarray:
        r = self.responses if index is None else self.responses[index]
        return np.angle(r)

    def quadrant(self, index=None) -> np.ndarray:
        r = self.responses if index is None else self.responses[index]
        return quadrant(r)


def compute_planes(image, scale: int) -> StftPlanes:
    """STFT planes at u1..u4 with the scale's Gaussian window.

    Uses the separability of the Gaussian-times-exponential kernel; the
    result equals :func:`stft_plane` up to rounding.
    """
    if int(scale) != scale or scale < 3 or scale % 2 == 0:
        raise ValueError(f"scale must be an odd integer >= 3, got {scale}")
    pix = _as_pixels(image)
    H, W = pix.shape
    if scale > 2 * H or scale > 2 * W:
        raise ValueError(f"scale {scale} larger than twice the image {pix.shape}")
    spec = window_spec(scale)
    g = _gaussian_1d(spec)
    half = scale // 2
    d = np.arange(-half, half + 1)
    padded = np.pad(pix, half, mode="edge")
    freqs = frequency_set(scale)
    by_ux = {}
    planes = np.empty((len(freqs), H, W), dtype=np.complex128)
    for k, (ux, uy) in enumerate(freqs):
        if ux not in by_ux:
            col_taps = g * np.exp(-2j * np.pi * ux * d)
            by_ux[ux] = _filter_axis(padded, col_taps, axis=1, n_out=W)
        row_taps = g * np.exp(-2j * np.pi * uy * d)
        planes[k] = _filter_axis(by_ux[ux], row_taps, axis=0, n_out=H)
    return StftPlanes(int(scale), freqs, planes)


def quadrant(z) -> np.ndarray:
    """Quadrant code of complex values: 0 (+,+), 1 (-,+), 2 (-,-), 3 (+,-); zeros count as non-negative."""
    z = np.asarray(z)
    re_neg = np.real(z) < 0
    im_neg = np.imag(z) < 0
    return np.where(im_neg, np.where(re_neg, 2, 3), np.where(re_neg, 1, 0)).astype(np.uint8)


# ---------------------------------------------------------------------------
# Whole-image spectra of windowed patches
# ---------------------------------------------------------------------------


def _circular_blur(pix: np.ndarray, kernel: Kernel) -> np.ndarray:
    w = kernel.weights
    ch, cw = w.shape[0] // 2, w.shape[1] // 2
    out = np.zeros_like(pix)
    for i in range(w.shape[0]):
        for j in range(w.shape[1]):
            if w[i, j] != 0.0:
                out += w[i, j] * np.roll(pix, (i - ch, j - cw), axis=(0, 1))
    return out


def _placed_window(shape, window: np.ndarray, center) -> np.ndarray:
    canvas = np.zeros(shape)
    kh, kw = window.shape
    r0, c0 = center[0] - kh // 2, center[1] - kw // 2
    rows = np.arange(r0, r0 + kh) % shape[0]
    cols = np.arange(c0, c0 + kw) % shape[1]
    canvas[np.ix_(rows, cols)] = window
    return canvas


def local_spectrum(image, window: np.ndarray, center, kernel: Kernel | None = None,
                   blur_first: bool = False) -> np.ndarray:
    """2-D DFT of the patch w(x - center) f(x) on the full (periodic) image grid.

    With ``kernel`` the patch is blurred by circular convolution: after
    windowing by default, or before windowing when ``blur_first`` is set
    (the way a blurred probe is actually observed).
    """
    pix = _as_pixels(image)
    win = _placed_window(pix.shape, np.asarray(window, dtype=np.float64), center)
    if kernel is None:
        return np.fft.fft2(win * pix)
    if blur_first:
        return np.fft.fft2(win * _circular_blur(pix, kernel))
    return np.fft.fft2(_circular_blur(win * pix, kernel))


def kernel_spectrum(kernel: Kernel, shape) -> np.ndarray:
    """DFT of ``kernel`` centered at the origin of a periodic grid of ``shape``."""
    w = kernel.weights
    return np.fft.fft2(_placed_window(shape, w, (0, 0)))
