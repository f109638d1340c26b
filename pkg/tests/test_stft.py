import cmath
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from elfd.imaging import gaussian_kernel, motion_kernel
from elfd.stft import (
    StftPlanes,
    WindowSpec,
    compute_planes,
    frequency_set,
    gaussian_window,
    kernel_spectrum,
    local_spectrum,
    quadrant,
    stft_plane,
    window_spec,
)


def direct_stft(pix, window, u, y, x):
    """Straight evaluation of the windowed sum at one pixel, clamped reads."""
    H, W = pix.shape
    half = window.shape[0] // 2
    acc = 0j
    for dr in range(-half, half + 1):
        for dc in range(-half, half + 1):
            f = pix[min(max(y + dr, 0), H - 1), min(max(x + dc, 0), W - 1)]
            acc += f * window[dr + half, dc + half] * cmath.exp(-2j * math.pi * (u[0] * dc + u[1] * dr))
    return acc


def test_gaussian_window_single_tap():
    np.testing.assert_array_equal(gaussian_window(WindowSpec(1, 1.0)), [[1.0]])


def test_gaussian_window_flat_limit():
    np.testing.assert_allclose(gaussian_window(WindowSpec(3, 1e9)), 1.0, atol=1e-9)


def test_gaussian_window_direct_formula_and_symmetry():
    w = gaussian_window(WindowSpec(5, 5 / 6))
    sigma = 5 / 6
    assert w[0, 0] == pytest.approx(math.exp(-8 / (2 * sigma * sigma)), rel=1e-14)
    assert w[2, 2] == 1.0
    np.testing.assert_array_equal(w, np.rot90(w))


def test_window_spec_invariants():
    with pytest.raises(ValueError):
        WindowSpec(4, 1.0)
    with pytest.raises(ValueError):
        WindowSpec(5, 0.0)
    assert window_spec(11) == WindowSpec(11, 11 / 6)


def test_frequency_set_matches_five_tap_example():
    assert frequency_set(5) == ((0.2, 0.0), (0.0, 0.2), (0.2, 0.2), (0.2, -0.2))


def test_stft_zero_image():
    out = stft_plane(np.zeros((8, 8)), gaussian_window(window_spec(5)), (0.2, 0.0))
    assert np.all(out == 0)


def test_stft_dc_on_constant():
    w = gaussian_window(window_spec(5))
    out = stft_plane(np.full((8, 8), 0.3), w, (0.0, 0.0))
    np.testing.assert_allclose(out, 0.3 * w.sum(), atol=1e-14)
    assert np.all(out.imag == 0)


def test_stft_plane_matches_direct_sum():
    rng = np.random.default_rng(0)
    pix = rng.random((16, 16))
    w = gaussian_window(window_spec(5))
    u = frequency_set(5)[0]
    out = stft_plane(pix, w, u)
    for y in range(16):
        for x in range(16):
            assert abs(out[y, x] - direct_stft(pix, w, u, y, x)) < 1e-10


def test_compute_planes_equals_stft_plane():
    rng = np.random.default_rng(1)
    pix = rng.random((32, 32))
    planes = compute_planes(pix, 11)
    w = gaussian_window(window_spec(11))
    for k, u in enumerate(frequency_set(11)):
        np.testing.assert_allclose(planes.responses[k], stft_plane(pix, w, u), atol=1e-12)


def test_constant_image_gives_constant_magnitudes():
    planes = compute_planes(np.full((20, 20), 0.6), 5)
    for k in range(4):
        m = planes.magnitude(k)
        np.testing.assert_allclose(m, m[10, 10], atol=1e-12)


def test_translation_equivariance_of_magnitudes():
    rng = np.random.default_rng(2)
    pix = rng.random((24, 24))
    shifted = np.roll(pix, 1, axis=1)
    a = compute_planes(pix, 5).magnitude()
    b = compute_planes(shifted, 5).magnitude()
    # interior columns far from the wrap-around seam
    np.testing.assert_allclose(b[..., 4:-3], a[..., 3:-4], atol=1e-12)


def test_conjugate_symmetry():
    rng = np.random.default_rng(3)
    pix = rng.random((12, 12))
    w = gaussian_window(window_spec(7))
    u = (1 / 7, -1 / 7)
    np.testing.assert_allclose(stft_plane(pix, w, (-u[0], -u[1])), np.conj(stft_plane(pix, w, u)), atol=1e-12)


def test_relative_and_absolute_conventions_share_magnitudes():
    rng = np.random.default_rng(4)
    pix = rng.random((12, 12))
    w = gaussian_window(window_spec(5))
    u = (0.2, 0.2)
    rel = stft_plane(pix, w, u)
    rows, cols = np.indices(pix.shape)
    absolute = rel * np.exp(-2j * np.pi * (u[0] * cols + u[1] * rows))
    np.testing.assert_allclose(np.abs(absolute), np.abs(rel), atol=1e-10)


def test_compute_planes_shape_and_validation():
    planes = compute_planes(np.zeros((9, 13)), 5)
    assert isinstance(planes, StftPlanes)
    assert planes.shape == (9, 13) and planes.responses.shape == (4, 9, 13)
    for bad in (4, 1, 2):
        with pytest.raises(ValueError):
            compute_planes(np.zeros((9, 9)), bad)


@pytest.mark.parametrize(
    "z, q",
    [(1 + 1j, 0), (-1 + 1j, 1), (-1 - 1j, 2), (1 - 1j, 3), (0j, 0), (-1 + 0j, 1), (0 - 1j, 3)],
)
def test_quadrant_cases(z, q):
    assert quadrant(z) == q


@given(st.complex_numbers(allow_nan=False, allow_infinity=False))
def test_quadrant_sign_bits(z):
    # bit 1: imaginary negative; bit 0: exactly one of re, im negative
    re_neg, im_neg = z.real < 0, z.imag < 0
    expected = 2 * im_neg + (re_neg != im_neg)
    assert quadrant(z) == expected


# --- blur-ratio invariance ------------------------------------------------


def _ratio_discrepancy(a_i, a_j, f_i, f_j, mask):
    lhs = a_i * f_j
    rhs = a_j * f_i
    return np.max(np.abs(lhs - rhs)[mask]) / np.max(np.maximum(np.abs(lhs), np.abs(rhs))[mask])


def test_window_then_blur_keeps_spectral_ratio():
    rng = np.random.default_rng(5)
    pix = rng.random((32, 32))
    w = gaussian_window(window_spec(9))
    k = gaussian_kernel(1.5, 7)
    xi, xj = (10, 12), (20, 17)
    f_i, f_j = local_spectrum(pix, w, xi), local_spectrum(pix, w, xj)
    g_i, g_j = local_spectrum(pix, w, xi, k), local_spectrum(pix, w, xj, k)
    mask = np.abs(kernel_spectrum(k, pix.shape)) > 1e-3
    np.testing.assert_allclose(g_i, kernel_spectrum(k, pix.shape) * f_i, atol=1e-10)
    assert _ratio_discrepancy(g_i, g_j, f_i, f_j, mask) < 1e-6


def test_blur_then_window_breaks_spectral_ratio():
    rng = np.random.default_rng(6)
    pix = rng.random((32, 32))
    w = gaussian_window(window_spec(9))
    k = motion_kernel(7, 45)
    xi, xj = (10, 12), (20, 17)
    f_i, f_j = local_spectrum(pix, w, xi), local_spectrum(pix, w, xj)
    g_i = local_spectrum(pix, w, xi, k, blur_first=True)
    g_j = local_spectrum(pix, w, xj, k, blur_first=True)
    mask = np.abs(kernel_spectrum(k, pix.shape)) > 1e-3
    assert _ratio_discrepancy(g_i, g_j, f_i, f_j, mask) > 1e-6
