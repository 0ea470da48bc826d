"""Orthonormal 2-D DCT-II / DCT-III.

The fast path runs separable 1-D transforms along rows and columns, each
computed with a single complex FFT of a reordered sequence (Makhoul's
algorithm), so any length is handled exactly, not just powers of two.
``dct2_forward_naive`` evaluates the defining cosine sums directly and is
kept as the reference the fast path is tested against.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .image import Image

NAIVE_MAX_SIZE = 256


@dataclass(frozen=True)
class Spectrum:
    """DCT-II coefficients of an image, one plane per channel."""

    coeffs: np.ndarray
    nominal_range: str = "unit"
    norm: str = "ortho"

    @property
    def height(self) -> int:
        return self.coeffs.shape[0]

    @property
    def width(self) -> int:
        return self.coeffs.shape[1]

    @property
    def channels(self) -> int:
        return self.coeffs.shape[2]

    def with_coeffs(self, coeffs: np.ndarray) -> "Spectrum":
        return Spectrum(coeffs, self.nominal_range, self.norm)


def _scale(n: int) -> np.ndarray:
    s = np.full(n, np.sqrt(2.0 / n))
    s[0] = np.sqrt(1.0 / n)
    return s


def dct_1d(x: np.ndarray, axis: int = -1) -> np.ndarray:
    """Orthonormal DCT-II of `x` along `axis`."""
    x = np.moveaxis(np.asarray(x, dtype=np.float64), axis, -1)
    n = x.shape[-1]
    # even samples in order, then odd samples reversed
    v = np.concatenate([x[..., ::2], x[..., 1::2][..., ::-1]], axis=-1)
    k = np.arange(n)
    twiddle = np.exp(-1j * np.pi * k / (2 * n))
    y = np.real(twiddle * np.fft.fft(v, axis=-1)) * _scale(n)
    return np.moveaxis(y, -1, axis)


def idct_1d(y: np.ndarray, axis: int = -1) -> np.ndarray:
    """Orthonormal DCT-III (inverse of :func:`dct_1d`) along `axis`."""
    y = np.moveaxis(np.asarray(y, dtype=np.float64), axis, -1)
    n = y.shape[-1]
    c = y / _scale(n)
    # c_{N-k} with c_N := 0
    c_rev = np.zeros_like(c)
    c_rev[..., 1:] = c[..., :0:-1]
    k = np.arange(n)
    V = np.exp(1j * np.pi * k / (2 * n)) * (c - 1j * c_rev)
    v = np.real(np.fft.ifft(V, axis=-1))
    x = np.empty_like(v)
    half = (n + 1) // 2
    x[..., ::2] = v[..., :half]
    x[..., 1::2] = v[..., half:][..., ::-1]
    return np.moveaxis(x, -1, axis)


def dct2_forward(img: Image) -> Spectrum:
    """Channel-wise orthonormal 2-D DCT-II.

    ``coeffs[0, 0, c]`` equals ``mean(channel c) * sqrt(H * W)`` and total
    energy is preserved.
    """
    coeffs = dct_1d(dct_1d(img.data, axis=0), axis=1)
    return Spectrum(coeffs, img.nominal_range)


def dct2_inverse(spec: Spectrum) -> Image:
    """Invert :func:`dct2_forward`. No clamping is applied."""
    if spec.norm != "ortho":
        raise ValueError(f"unsupported spectrum normalization {spec.norm!r}")
    if spec.coeffs.ndim != 3:
        raise ValueError(f"spectrum coefficients must be HxWxC, got shape {spec.coeffs.shape}")
    data = idct_1d(idct_1d(spec.coeffs, axis=0), axis=1)
    return Image(data, spec.nominal_range)


def dct_matrix(n: int) -> np.ndarray:
    """Orthonormal DCT-II matrix ``C[k, j] = s_k cos(pi (2j + 1) k / 2n)``."""
    k = np.arange(n)[:, None]
    j = np.arange(n)[None, :]
    return _scale(n)[:, None] * np.cos(np.pi * (2 * j + 1) * k / (2 * n))


def dct2_forward_naive(img: Image) -> Spectrum:
    """Reference DCT-II by direct summation, O(N^2) per axis."""
    h, w = img.dims
    if h > NAIVE_MAX_SIZE or w > NAIVE_MAX_SIZE:
        raise ValueError(f"naive DCT limited to {NAIVE_MAX_SIZE}x{NAIVE_MAX_SIZE}, got {h}x{w}")
    ch = dct_matrix(h)
    cw = dct_matrix(w)
    x = img.data.astype(np.float64)
    coeffs = np.einsum("kh,hwc,lw->klc", ch, x, cw)
    return Spectrum(coeffs, img.nominal_range)
