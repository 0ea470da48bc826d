"""Frequency-domain analysis of images.

Radial profiles are indexed by normalized radial frequency ``rho = omega/pi``
in ``[0, 1]``: DCT coefficient ``(u, v)`` of an ``H x W`` image sits at
``rho = sqrt((u/H)^2 + (v/W)^2)``. Coefficients beyond ``rho = 1`` (the
corners past Nyquist) and the DC term are left out of every profile.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .image import Image
from .mask import radius_grid
from .transform import dct2_forward, dct2_inverse, dct_1d, idct_1d

DEFAULT_BINS = 64


@dataclass(frozen=True)
class RadialProfile:
    bin_edges: np.ndarray
    values: np.ndarray
    counts: np.ndarray

    def __post_init__(self):
        edges = np.asarray(self.bin_edges, dtype=np.float64)
        if edges.ndim != 1 or len(edges) < 2 or np.any(np.diff(edges) <= 0):
            raise ValueError("bin edges must be strictly increasing")
        if len(self.values) != len(edges) - 1 or len(self.counts) != len(edges) - 1:
            raise ValueError("values/counts must have one entry per bin")
        object.__setattr__(self, "bin_edges", edges)
        object.__setattr__(self, "values", np.asarray(self.values, dtype=np.float64))
        object.__setattr__(self, "counts", np.asarray(self.counts, dtype=np.int64))

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.bin_edges[:-1] + self.bin_edges[1:])

    @property
    def valid(self) -> np.ndarray:
        return self.counts > 0

    def with_values(self, values) -> "RadialProfile":
        return RadialProfile(self.bin_edges, values, self.counts)


@dataclass(frozen=True)
class PowerLawFit:
    alpha: float
    amplitude: float
    fit_range: tuple[float, float]
    residual: float

    def __call__(self, r):
        return self.amplitude * np.asarray(r, dtype=np.float64) ** (-self.alpha)


def normalized_frequency(dims: tuple[int, int]) -> np.ndarray:
    h, w = dims
    u = np.arange(h)[:, None] / h
    v = np.arange(w)[None, :] / w
    return np.sqrt(u * u + v * v)


def _edges(bins: int) -> np.ndarray:
    return np.linspace(0.0, 1.0, bins + 1)


def _bin_power(power: np.ndarray, bins: int) -> RadialProfile:
    rho = normalized_frequency(power.shape)
    keep = rho <= 1.0
    keep[0, 0] = False
    idx = np.minimum((rho[keep] * bins).astype(int), bins - 1)
    counts = np.bincount(idx, minlength=bins)
    sums = np.bincount(idx, weights=power[keep], minlength=bins)
    with np.errstate(invalid="ignore", divide="ignore"):
        values = np.where(counts > 0, sums / np.maximum(counts, 1), np.nan)
    return RadialProfile(_edges(bins), values, counts)


def radial_psd(img: Image, bins: int = DEFAULT_BINS, window: str | None = None) -> RadialProfile:
    """Radially averaged DCT periodogram, averaged over channels.

    The mean is removed first. With orthonormal scaling, white noise of
    variance s^2 gives a flat profile at level s^2. ``window="hann"`` tapers
    the image with a power-preserving separable Hann window.
    """
    if bins < 4:
        raise ValueError(f"need at least 4 bins, got {bins}")
    if img.height < 8 or img.width < 8:
        raise ValueError(f"PSD needs an image of at least 8x8, got {img.height}x{img.width}")
    x = img.data.astype(np.float64)
    x = x - x.mean(axis=(0, 1), keepdims=True)
    if window == "hann":
        w2 = np.outer(np.hanning(img.height), np.hanning(img.width))
        x = x * (w2 / np.sqrt(np.mean(w2 * w2)))[:, :, None]
    elif window is not None:
        raise ValueError(f"unknown window {window!r}")
    coeffs = dct_1d(dct_1d(x, axis=0), axis=1)
    return _bin_power(np.mean(coeffs * coeffs, axis=2), bins)


def average_profiles(profiles) -> RadialProfile:
    profiles = list(profiles)
    if not profiles:
        raise ValueError("no profiles to average")
    edges = profiles[0].bin_edges
    for p in profiles[1:]:
        _check_same_bins(profiles[0], p)
    values = np.mean([p.values for p in profiles], axis=0)
    counts = np.sum([p.counts for p in profiles], axis=0)
    return RadialProfile(edges, values, counts)


def _check_same_bins(a: RadialProfile, b: RadialProfile):
    if a.bin_edges.shape != b.bin_edges.shape or not np.allclose(a.bin_edges, b.bin_edges):
        raise ValueError("profiles do not share binning")


def _in_range(profile, lo, hi):
    c = profile.centers
    return (c >= lo) & (c <= hi)


def fit_power_law(profile: RadialProfile, r_lo: float, r_hi: float) -> PowerLawFit:
    """Least-squares line through ``log(value)`` vs ``log(radius)``; alpha = -slope."""
    if not r_lo > 0:
        raise ValueError(f"r_lo must be > 0, got {r_lo}")
    if r_hi <= r_lo:
        raise ValueError(f"empty fit range [{r_lo}, {r_hi}]")
    sel = _in_range(profile, r_lo, r_hi) & profile.valid & (profile.values > 0)
    if sel.sum() < 4:
        raise ValueError(f"need >= 4 usable bins in [{r_lo}, {r_hi}], found {int(sel.sum())}")
    lx = np.log(profile.centers[sel])
    ly = np.log(profile.values[sel])
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    return PowerLawFit(
        alpha=float(-slope),
        amplitude=float(np.exp(intercept)),
        fit_range=(float(r_lo), float(r_hi)),
        residual=float(np.sqrt(np.mean(resid * resid))),
    )


def power_law_profile(alpha: float, bins: int = DEFAULT_BINS, amplitude: float = 1.0) -> RadialProfile:
    """Noise-free ``amplitude * rho^-alpha`` evaluated at bin centres."""
    edges = _edges(bins)
    centers = 0.5 * (edges[:-1] + edges[1:])
    return RadialProfile(edges, amplitude * centers ** (-alpha), np.ones(bins, dtype=np.int64))


def power_law_field(dims, alpha: float, rng: np.random.Generator, channels: int = 1) -> Image:
    """Gaussian random field whose DCT power falls off as ``rho^-alpha``."""
    h, w = dims
    rho = normalized_frequency((h, w))
    rho[0, 0] = 1.0
    amp = rho ** (-alpha / 2.0)
    amp[0, 0] = 0.0
    coeffs = rng.standard_normal((h, w, channels)) * amp[:, :, None]
    return Image(idct_1d(idct_1d(coeffs, axis=0), axis=1))


def snr_curve(signal_psd: RadialProfile, noise_sigma: float) -> RadialProfile:
    """Per-bin signal PSD over the flat white-noise level ``noise_sigma^2``."""
    if not noise_sigma > 0:
        raise ValueError(f"noise_sigma must be > 0, got {noise_sigma}")
    return signal_psd.with_values(signal_psd.values / (noise_sigma * noise_sigma))


def snr_crossover(snr: RadialProfile, level: float = 1.0) -> float | None:
    """Radius where SNR first falls to `level`, interpolated log-linearly.

    Returns None when the curve never drops that low.
    """
    c = snr.centers[snr.valid]
    v = snr.values[snr.valid]
    below = np.nonzero(v <= level)[0]
    if len(below) == 0:
        return None
    i = below[0]
    if i == 0:
        return float(c[0])
    lv0, lv1 = math.log(v[i - 1]), math.log(v[i])
    t = (lv0 - math.log(level)) / (lv0 - lv1)
    return float(c[i - 1] + t * (c[i] - c[i - 1]))


def band_split(img: Image, cutoff: float) -> tuple[Image, Image]:
    """Ideal DCT-domain low/high split at index radius `cutoff`.

    Uses the same radius convention as SFM masks. ``low + high == img``.
    """
    spec = dct2_forward(img)
    low_bits = (radius_grid(img.dims) < cutoff)[:, :, None]
    low = dct2_inverse(spec.with_coeffs(spec.coeffs * low_bits))
    high = dct2_inverse(spec.with_coeffs(spec.coeffs * ~low_bits))
    return low, high


def gaussian_half_power_radius(sigma: float) -> float:
    """Normalized radius where a Gaussian blur's power response drops by 3 dB."""
    return math.sqrt(math.log(2.0)) / sigma / math.pi


def gaussian_power_response(rho, sigma: float) -> np.ndarray:
    """Power transfer ``exp(-omega^2 sigma^2)`` of a continuous Gaussian blur."""
    omega = np.pi * np.asarray(rho, dtype=np.float64)
    return np.exp(-(omega * sigma) ** 2)


def spectral_gap(reference: RadialProfile, candidate: RadialProfile, band: tuple[float, float]) -> float:
    """Mean dB deficit of `candidate` below `reference` over `band`.

    Positive values mean the candidate is missing energy. Bins where the
    candidate is zero give an infinite gap and are dropped with a warning.
    """
    _check_same_bins(reference, candidate)
    lo, hi = band
    sel = _in_range(reference, lo, hi) & reference.valid & candidate.valid
    if not sel.any():
        raise ValueError(f"no bins fall inside band [{lo}, {hi}]")
    ref = reference.values[sel]
    cand = candidate.values[sel]
    with np.errstate(divide="ignore"):
        gap = 10.0 * np.log10(ref / cand)
    finite = np.isfinite(gap)
    if not finite.all():
        warnings.warn(f"{int((~finite).sum())} bin(s) with zero candidate power excluded from gap")
    if not finite.any():
        return math.inf
    return float(gap[finite].mean())
