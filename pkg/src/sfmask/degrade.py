"""Super-resolution degradation and noise synthesis.

Blur kernels, decimation / bicubic downsampling and the noise models used to
produce low-resolution or noisy training inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import ndimage

from .image import Image

# Gaussian test kernels g_1.7 .. g_6.5 from the SR benchmark grid
TABLE1_SIGMAS = tuple(round(1.7 + 0.6 * i, 1) for i in range(9))
# kernel pair used for the spectral-gap study
GAP_SIGMAS = (4.1, 7.4)
BLIND_SIGMA_RANGE = (0.0, 55.0)

BICUBIC_A = -0.5


@dataclass(frozen=True)
class BlurKernel:
    taps: np.ndarray
    kind: str = "gaussian"
    sigma: Optional[float] = None
    # 1-D factor when taps == outer(taps_1d, taps_1d)
    taps_1d: Optional[np.ndarray] = None

    @property
    def size(self) -> int:
        return self.taps.shape[0]

    def describe(self) -> str:
        if self.kind == "gaussian":
            return f"gaussian:{self.sigma:g}"
        return self.kind


def gaussian_kernel(sigma: float) -> BlurKernel:
    """Normalized 2-D Gaussian truncated at 3 sigma (side ``2*ceil(3 sigma)+1``)."""
    if not sigma > 0:
        raise ValueError(f"sigma must be > 0, got {sigma}")
    radius = math.ceil(3.0 * sigma)
    x = np.arange(-radius, radius + 1, dtype=np.float64)
    g = np.exp(-(x * x) / (2.0 * sigma * sigma))
    g /= g.sum()
    return BlurKernel(np.outer(g, g), "gaussian", float(sigma), g)


def identity_kernel() -> BlurKernel:
    return BlurKernel(np.ones((1, 1)), "identity")


def bicubic_kernel() -> BlurKernel:
    """Marker kernel: the blur happens inside bicubic downsampling."""
    return BlurKernel(np.ones((1, 1)), "bicubic")


def parse_kernel(text: str) -> BlurKernel:
    """Parse ``gaussian:SIGMA``, ``bicubic`` or ``identity``."""
    name, _, arg = text.strip().partition(":")
    if name == "gaussian":
        return gaussian_kernel(float(arg))
    if name == "bicubic" and not arg:
        return bicubic_kernel()
    if name == "identity" and not arg:
        return identity_kernel()
    raise ValueError(f"cannot parse kernel {text!r}")


def convolve(img: Image, k: BlurKernel) -> Image:
    """Same-size per-channel convolution with half-sample symmetric padding."""
    kh, kw = k.taps.shape
    if kh > 2 * img.height or kw > 2 * img.width:
        raise ValueError(f"kernel {kh}x{kw} too large for {img.height}x{img.width} image")
    data = img.data.astype(np.float64)
    out = np.empty_like(data)
    for c in range(img.channels):
        # scipy's "reflect" repeats the edge sample: (d c b a | a b c d | d c b a)
        if k.taps_1d is not None:
            tmp = ndimage.convolve1d(data[:, :, c], k.taps_1d, axis=0, mode="reflect")
            out[:, :, c] = ndimage.convolve1d(tmp, k.taps_1d, axis=1, mode="reflect")
        else:
            out[:, :, c] = ndimage.convolve(data[:, :, c], k.taps, mode="reflect")
    return img.with_data(out)


def cubic(x, a: float = BICUBIC_A):
    x = np.abs(np.asarray(x, dtype=np.float64))
    x2, x3 = x * x, x * x * x
    near = (a + 2) * x3 - (a + 3) * x2 + 1
    far = a * x3 - 5 * a * x2 + 8 * a * x - 4 * a
    return np.where(x <= 1, near, np.where(x < 2, far, 0.0))


def _mirror(idx: np.ndarray, n: int) -> np.ndarray:
    m = np.mod(idx, 2 * n)
    return np.where(m >= n, 2 * n - 1 - m, m)


def bicubic_weights(n_in: int, factor: int) -> np.ndarray:
    """Dense ``(n_in // factor, n_in)`` resampling matrix for 1/`factor` bicubic.

    The cubic kernel is stretched by `factor` (antialiasing) and pixel
    centres are aligned, so output ``i`` sits at input coordinate
    ``(i + 0.5) * factor - 0.5``. Boundaries are mirrored.
    """
    n_out = n_in // factor
    centers = (np.arange(n_out) + 0.5) * factor - 0.5
    half = 2.0 * factor
    first = np.floor(centers - half).astype(int) + 1
    taps = np.arange(int(2 * half) + 1)
    src = first[:, None] + taps[None, :]
    w = cubic((src - centers[:, None]) / factor)
    w /= w.sum(axis=1, keepdims=True)
    out = np.zeros((n_out, n_in))
    rows = np.repeat(np.arange(n_out), src.shape[1])
    np.add.at(out, (rows, _mirror(src, n_in).ravel()), w.ravel())
    return out


def downsample(img: Image, factor: int, kind: str = "decimate") -> Image:
    """Reduce both dimensions by the integer `factor`.

    ``decimate`` keeps every `factor`-th sample from the top-left corner and
    expects the caller to have blurred first; ``bicubic`` resamples with the
    stretched a=-0.5 cubic kernel. Output is ``floor(H/T) x floor(W/T)``.
    """
    factor = int(factor)
    if factor < 1:
        raise ValueError(f"downsampling factor must be >= 1, got {factor}")
    h, w = img.height // factor, img.width // factor
    if h == 0 or w == 0:
        raise ValueError(f"factor {factor} leaves no pixels of a {img.height}x{img.width} image")
    if factor == 1:
        return img
    if kind == "decimate":
        return img.with_data(img.data[: h * factor : factor, : w * factor : factor].copy())
    if kind == "bicubic":
        wr = bicubic_weights(img.height, factor)
        wc = bicubic_weights(img.width, factor)
        return img.with_data(np.einsum("ih,hwc,jw->ijc", wr, img.data.astype(np.float64), wc))
    raise ValueError(f"unknown downsampling kind {kind!r}")


@dataclass(frozen=True)
class NoiseModel:
    """Noise description.

    `sigma`, `sigma_min`, `sigma_max` are in byte units (0..255) and are
    rescaled for unit-range images. `gain` and `read_sigma` of the
    Poisson-Gaussian model are in the image's own units.
    """

    kind: str = "none"
    sigma: float = 0.0
    sigma_min: float = 0.0
    sigma_max: float = 0.0
    gain: float = 1.0
    read_sigma: float = 0.0

    def __post_init__(self):
        if self.kind not in ("none", "awgn", "awgn_blind", "poisson_gaussian"):
            raise ValueError(f"unknown noise kind {self.kind!r}")
        if min(self.sigma, self.sigma_min, self.sigma_max, self.read_sigma) < 0:
            raise ValueError("noise standard deviations must be >= 0")
        if self.sigma_min > self.sigma_max:
            raise ValueError("sigma_min must not exceed sigma_max")
        if not self.gain > 0:
            raise ValueError("gain must be > 0")

    @classmethod
    def none(cls):
        return cls("none")

    @classmethod
    def awgn(cls, sigma):
        return cls("awgn", sigma=float(sigma))

    @classmethod
    def awgn_blind(cls, lo=BLIND_SIGMA_RANGE[0], hi=BLIND_SIGMA_RANGE[1]):
        return cls("awgn_blind", sigma_min=float(lo), sigma_max=float(hi))

    @classmethod
    def poisson_gaussian(cls, gain, read_sigma):
        return cls("poisson_gaussian", gain=float(gain), read_sigma=float(read_sigma))

    @classmethod
    def parse(cls, text: str) -> "NoiseModel":
        """Parse ``none``, ``awgn:S``, ``awgn-blind:LO,HI`` or ``pg:GAIN,READ``."""
        name, _, arg = text.strip().partition(":")
        try:
            vals = [float(v) for v in arg.split(",")] if arg else []
            if name == "none" and not vals:
                return cls.none()
            if name == "awgn" and len(vals) == 1:
                return cls.awgn(vals[0])
            if name == "awgn-blind" and len(vals) == 2:
                return cls.awgn_blind(*vals)
            if name == "awgn-blind" and not vals:
                return cls.awgn_blind()
            if name == "pg" and len(vals) == 2:
                return cls.poisson_gaussian(*vals)
        except ValueError as e:
            raise ValueError(f"cannot parse noise model {text!r}: {e}") from None
        raise ValueError(f"cannot parse noise model {text!r}")

    def describe(self) -> str:
        if self.kind == "awgn":
            return f"awgn:{self.sigma:g}"
        if self.kind == "awgn_blind":
            return f"awgn-blind:{self.sigma_min:g},{self.sigma_max:g}"
        if self.kind == "poisson_gaussian":
            return f"pg:{self.gain:g},{self.read_sigma:g}"
        return "none"

    def resolve(self, rng: np.random.Generator) -> "NoiseModel":
        """Fix the blind noise level for one image (one uniform draw).

        Non-blind models are returned unchanged and consume nothing.
        """
        if self.kind != "awgn_blind":
            return self
        return NoiseModel.awgn(rng.uniform(self.sigma_min, self.sigma_max))


def add_noise(img: Image, model: NoiseModel, rng: np.random.Generator) -> Image:
    """Add noise per `model`; the result is not clamped."""
    model = model.resolve(rng)
    if model.kind == "none":
        return img
    data = img.data.astype(np.float64)
    if model.kind == "awgn":
        sigma = model.sigma * img.peak / 255.0
        return img.with_data(data + rng.normal(0.0, sigma, size=data.shape))
    if np.any(data < 0):
        raise ValueError("Poisson-Gaussian noise needs non-negative samples")
    shot = model.gain * rng.poisson(data / model.gain)
    return img.with_data(shot + rng.normal(0.0, model.read_sigma, size=data.shape))


@dataclass(frozen=True)
class DegradationConfig:
    kernel: BlurKernel = field(default_factory=bicubic_kernel)
    scale: int = 4
    noise: NoiseModel = field(default_factory=NoiseModel.none)

    def __post_init__(self):
        if int(self.scale) < 1:
            raise ValueError(f"scale must be >= 1, got {self.scale}")

    def to_dict(self) -> dict:
        return {"kernel": self.kernel.describe(), "scale": int(self.scale), "noise": self.noise.describe()}


def degrade_sr(hr: Image, cfg: DegradationConfig, rng: np.random.Generator) -> Image:
    """Blur, downsample, then add noise.

    A bicubic kernel folds the blur into bicubic downsampling; any other
    kernel is convolved first and followed by plain decimation.
    """
    if cfg.kernel.kind == "bicubic":
        lr = downsample(hr, cfg.scale, "bicubic")
    else:
        lr = downsample(convolve(hr, cfg.kernel), cfg.scale, "decimate")
    return add_noise(lr, cfg.noise, rng)
