"""Stochastic frequency masking of images."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import mask as masklib
from .image import Image
from .mask import CENTRAL, TARGETED, Mask, MaskSpec
from .transform import dct2_forward, dct2_inverse


@dataclass(frozen=True)
class SfmConfig:
    """SFM sampling settings.

    For targeted mode, `r_center` and `sigma_delta` are fractions of
    ``r_max`` so one config serves every image size. They default to
    0.85 and 0.15.
    """

    mode: str = CENTRAL
    rate: float = 0.5
    r_center: Optional[float] = None
    sigma_delta: Optional[float] = None
    clamp_output: bool = False

    def __post_init__(self):
        if self.mode not in (CENTRAL, TARGETED):
            raise ValueError(f"unknown SFM mode {self.mode!r}")
        if not 0.0 <= self.rate <= 1.0:
            raise ValueError(f"rate must lie in [0, 1], got {self.rate}")
        if self.mode == TARGETED:
            if self.r_center is None:
                object.__setattr__(self, "r_center", masklib.TARGETED_CENTER_FRACTION)
            if self.sigma_delta is None:
                object.__setattr__(self, "sigma_delta", masklib.TARGETED_SIGMA_FRACTION)
        elif self.r_center is not None or self.sigma_delta is not None:
            raise ValueError("r_center / sigma_delta only apply to targeted mode")

    def sample(self, dims, rng: np.random.Generator) -> MaskSpec:
        if self.mode == CENTRAL:
            return masklib.sample_central(dims, rng)
        r_max = masklib.max_radius(dims)
        return masklib.sample_targeted(dims, self.r_center * r_max, self.sigma_delta * r_max, rng)

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "rate": self.rate,
            "r_center": self.r_center,
            "sigma_delta": self.sigma_delta,
            "clamp_output": self.clamp_output,
        }


def apply_sfm(img: Image, spec: MaskSpec) -> tuple[Image, Mask]:
    """Zero the band described by `spec` in every channel's DCT and transform back."""
    mask = masklib.realize(spec, img.dims)
    spectrum = dct2_forward(img)
    masked = spectrum.with_coeffs(spectrum.coeffs * mask.bits[:, :, None])
    return dct2_inverse(masked), mask


def maybe_apply_sfm(
    img: Image, cfg: SfmConfig, rng: np.random.Generator
) -> tuple[Image, bool, Optional[MaskSpec]]:
    """Apply SFM with probability ``cfg.rate``.

    Every call consumes one uniform gate draw followed by the two draws of
    a mask sample, whether or not masking fires, so the stream position
    afterwards never depends on the gate outcome.
    """
    gate = rng.uniform()
    spec = cfg.sample(img.dims, rng)
    if gate >= cfg.rate:
        return img, False, None
    out, _ = apply_sfm(img, spec)
    if cfg.clamp_output:
        out = out.clamped()
    return out, True, spec
