"""Stochastic frequency masking (SFM) for training image restoration networks."""

__version__ = "0.1.0"

from .image import Image
from .mask import Mask, MaskSpec, band_mask_probability, realize, sample_central, sample_targeted
from .sfm import SfmConfig, apply_sfm, maybe_apply_sfm
from .transform import Spectrum, dct2_forward, dct2_forward_naive, dct2_inverse

__all__ = [
    "Image",
    "Mask",
    "MaskSpec",
    "SfmConfig",
    "Spectrum",
    "apply_sfm",
    "band_mask_probability",
    "dct2_forward",
    "dct2_forward_naive",
    "dct2_inverse",
    "maybe_apply_sfm",
    "realize",
    "sample_central",
    "sample_targeted",
]
