"""Image raster container shared by every module.

Samples are stored channel-last (``H x W x C``, interleaved), always 3-D so
grayscale images carry a trailing axis of length 1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

NOMINAL_RANGES = {"unit": 1.0, "byte": 255.0}


@dataclass(frozen=True)
class Image:
    data: np.ndarray
    nominal_range: str = "unit"

    def __post_init__(self):
        data = np.asarray(self.data)
        if data.ndim == 2:
            data = data[:, :, None]
        if data.ndim != 3:
            raise ValueError(f"image data must be HxW or HxWxC, got shape {data.shape}")
        h, w, c = data.shape
        if h < 1 or w < 1:
            raise ValueError(f"image dimensions must be >= 1, got {h}x{w}")
        if c not in (1, 3):
            raise ValueError(f"image must have 1 or 3 channels, got {c}")
        if not np.issubdtype(data.dtype, np.floating):
            data = data.astype(np.float64)
        if not np.all(np.isfinite(data)):
            raise ValueError("image contains non-finite samples")
        if self.nominal_range not in NOMINAL_RANGES:
            raise ValueError(f"unknown nominal range {self.nominal_range!r}")
        object.__setattr__(self, "data", data)

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def channels(self) -> int:
        return self.data.shape[2]

    @property
    def dims(self) -> tuple[int, int]:
        return self.data.shape[0], self.data.shape[1]

    @property
    def peak(self) -> float:
        """Upper end of the nominal range (1.0 or 255.0)."""
        return NOMINAL_RANGES[self.nominal_range]

    def with_data(self, data: np.ndarray) -> "Image":
        return Image(data, self.nominal_range)

    def clamped(self) -> "Image":
        return self.with_data(np.clip(self.data, 0.0, self.peak))
