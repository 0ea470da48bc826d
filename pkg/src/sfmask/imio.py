"""Image file reading and writing.

Integer files are rescaled into the requested nominal range on load
(``byte`` -> 0..255, ``unit`` -> 0..1). ``.npy`` files hold raw float
samples and are stored bit-exactly.
"""

from __future__ import annotations

import os

import cv2
import numpy as np

from .image import Image

# format name -> (extension, bit depth; None for raw float)
FORMATS = {
    "png8": (".png", 8),
    "png16": (".png", 16),
    "pgm": (".pgm", 8),
    "ppm": (".ppm", 8),
    "npy": (".npy", None),
}
IMAGE_EXTENSIONS = (".png", ".pgm", ".ppm", ".pnm", ".npy", ".bmp", ".tif", ".tiff", ".jpg", ".jpeg")


class DecodeError(Exception):
    def __init__(self, path, reason):
        super().__init__(f"{path}: {reason}")
        self.path = str(path)
        self.reason = reason


def load_image(path, nominal_range: str = "byte") -> Image:
    path = os.fspath(path)
    if path.lower().endswith(".npy"):
        try:
            data = np.load(path, allow_pickle=False)
        except (OSError, ValueError, EOFError) as e:
            raise DecodeError(path, f"cannot read array: {e}") from None
        if not np.issubdtype(data.dtype, np.floating):
            raise DecodeError(path, f"expected float samples, got {data.dtype}")
        try:
            return Image(data, nominal_range)
        except ValueError as e:
            raise DecodeError(path, str(e)) from None

    if not os.path.isfile(path):
        raise DecodeError(path, "no such file")
    raw = cv2.imread(path, cv2.IMREAD_UNCHANGED)
    if raw is None:
        raise DecodeError(path, "not a decodable image")
    if raw.dtype == np.uint8:
        maxval = 255.0
    elif raw.dtype == np.uint16:
        maxval = 65535.0
    else:
        raise DecodeError(path, f"unsupported sample type {raw.dtype}")
    if raw.ndim == 3:
        if raw.shape[2] == 4:
            raw = cv2.cvtColor(raw, cv2.COLOR_BGRA2RGB)
        elif raw.shape[2] == 3:
            raw = cv2.cvtColor(raw, cv2.COLOR_BGR2RGB)
        elif raw.shape[2] == 2:
            raw = raw[:, :, :1]
    img = Image(raw.astype(np.float64), nominal_range)
    return img.with_data(img.data * (img.peak / maxval))


def save_image(img: Image, path, fmt: str) -> bool:
    """Write `img` in format `fmt`; returns True if samples had to be clamped."""
    if fmt not in FORMATS:
        raise ValueError(f"unknown image format {fmt!r}")
    path = os.fspath(path)
    _, depth = FORMATS[fmt]
    if depth is None:
        np.save(path, img.data, allow_pickle=False)
        return False
    if fmt == "pgm" and img.channels != 1:
        raise ValueError("pgm holds single-channel images only")
    if fmt == "ppm" and img.channels != 3:
        raise ValueError("ppm holds RGB images only")
    maxval = 255.0 if depth == 8 else 65535.0
    scaled = img.data * (maxval / img.peak)
    clamped = bool(np.any(scaled < 0) or np.any(scaled > maxval))
    q = np.rint(np.clip(scaled, 0, maxval)).astype(np.uint8 if depth == 8 else np.uint16)
    q = q[:, :, 0] if img.channels == 1 else cv2.cvtColor(q, cv2.COLOR_RGB2BGR)
    if not cv2.imwrite(path, q):
        raise OSError(f"could not write {path}")
    return clamped


def output_name(stem: str, fmt: str) -> str:
    return stem + FORMATS[fmt][0]
