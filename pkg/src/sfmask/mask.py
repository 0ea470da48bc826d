"""Quarter-annulus masks over the DCT coefficient grid.

Coefficient ``(u, v)`` sits at radius ``sqrt(u^2 + v^2)`` measured in index
units from the DC corner. A mask zeroes every coefficient whose radius lies
in the half-open interval ``[r_inner, r_outer)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

CENTRAL = "central"
TARGETED = "targeted"

# denoising defaults, as fractions of r_max
TARGETED_CENTER_FRACTION = 0.85
TARGETED_SIGMA_FRACTION = 0.15


def max_radius(dims: tuple[int, int]) -> float:
    a, b = _check_dims(dims)
    return math.hypot(a, b)


def _check_dims(dims):
    a, b = int(dims[0]), int(dims[1])
    if a < 1 or b < 1:
        raise ValueError(f"dims must be >= 1, got {dims}")
    return a, b


@dataclass(frozen=True)
class MaskSpec:
    mode: str
    r_inner: float
    r_outer: float
    r_max: float
    r_center: Optional[float] = None
    sigma_delta: Optional[float] = None

    def __post_init__(self):
        if self.mode not in (CENTRAL, TARGETED):
            raise ValueError(f"unknown mask mode {self.mode!r}")
        if not 0.0 <= self.r_inner <= self.r_outer:
            raise ValueError(f"need 0 <= r_inner <= r_outer, got {self.r_inner}, {self.r_outer}")
        if self.mode == TARGETED:
            if self.r_center is None or self.sigma_delta is None:
                raise ValueError("targeted spec needs r_center and sigma_delta")
            if not self.r_inner <= self.r_center <= self.r_outer:
                raise ValueError("targeted spec must contain r_center")

    def masks_radius(self, r):
        """True where radius `r` falls inside the masked band."""
        r = np.asarray(r)
        return (r >= self.r_inner) & (r < self.r_outer)

    def to_dict(self) -> dict:
        d = {"mode": self.mode, "r_inner": self.r_inner, "r_outer": self.r_outer, "r_max": self.r_max}
        if self.mode == TARGETED:
            d["r_center"] = self.r_center
            d["sigma_delta"] = self.sigma_delta
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "MaskSpec":
        return cls(
            d["mode"], float(d["r_inner"]), float(d["r_outer"]), float(d["r_max"]),
            d.get("r_center"), d.get("sigma_delta"),
        )


@dataclass(frozen=True)
class Mask:
    """Binary keep-mask; 1 keeps a coefficient, 0 removes it."""

    bits: np.ndarray

    @property
    def height(self) -> int:
        return self.bits.shape[0]

    @property
    def width(self) -> int:
        return self.bits.shape[1]

    @property
    def masked_fraction(self) -> float:
        return float(1.0 - self.bits.mean())


def radius_grid(dims: tuple[int, int]) -> np.ndarray:
    a, b = _check_dims(dims)
    u = np.arange(a, dtype=np.float64)[:, None]
    v = np.arange(b, dtype=np.float64)[None, :]
    return np.sqrt(u * u + v * v)


def sample_central(dims: tuple[int, int], rng: np.random.Generator) -> MaskSpec:
    """Draw both radii uniformly on ``[0, r_max]`` and order them.

    Consumes exactly two uniform draws from `rng`.
    """
    r_max = max_radius(dims)
    r1, r2 = rng.uniform(0.0, r_max, size=2)
    if r1 > r2:
        r1, r2 = r2, r1
    return MaskSpec(CENTRAL, float(r1), float(r2), r_max)


def sample_targeted(
    dims: tuple[int, int],
    r_center: float,
    sigma_delta: float,
    rng: np.random.Generator,
) -> MaskSpec:
    """Draw a band around `r_center` with half-normal extents on each side.

    The inner and outer offsets are ``|N(0, sigma_delta^2)|`` draws (two
    normal draws, inner first). The inner limit is clipped at 0 and the outer
    limit at ``r_max * sqrt(2)``.
    """
    r_max = max_radius(dims)
    if not 0.0 <= r_center <= r_max:
        raise ValueError(f"r_center must lie in [0, {r_max}], got {r_center}")
    if sigma_delta <= 0:
        raise ValueError(f"sigma_delta must be > 0, got {sigma_delta}")
    d_in, d_out = np.abs(rng.normal(0.0, sigma_delta, size=2))
    r_inner = max(0.0, r_center - float(d_in))
    r_outer = min(r_max * math.sqrt(2.0), r_center + float(d_out))
    return MaskSpec(TARGETED, r_inner, r_outer, r_max, float(r_center), float(sigma_delta))


def realize(spec: MaskSpec, dims: tuple[int, int]) -> Mask:
    if not math.isclose(spec.r_max, max_radius(dims), rel_tol=1e-12):
        raise ValueError(f"spec r_max {spec.r_max} does not match dims {tuple(dims)}")
    masked = spec.masks_radius(radius_grid(dims))
    return Mask((~masked).astype(np.uint8))


def band_mask_probability(r: float, r_max: float) -> float:
    """Probability that radius `r` is masked under central-mode sampling."""
    if r_max <= 0 or not 0.0 <= r <= r_max:
        raise ValueError(f"r must lie in [0, r_max], got r={r}, r_max={r_max}")
    t = r / r_max
    return 2.0 * (t - t * t)


def empirical_mask_frequency(specs, radii) -> np.ndarray:
    """Fraction of `specs` masking each radius in `radii`."""
    inner = np.array([s.r_inner for s in specs])[:, None]
    outer = np.array([s.r_outer for s in specs])[:, None]
    r = np.asarray(radii, dtype=np.float64)[None, :]
    return ((r >= inner) & (r < outer)).mean(axis=0)
