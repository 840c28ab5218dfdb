"""Color separation: background removal, per-pixel ink classification, dithering.

Overlap prevention is winner-take-all: every pixel is classified into exactly
one of {none, C, M, Y, K}, so the dithered layers are disjoint by construction
(fiducial squares excepted, which are opened on all four layers on purpose).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .errors import ImageTooLarge
from .protocol import add_fiducials
from .raster import (
    CHANNELS,
    LUMA_COEFFS,
    MAX_DIM,
    BitStencil,
    Mode,
    PipelineConfig,
    RasterImage,
    StencilSet,
)

TAG_NONE, TAG_C, TAG_M, TAG_Y, TAG_K = 0, 1, 2, 3, 4

TAG_BY_CHANNEL = {"C": TAG_C, "M": TAG_M, "Y": TAG_Y, "K": TAG_K}
CHANNEL_BY_TAG = {v: k for k, v in TAG_BY_CHANNEL.items()}


def _bayer(n: int) -> np.ndarray:
    """Recursive Bayer index matrix of size n x n (n a power of two), values 0..n^2-1."""
    m = np.zeros((1, 1), dtype=np.int64)
    while m.shape[0] < n:
        m = np.block([[4 * m, 4 * m + 2], [4 * m + 3, 4 * m + 1]])
    return m


BAYER8 = _bayer(8)
BAYER8.flags.writeable = False

# Threshold at index v is (v + 0.5) / 64: density d opens the cell iff d > threshold,
# so d = k/64 opens exactly k cells per 8x8 tile.
BAYER8_THRESHOLDS = (BAYER8 + 0.5) / 64.0
BAYER8_THRESHOLDS.flags.writeable = False


class PixelClass(NamedTuple):
    """Classification of one pixel: ink channel (or None) plus ink density."""

    tag: Optional[str]
    density: float


@dataclass(frozen=True)
class ClassifiedImage:
    """Per-pixel classification grid: integer tags plus float densities.

    tags uses the TAG_* codes; density is 0 exactly where tag is TAG_NONE.
    """

    tags: np.ndarray
    density: np.ndarray

    def __post_init__(self) -> None:
        tags = np.ascontiguousarray(self.tags, dtype=np.uint8).copy()
        dens = np.ascontiguousarray(self.density, dtype=np.float64).copy()
        if tags.shape != dens.shape or tags.ndim != 2:
            raise ValueError(f"tags/density shapes differ: {tags.shape} vs {dens.shape}")
        tags.flags.writeable = False
        dens.flags.writeable = False
        object.__setattr__(self, "tags", tags)
        object.__setattr__(self, "density", dens)

    @property
    def width(self) -> int:
        return self.tags.shape[1]

    @property
    def height(self) -> int:
        return self.tags.shape[0]

    def at(self, x: int, y: int) -> PixelClass:
        tag = int(self.tags[y, x])
        return PixelClass(CHANNEL_BY_TAG.get(tag), float(self.density[y, x]))


def _rgb_to_hsv(pixels: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized RGB8 -> (hue degrees, saturation, value). Hue is 0 where undefined."""
    rgb = pixels.astype(np.float64) / 255.0
    r, g, b = rgb[..., 0], rgb[..., 1], rgb[..., 2]
    maxc = np.maximum(np.maximum(r, g), b)
    minc = np.minimum(np.minimum(r, g), b)
    delta = maxc - minc
    sat = np.where(maxc > 0, delta / np.where(maxc > 0, maxc, 1.0), 0.0)

    safe = np.where(delta > 0, delta, 1.0)
    hue_r = ((g - b) / safe) % 6.0
    hue_g = (b - r) / safe + 2.0
    hue_b = (r - g) / safe + 4.0
    hue = 60.0 * np.select([maxc == r, maxc == g], [hue_r, hue_g], default=hue_b)
    hue = np.where(delta > 0, hue, 0.0)
    return hue, sat, maxc


def _hsv_to_rgb8(hue: np.ndarray, sat: np.ndarray, val: np.ndarray) -> np.ndarray:
    """Vectorized HSV -> RGB8, rounding half up."""
    c = val * sat
    hp = hue / 60.0
    x = c * (1.0 - np.abs(hp % 2.0 - 1.0))
    sector = np.floor(hp).astype(np.int64) % 6
    zeros = np.zeros_like(c)
    r1 = np.select([sector == 0, sector == 1, sector == 2, sector == 3, sector == 4], [c, x, zeros, zeros, x], default=c)
    g1 = np.select([sector == 0, sector == 1, sector == 2, sector == 3, sector == 4], [x, c, c, x, zeros], default=zeros)
    b1 = np.select([sector == 0, sector == 1, sector == 2, sector == 3, sector == 4], [zeros, zeros, x, c, c], default=x)
    m = val - c
    rgb = np.stack([r1 + m, g1 + m, b1 + m], axis=-1)
    return np.floor(rgb * 255.0 + 0.5).clip(0, 255).astype(np.uint8)


def _luma_array(pixels: np.ndarray) -> np.ndarray:
    rgb = pixels.astype(np.float64) / 255.0
    kr, kg, kb = LUMA_COEFFS
    return kr * rgb[..., 0] + kg * rgb[..., 1] + kb * rgb[..., 2]


def color_correct(img: RasterImage, cfg: PipelineConfig) -> RasterImage:
    """Remove the warm background and boost saturation on everything else.

    A pixel is background when its hue falls in cfg.bg_hue_range, saturation
    is at most cfg.bg_sat_max, and value is at least cfg.bg_val_min; such
    pixels become white. Pixels with zero saturation have undefined hue and
    are never background. All remaining pixels get saturation * cfg.sat_gain,
    clipped to 1, and are re-quantized to RGB8 rounding half up.
    """
    hue, sat, val = _rgb_to_hsv(img.pixels)
    lo, hi = cfg.bg_hue_range
    background = (
        (sat > 0)
        & (hue >= lo)
        & (hue <= hi)
        & (sat <= cfg.bg_sat_max)
        & (val >= cfg.bg_val_min)
    )
    boosted = np.minimum(sat * cfg.sat_gain, 1.0)
    out = _hsv_to_rgb8(hue, boosted, val)
    out[background] = (255, 255, 255)
    return RasterImage(out)


def classify(img: RasterImage, cfg: PipelineConfig) -> ClassifiedImage:
    """Assign every pixel exactly one ink class, in fixed rule order.

    1. bright and neutral -> none (paper white);
    2. dark -> solid K (contours);
    3. neutral -> K at density 1 - luma (shading, dithered later);
    4. otherwise the strongest ink of C/M/Y wins (ties C over M over Y),
       unless that ink is below cfg.tau_ink, which classifies as none.
    """
    rgb = img.pixels.astype(np.float64) / 255.0
    lum = _luma_array(img.pixels)
    inks = 1.0 - rgb  # (h, w, 3) = C, M, Y
    chroma = inks.max(axis=-1) - inks.min(axis=-1)

    # Channel-major stack so argmax tie-breaking follows the C > M > Y order.
    ink_stack = np.moveaxis(inks, -1, 0)
    winner = ink_stack.argmax(axis=0)
    win_val = np.take_along_axis(ink_stack, winner[None, ...], axis=0)[0]

    white = (lum >= cfg.theta_white) & (chroma < cfg.tau_neutral)
    k_solid = ~white & (lum < cfg.theta_k)
    k_shade = ~white & ~k_solid & (chroma < cfg.tau_neutral)
    chromatic = ~white & ~k_solid & ~k_shade
    weak = chromatic & (win_val < cfg.tau_ink)
    strong = chromatic & ~weak

    tags = np.zeros(lum.shape, dtype=np.uint8)
    tags[k_solid | k_shade] = TAG_K
    tags[strong] = (winner[strong] + TAG_C).astype(np.uint8)

    density = np.zeros(lum.shape, dtype=np.float64)
    density[k_solid] = 1.0
    density[k_shade] = 1.0 - lum[k_shade]
    density[strong] = win_val[strong]
    return ClassifiedImage(tags, density)


def dither(cls: ClassifiedImage, channel: str, cfg: PipelineConfig) -> BitStencil:
    """Ordered-dither one channel of a classified image into a 1-bit stencil.

    A bit opens iff the pixel carries this channel's tag and its density
    strictly exceeds the tiled Bayer threshold (v + 0.5)/64. Density 1 always
    opens, density 0 never does.
    """
    if channel not in CHANNELS:
        raise ValueError(f"channel must be one of {CHANNELS}, got {channel!r}")
    h, w = cls.tags.shape
    reps_y = -(-h // 8)
    reps_x = -(-w // 8)
    thresholds = np.tile(BAYER8_THRESHOLDS, (reps_y, reps_x))[:h, :w]
    bits = (cls.tags == TAG_BY_CHANNEL[channel]) & (cls.density > thresholds)
    return BitStencil(bits)


def separate(img: RasterImage, cfg: PipelineConfig) -> StencilSet:
    """Full four-color separation: correct, classify, dither, stamp fiducials.

    Deterministic: identical (img, cfg) yields bit-identical stencils.
    """
    if img.width > MAX_DIM or img.height > MAX_DIM:
        raise ImageTooLarge(f"{img.width}x{img.height} exceeds the {MAX_DIM}-pixel cap")
    cls = classify(color_correct(img, cfg), cfg)
    layers = {ch: dither(cls, ch, cfg) for ch in CHANNELS}
    bare = StencilSet(layers=layers, mode=Mode.FOUR_COLOR, fiducials=(), config_hash=cfg.digest())
    return add_fiducials(bare, cfg)
