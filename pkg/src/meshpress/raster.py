"""Core value types: images, 1-bit stencils, stencil sets, and pipeline config.

Conventions fixed project-wide:
  * images are row-major RGB8, shape (height, width, 3);
  * stencil bit 1 = open mesh (ink passes through), 0 = closed;
  * all types are immutable after construction and safe to share across
    threads; every operation on them is a pure function.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field, replace
from enum import Enum
from io import BytesIO
from typing import Mapping

import numpy as np
from PIL import Image, ImageOps, UnidentifiedImageError

from .errors import BadConfig, BadImage, ImageTooLarge

MAX_DIM = 4096

CHANNELS = ("C", "M", "Y", "K")

# Rec. 709 luma coefficients; standard for sRGB-origin photos.
LUMA_COEFFS = (0.2126, 0.7152, 0.0722)


class Mode(str, Enum):
    """Render mode of a stencil set."""

    FOUR_COLOR = "fourcolor"
    CONTOUR_TRIM = "trim"
    SILHOUETTE = "silhouette"


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class RasterImage:
    """A width x height grid of RGB8 pixels, the pipeline's continuous-tone currency.

    Dimensions are validated at construction: no zero-dimension image exists,
    and anything over 4096 pixels on a side is rejected rather than downscaled.
    """

    pixels: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.pixels)
        if arr.ndim != 3 or arr.shape[2] != 3 or arr.dtype != np.uint8:
            raise BadImage(f"expected (h, w, 3) uint8 pixel grid, got {arr.shape} {arr.dtype}")
        h, w = arr.shape[:2]
        if h < 1 or w < 1:
            raise BadImage("zero-dimension images are not allowed")
        if h > MAX_DIM or w > MAX_DIM:
            raise ImageTooLarge(f"{w}x{h} exceeds the {MAX_DIM}-pixel cap")
        object.__setattr__(self, "pixels", _freeze(np.ascontiguousarray(arr).copy()))

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]


@dataclass(frozen=True)
class BitStencil:
    """A width x height 1-bit grid. Bit 1 = open mesh, ink passes through."""

    bits: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.bits)
        if arr.ndim != 2:
            raise ValueError(f"expected a 2-d bit grid, got shape {arr.shape}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError("zero-dimension stencils are not allowed")
        object.__setattr__(self, "bits", _freeze(np.ascontiguousarray(arr, dtype=bool).copy()))

    @property
    def width(self) -> int:
        return self.bits.shape[1]

    @property
    def height(self) -> int:
        return self.bits.shape[0]

    @property
    def open_count(self) -> int:
        return int(np.count_nonzero(self.bits))


@dataclass(frozen=True)
class Fiducial:
    """One corner registration square: top-left position plus side length, pixels."""

    x: int
    y: int
    side: int


@dataclass(frozen=True)
class StencilSet:
    """The four C/M/Y/K stencils of one job plus mode and registration metadata.

    All four layers share identical dimensions. Outside fiducial squares, at
    most one layer is open per pixel in FOUR_COLOR and CONTOUR_TRIM modes;
    in SILHOUETTE mode all four layers are bit-identical.
    """

    layers: Mapping[str, BitStencil]
    mode: Mode
    fiducials: tuple[Fiducial, ...]
    config_hash: str

    def __post_init__(self) -> None:
        if set(self.layers) != set(CHANNELS):
            raise ValueError(f"layers must be keyed exactly {CHANNELS}, got {sorted(self.layers)}")
        dims = {(s.width, s.height) for s in self.layers.values()}
        if len(dims) != 1:
            raise ValueError(f"layer dimensions differ: {sorted(dims)}")
        object.__setattr__(self, "layers", dict(self.layers))
        object.__setattr__(self, "fiducials", tuple(self.fiducials))

    @property
    def width(self) -> int:
        return self.layers["C"].width

    @property
    def height(self) -> int:
        return self.layers["C"].height

    @property
    def registered(self) -> bool:
        """False when fiducials were omitted because the set was too small."""
        return bool(self.fiducials)

    def fiducial_mask(self) -> np.ndarray:
        """Boolean (h, w) mask of pixels covered by fiducial squares."""
        mask = np.zeros((self.height, self.width), dtype=bool)
        for f in self.fiducials:
            mask[f.y : f.y + f.side, f.x : f.x + f.side] = True
        return mask


_FRACTION_FIELDS = ("bg_sat_max", "bg_val_min", "theta_k", "theta_white", "tau_neutral", "tau_ink")


@dataclass(frozen=True)
class PipelineConfig:
    """Every threshold the separation pipeline uses, versioned and hashable.

    Defaults are deliberate choices, not constants: the background hue band
    targets warm browns, theta_k/theta_white bracket the binarization band,
    and tau_ink suppresses speckle from near-white chromatic noise.
    """

    bg_hue_range: tuple[float, float] = (20.0, 50.0)
    bg_sat_max: float = 0.5
    bg_val_min: float = 0.5
    sat_gain: float = 1.3
    theta_k: float = 0.35
    theta_white: float = 0.95
    tau_neutral: float = 0.08
    tau_ink: float = 0.10
    dither_matrix: str = "bayer8"
    fiducial_margin: int = 8
    fiducial_side: int = 6

    def __post_init__(self) -> None:
        try:
            lo, hi = (float(v) for v in self.bg_hue_range)
        except (TypeError, ValueError) as exc:
            raise BadConfig(f"bg_hue_range must be a (low, high) pair: {exc}") from None
        object.__setattr__(self, "bg_hue_range", (lo, hi))
        if not (0.0 <= lo <= hi <= 360.0):
            raise BadConfig(f"bg_hue_range must satisfy 0 <= low <= high <= 360, got {lo}..{hi}")
        for name in _FRACTION_FIELDS:
            v = getattr(self, name)
            if not isinstance(v, (int, float)) or isinstance(v, bool) or not 0.0 <= v <= 1.0:
                raise BadConfig(f"{name} must be a fraction in [0, 1], got {v!r}")
            object.__setattr__(self, name, float(v))
        if not (0.0 < self.theta_k < self.theta_white <= 1.0):
            raise BadConfig(
                f"need 0 < theta_k < theta_white <= 1, got {self.theta_k}, {self.theta_white}"
            )
        if not isinstance(self.sat_gain, (int, float)) or isinstance(self.sat_gain, bool) or self.sat_gain < 1.0:
            raise BadConfig(f"sat_gain must be >= 1, got {self.sat_gain!r}")
        object.__setattr__(self, "sat_gain", float(self.sat_gain))
        if self.dither_matrix != "bayer8":
            raise BadConfig(f"dither_matrix is fixed to 'bayer8', got {self.dither_matrix!r}")
        for name in ("fiducial_margin", "fiducial_side"):
            v = getattr(self, name)
            if not isinstance(v, int) or isinstance(v, bool) or v < 0:
                raise BadConfig(f"{name} must be a non-negative integer, got {v!r}")
        if self.fiducial_side < 1:
            raise BadConfig("fiducial_side must be at least 1 pixel")

    def canonical(self) -> str:
        """Canonical text form; equal configs serialize identically."""
        items = {
            "bg_hue_range": f"{self.bg_hue_range[0]!r},{self.bg_hue_range[1]!r}",
            "bg_sat_max": repr(self.bg_sat_max),
            "bg_val_min": repr(self.bg_val_min),
            "sat_gain": repr(self.sat_gain),
            "theta_k": repr(self.theta_k),
            "theta_white": repr(self.theta_white),
            "tau_neutral": repr(self.tau_neutral),
            "tau_ink": repr(self.tau_ink),
            "dither_matrix": self.dither_matrix,
            "fiducial_margin": str(self.fiducial_margin),
            "fiducial_side": str(self.fiducial_side),
        }
        return "\n".join(f"{k}={items[k]}" for k in sorted(items))

    def digest(self) -> str:
        return hashlib.sha256(self.canonical().encode("utf-8")).hexdigest()

    def with_overrides(self, overrides: Mapping[str, object] | None) -> "PipelineConfig":
        """Apply a key/value override mapping, rejecting unknown keys."""
        if not overrides:
            return self
        known = {f for f in self.__dataclass_fields__}
        unknown = set(overrides) - known
        if unknown:
            raise BadConfig(f"unknown config keys: {sorted(unknown)}")
        fixed = dict(overrides)
        if "bg_hue_range" in fixed:
            v = fixed["bg_hue_range"]
            if not isinstance(v, (list, tuple)) or len(v) != 2:
                raise BadConfig(f"bg_hue_range must be a 2-element list, got {v!r}")
            fixed["bg_hue_range"] = tuple(v)
        for name in ("fiducial_margin", "fiducial_side"):
            if name in fixed and isinstance(fixed[name], float) and float(fixed[name]).is_integer():
                fixed[name] = int(fixed[name])
        return replace(self, **fixed)


def luma(pixel: tuple[int, int, int]) -> float:
    """Rec. 709 luma of one RGB8 pixel, as a fraction in [0, 1]."""
    r, g, b = pixel
    kr, kg, kb = LUMA_COEFFS
    return kr * r / 255.0 + kg * g / 255.0 + kb * b / 255.0


def ink_cmy(pixel: tuple[int, int, int]) -> tuple[float, float, float]:
    """Complement ink model: per-channel ink fraction needed to render the pixel."""
    r, g, b = pixel
    return (1.0 - r / 255.0, 1.0 - g / 255.0, 1.0 - b / 255.0)


def load_png(data: bytes) -> RasterImage:
    """Decode PNG bytes into a RasterImage.

    PNG is the only accepted format. The EXIF orientation tag is applied;
    alpha, if present, is composited over white. Anything undecodable raises
    BadImage; oversized images raise ImageTooLarge.
    """
    try:
        img = Image.open(BytesIO(data))
        img.load()
    except (UnidentifiedImageError, OSError, ValueError) as exc:
        raise BadImage(f"not a decodable image: {exc}") from None
    if img.format != "PNG":
        raise BadImage(f"only PNG input is accepted, got {img.format}")
    img = ImageOps.exif_transpose(img)
    if img.mode in ("RGBA", "LA", "PA") or (img.mode == "P" and "transparency" in img.info):
        rgba = img.convert("RGBA")
        background = Image.new("RGBA", rgba.size, (255, 255, 255, 255))
        img = Image.alpha_composite(background, rgba)
    img = img.convert("RGB")
    return RasterImage(np.asarray(img, dtype=np.uint8))


def image_to_png(img: RasterImage) -> bytes:
    """Encode a RasterImage as deterministic PNG bytes."""
    buf = BytesIO()
    Image.fromarray(img.pixels, "RGB").save(buf, format="PNG")
    return buf.getvalue()


def stencil_to_png(stencil: BitStencil) -> bytes:
    """Export a stencil as a 1-bit PNG; black = open mesh."""
    gray = np.where(stencil.bits, 0, 255).astype(np.uint8)
    img = Image.fromarray(gray, "L").convert("1", dither=Image.NONE)
    buf = BytesIO()
    img.save(buf, format="PNG")
    return buf.getvalue()


def stencil_from_png(data: bytes) -> BitStencil:
    """Load a stencil PNG back into bits; any pixel darker than mid-gray is open."""
    try:
        img = Image.open(BytesIO(data))
        img.load()
    except (UnidentifiedImageError, OSError, ValueError) as exc:
        raise BadImage(f"not a decodable stencil PNG: {exc}") from None
    arr = np.asarray(img.convert("L"))
    return BitStencil(arr < 128)
