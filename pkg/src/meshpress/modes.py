"""Post-processing modes: contour trim and black-and-white silhouette.

Both reuse the K layer as the structural boundary: trim erases color ink that
lies outside the black contours, silhouette prints the object mask on all four
layers so the whole set pulls black ink.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy import ndimage

from .errors import ImageTooLarge, WrongMode
from .protocol import add_fiducials, restamp_fiducials
from .raster import MAX_DIM, BitStencil, Mode, PipelineConfig, RasterImage, StencilSet
from .separation import CHANNELS, TAG_NONE, classify, color_correct


@dataclass(frozen=True)
class RegionMask:
    """Boolean grid marking the region 4-connected to the frame border.

    bit 1 = "outside": reachable from some border pixel through non-K pixels.
    """

    bits: np.ndarray

    def __post_init__(self) -> None:
        arr = np.ascontiguousarray(self.bits, dtype=bool).copy()
        if arr.ndim != 2:
            raise ValueError(f"expected a 2-d mask, got shape {arr.shape}")
        arr.flags.writeable = False
        object.__setattr__(self, "bits", arr)

    @property
    def width(self) -> int:
        return self.bits.shape[1]

    @property
    def height(self) -> int:
        return self.bits.shape[0]


def outside_mask(k_layer: BitStencil) -> RegionMask:
    """4-connected flood fill from every border pixel whose K bit is closed.

    K-open pixels are never outside. 4-connectivity keeps thin contours
    watertight: ink bleed closes diagonal gaps on fabric anyway.
    """
    closed = ~k_layer.bits
    labels, _ = ndimage.label(closed)  # default structure is 4-connected
    border = np.concatenate([labels[0, :], labels[-1, :], labels[:, 0], labels[:, -1]])
    seeds = np.unique(border[border != 0])
    return RegionMask(np.isin(labels, seeds))


def contour_trim(stencil_set: StencilSet) -> StencilSet:
    """Erase C/M/Y ink outside the black contours; K is preserved bit-exactly.

    Only FOUR_COLOR sets are accepted. Fiducials are re-stamped afterwards so
    registration marks survive the trim.
    """
    if stencil_set.mode != Mode.FOUR_COLOR:
        raise WrongMode(f"contour_trim needs a {Mode.FOUR_COLOR.value} set, got {stencil_set.mode.value}")
    outside = outside_mask(stencil_set.layers["K"]).bits
    layers = {
        ch: BitStencil(s.bits & ~outside) if ch != "K" else s
        for ch, s in stencil_set.layers.items()
    }
    trimmed = replace(stencil_set, layers=layers, mode=Mode.CONTOUR_TRIM)
    return restamp_fiducials(trimmed)


def silhouette(img: RasterImage, cfg: PipelineConfig) -> StencilSet:
    """Build a silhouette set: the object mask, identical on all four layers.

    The object is everything the classifier does not mark as paper white,
    which reuses the background-removal rule instead of a segmentation model.
    """
    if img.width > MAX_DIM or img.height > MAX_DIM:
        raise ImageTooLarge(f"{img.width}x{img.height} exceeds the {MAX_DIM}-pixel cap")
    cls = classify(color_correct(img, cfg), cfg)
    mask = BitStencil(cls.tags != TAG_NONE)
    layers = {ch: mask for ch in CHANNELS}
    bare = StencilSet(layers=layers, mode=Mode.SILHOUETTE, fiducials=(), config_hash=cfg.digest())
    return add_fiducials(bare, cfg)
