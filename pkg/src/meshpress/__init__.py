"""meshpress: photo -> four 1-bit silkscreen stencils -> thermal-printer bytes.

The pipeline turns a photograph into disjoint C/M/Y/K mesh stencils, plans
the layer print order, and streams bit-exact ESC/POS raster frames, exposed
as a library, a CLI (`meshpress separate`), and an HTTP job service with a
stub stylizer.
"""

from .errors import (
    BadConfig,
    BadImage,
    DeviceWriteError,
    ImageTooLarge,
    MeshpressError,
    NotReady,
    StencilTooWide,
    StylizerError,
    TextTooLong,
    WrongMode,
)
from .modes import RegionMask, contour_trim, outside_mask, silhouette
from .protocol import (
    FONT_5X7,
    PrintPlan,
    RasterFrame,
    Strategy,
    add_fiducials,
    pack_raster,
    plan_order,
    render_error_stencil,
    unpack_raster,
)
from .raster import (
    CHANNELS,
    BitStencil,
    Fiducial,
    Mode,
    PipelineConfig,
    RasterImage,
    StencilSet,
    image_to_png,
    ink_cmy,
    load_png,
    luma,
    stencil_from_png,
    stencil_to_png,
)
from .separation import BAYER8, ClassifiedImage, PixelClass, classify, color_correct, dither, separate
from .stylizer import StylizerClient, posterize_png

__version__ = "0.1.0"

__all__ = [
    "BAYER8",
    "BadConfig",
    "BadImage",
    "BitStencil",
    "CHANNELS",
    "ClassifiedImage",
    "DeviceWriteError",
    "Fiducial",
    "FONT_5X7",
    "ImageTooLarge",
    "MeshpressError",
    "Mode",
    "NotReady",
    "PipelineConfig",
    "PixelClass",
    "PrintPlan",
    "RasterFrame",
    "RasterImage",
    "RegionMask",
    "StencilSet",
    "StencilTooWide",
    "Strategy",
    "StylizerClient",
    "StylizerError",
    "TextTooLong",
    "WrongMode",
    "add_fiducials",
    "classify",
    "color_correct",
    "contour_trim",
    "dither",
    "image_to_png",
    "ink_cmy",
    "load_png",
    "luma",
    "outside_mask",
    "pack_raster",
    "plan_order",
    "posterize_png",
    "render_error_stencil",
    "separate",
    "silhouette",
    "stencil_from_png",
    "stencil_to_png",
    "unpack_raster",
]
