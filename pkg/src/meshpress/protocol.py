"""Thermal-printer wire format, registration fiducials, print order, error codes.

Wire format is the ESC/POS "GS v 0" raster image command, one frame per
stencil: 0x1D 0x76 0x30 0x00, xL xH (bytes per row, little-endian), yL yH
(height, little-endian), then rows top to bottom packed MSB-first with zero
padding. Open bit = 1 = printed dot.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from .errors import StencilTooWide, TextTooLong
from .raster import CHANNELS, BitStencil, Fiducial, PipelineConfig, StencilSet

GS_V0 = b"\x1d\x76\x30\x00"

# Print-and-feed issued after every frame so layers separate on the roll.
FEED = b"\x1b\x64\x04"

HEADER_LEN = 8


class Strategy(str, Enum):
    """Layer ordering strategy for a print run."""

    CMYK = "cmyk"
    AREA_DESC_BLACK_LAST = "area"


@dataclass(frozen=True)
class RasterFrame:
    """One wire-ready GS v 0 frame: header plus packed rows."""

    data: bytes

    def __post_init__(self) -> None:
        if len(self.data) < HEADER_LEN or self.data[:4] != GS_V0:
            raise ValueError("not a GS v 0 raster frame")

    @property
    def bytes_per_row(self) -> int:
        return self.data[4] | (self.data[5] << 8)

    @property
    def height(self) -> int:
        return self.data[6] | (self.data[7] << 8)


@dataclass(frozen=True)
class PrintPlan:
    """A print order: a permutation of the four layers with K always last."""

    order: tuple[str, ...]
    strategy: Strategy

    def __post_init__(self) -> None:
        if sorted(self.order) != sorted(CHANNELS):
            raise ValueError(f"order must be a permutation of {CHANNELS}, got {self.order}")
        if self.order[-1] != "K":
            raise ValueError("K must be printed last")
        object.__setattr__(self, "order", tuple(self.order))


def pack_raster(stencil: BitStencil) -> RasterFrame:
    """Encode a stencil as one GS v 0 frame.

    Frame length is exactly 8 + ceil(width/8) * height bytes.
    """
    bpr = -(-stencil.width // 8)
    if bpr > 0xFFFF:
        raise StencilTooWide(f"{stencil.width} px packs to {bpr} bytes per row, max 65535")
    rows = np.packbits(stencil.bits, axis=1)
    header = GS_V0 + bytes((bpr & 0xFF, bpr >> 8, stencil.height & 0xFF, stencil.height >> 8))
    return RasterFrame(header + rows.tobytes())


def unpack_raster(frame: RasterFrame, width: int | None = None) -> BitStencil:
    """Decode a GS v 0 frame back into a stencil.

    The wire format carries bytes-per-row, not pixel width; pass the original
    width to recover stencils whose width is not a byte multiple. Padding bits
    must be zero.
    """
    bpr = frame.bytes_per_row
    height = frame.height
    body = frame.data[HEADER_LEN:]
    if len(body) != bpr * height:
        raise ValueError(f"frame body is {len(body)} bytes, header says {bpr * height}")
    if width is None:
        width = bpr * 8
    if -(-width // 8) != bpr:
        raise ValueError(f"width {width} does not pack to {bpr} bytes per row")
    rows = np.frombuffer(body, dtype=np.uint8).reshape(height, bpr)
    bits = np.unpackbits(rows, axis=1).astype(bool)
    if bits[:, width:].any():
        raise ValueError("nonzero padding bits in raster frame")
    return BitStencil(bits[:, :width])


def add_fiducials(stencil_set: StencilSet, cfg: PipelineConfig) -> StencilSet:
    """Open identical corner registration squares on all four layers.

    A fiducial_side square is opened at each corner, inset by fiducial_margin.
    If the set is too small to hold four non-overlapping squares the bits are
    left untouched and the set comes back unregistered (empty fiducials) --
    the one recoverable way to report ImageTooSmall without losing the job.
    Idempotent: re-stamping an already stamped set changes nothing.
    """
    margin, side = cfg.fiducial_margin, cfg.fiducial_side
    w, h = stencil_set.width, stencil_set.height
    if w < 2 * (margin + side) or h < 2 * (margin + side):
        return replace(stencil_set, fiducials=())
    fiducials = (
        Fiducial(margin, margin, side),
        Fiducial(w - margin - side, margin, side),
        Fiducial(margin, h - margin - side, side),
        Fiducial(w - margin - side, h - margin - side, side),
    )
    square = np.zeros((h, w), dtype=bool)
    for f in fiducials:
        square[f.y : f.y + f.side, f.x : f.x + f.side] = True
    layers = {ch: BitStencil(s.bits | square) for ch, s in stencil_set.layers.items()}
    return replace(stencil_set, layers=layers, fiducials=fiducials)


def restamp_fiducials(stencil_set: StencilSet) -> StencilSet:
    """Re-open the squares recorded in the set's own fiducial metadata."""
    if not stencil_set.fiducials:
        return stencil_set
    square = stencil_set.fiducial_mask()
    layers = {ch: BitStencil(s.bits | square) for ch, s in stencil_set.layers.items()}
    return replace(stencil_set, layers=layers)


def plan_order(stencil_set: StencilSet, strategy: Strategy) -> PrintPlan:
    """Plan the layer print order.

    CMYK is the canonical order. AREA_DESC_BLACK_LAST prints C/M/Y by
    descending open-bit count (ties keep C, M, Y order) to limit misalignment,
    but K always goes last: it carries contours and shadows, and printing it
    last sharpens the image.
    """
    if strategy == Strategy.CMYK:
        return PrintPlan(order=tuple(CHANNELS), strategy=strategy)
    counts = {ch: stencil_set.layers[ch].open_count for ch in ("C", "M", "Y")}
    colors = sorted(("C", "M", "Y"), key=lambda ch: -counts[ch])
    return PrintPlan(order=(*colors, "K"), strategy=strategy)


# 5x7 bitmap font for error-code stencils; '#' = open dot. Glyphs follow the
# classic dot-matrix character set. Codes render with 1-pixel letter spacing.
FONT_5X7: dict[str, tuple[str, ...]] = {
    " ": (".....", ".....", ".....", ".....", ".....", ".....", "....."),
    "-": (".....", ".....", ".....", "#####", ".....", ".....", "....."),
    "?": (".###.", "#...#", "....#", "..##.", "..#..", ".....", "..#.."),
    "0": (".###.", "#...#", "#..##", "#.#.#", "##..#", "#...#", ".###."),
    "1": ("..#..", ".##..", "..#..", "..#..", "..#..", "..#..", ".###."),
    "2": (".###.", "#...#", "....#", "...#.", "..#..", ".#...", "#####"),
    "3": ("#####", "...#.", "..#..", "...#.", "....#", "#...#", ".###."),
    "4": ("...#.", "..##.", ".#.#.", "#..#.", "#####", "...#.", "...#."),
    "5": ("#####", "#....", "####.", "....#", "....#", "#...#", ".###."),
    "6": ("..##.", ".#...", "#....", "####.", "#...#", "#...#", ".###."),
    "7": ("#####", "....#", "...#.", "..#..", ".#...", ".#...", ".#..."),
    "8": (".###.", "#...#", "#...#", ".###.", "#...#", "#...#", ".###."),
    "9": (".###.", "#...#", "#...#", ".####", "....#", "...#.", ".##.."),
    "A": (".###.", "#...#", "#...#", "#####", "#...#", "#...#", "#...#"),
    "B": ("####.", "#...#", "#...#", "####.", "#...#", "#...#", "####."),
    "C": (".###.", "#...#", "#....", "#....", "#....", "#...#", ".###."),
    "D": ("###..", "#..#.", "#...#", "#...#", "#...#", "#..#.", "###.."),
    "E": ("#####", "#....", "#....", "####.", "#....", "#....", "#####"),
    "F": ("#####", "#....", "#....", "####.", "#....", "#....", "#...."),
    "G": (".###.", "#...#", "#....", "#.###", "#...#", "#...#", ".####"),
    "H": ("#...#", "#...#", "#...#", "#####", "#...#", "#...#", "#...#"),
    "I": (".###.", "..#..", "..#..", "..#..", "..#..", "..#..", ".###."),
    "J": ("..###", "...#.", "...#.", "...#.", "...#.", "#..#.", ".##.."),
    "K": ("#...#", "#..#.", "#.#..", "##...", "#.#..", "#..#.", "#...#"),
    "L": ("#....", "#....", "#....", "#....", "#....", "#....", "#####"),
    "M": ("#...#", "##.##", "#.#.#", "#.#.#", "#...#", "#...#", "#...#"),
    "N": ("#...#", "#...#", "##..#", "#.#.#", "#..##", "#...#", "#...#"),
    "O": (".###.", "#...#", "#...#", "#...#", "#...#", "#...#", ".###."),
    "P": ("####.", "#...#", "#...#", "####.", "#....", "#....", "#...."),
    "Q": (".###.", "#...#", "#...#", "#...#", "#.#.#", "#..#.", ".##.#"),
    "R": ("####.", "#...#", "#...#", "####.", "#.#..", "#..#.", "#...#"),
    "S": (".####", "#....", "#....", ".###.", "....#", "....#", "####."),
    "T": ("#####", "..#..", "..#..", "..#..", "..#..", "..#..", "..#.."),
    "U": ("#...#", "#...#", "#...#", "#...#", "#...#", "#...#", ".###."),
    "V": ("#...#", "#...#", "#...#", "#...#", "#...#", ".#.#.", "..#.."),
    "W": ("#...#", "#...#", "#...#", "#.#.#", "#.#.#", "##.##", "#...#"),
    "X": ("#...#", "#...#", ".#.#.", "..#..", ".#.#.", "#...#", "#...#"),
    "Y": ("#...#", "#...#", ".#.#.", "..#..", "..#..", "..#..", "..#.."),
    "Z": ("#####", "....#", "...#.", "..#..", ".#...", "#....", "#####"),
}

GLYPH_W, GLYPH_H, GLYPH_SPACING = 5, 7, 1


def glyph_bits(ch: str) -> np.ndarray:
    """(7, 5) boolean dot grid for one character; unknown characters render '?'."""
    rows = FONT_5X7.get(ch, FONT_5X7["?"])
    return np.array([[c == "#" for c in row] for row in rows], dtype=bool)


def render_error_stencil(code: str, width: int, height: int) -> BitStencil:
    """Render a short error code as an open-dot stencil, centered.

    Codes are at most 16 characters and need width >= 6 * len(code) and
    height >= 8; otherwise TextTooLong. Deterministic per (code, width,
    height) so a reprinted error mesh is bit-identical.
    """
    if len(code) > 16:
        raise TextTooLong(f"error codes are at most 16 characters, got {len(code)}")
    if width < (GLYPH_W + GLYPH_SPACING) * len(code) or height < 8:
        raise TextTooLong(f"{code!r} does not fit a {width}x{height} stencil")
    bits = np.zeros((height, width), dtype=bool)
    if code:
        text_w = (GLYPH_W + GLYPH_SPACING) * len(code) - GLYPH_SPACING
        x0 = (width - text_w) // 2
        y0 = (height - GLYPH_H) // 2
        for i, ch in enumerate(code):
            x = x0 + i * (GLYPH_W + GLYPH_SPACING)
            bits[y0 : y0 + GLYPH_H, x : x + GLYPH_W] = glyph_bits(ch)
    return BitStencil(bits)
