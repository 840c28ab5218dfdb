#!/usr/bin/env python3
"""Walk one synthetic photo through all three render modes.

Builds a portrait-like test image, separates it into C/M/Y/K stencils in
fourcolor, trim, and silhouette modes, and writes stencil PNGs, ESC/POS
frames, and print plans under ./demo-out/ for inspection.
"""

import json
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

import numpy as np

from meshpress import Mode, PipelineConfig, Strategy, load_png
from meshpress.pipeline import run, write_artifacts
from meshpress.raster import RasterImage, image_to_png


def build_photo(size: int = 128) -> bytes:
    """A figure on the warm background that the color-correct stage removes."""
    arr = np.tile(np.array((200, 170, 120), np.uint8), (size, size, 1))
    yy, xx = np.mgrid[0:size, 0:size]
    d2 = (xx - size // 2) ** 2 + (yy - size // 2) ** 2
    # stripe first, ring on top: a broken contour would let the trim leak in
    arr[(np.abs(xx - size // 2) < size // 10) & (yy > 3 * size // 4)] = (250, 150, 90)
    arr[(d2 <= (size // 3) ** 2) & (d2 >= (size // 3 - 4) ** 2)] = (15, 15, 15)
    arr[d2 < (size // 3 - 4) ** 2] = (80, 170, 235)
    return image_to_png(RasterImage(arr))


def main() -> None:
    out_root = Path("demo-out")
    photo = build_photo()
    cfg = PipelineConfig()
    print(f"input: {load_png(photo).width}px square, config {cfg.digest()[:12]}")

    for mode in (Mode.FOUR_COLOR, Mode.CONTOUR_TRIM, Mode.SILHOUETTE):
        result = run(photo, mode=mode, strategy=Strategy.AREA_DESC_BLACK_LAST, cfg=cfg)
        out = out_root / mode.value
        write_artifacts(out, result, mode, emit_frames=True)
        plan = json.loads((out / "plan.json").read_text())
        print(f"{mode.value:>10}: order {'-'.join(plan['order'])}, "
              f"open bits {plan['counts']}")

    print(f"stencils, frames, and plans written under {out_root}/")


if __name__ == "__main__":
    main()
