#!/usr/bin/env python3
"""Render error-code stencils the way a failed job would print them.

The workshop treated error meshes as material worth printing; this shows the
codes the service can emit, as preview PNGs plus their raster frames.
"""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from meshpress import pack_raster, render_error_stencil, stencil_to_png

CODES = ["E-STY", "E-SEP", "E-ENC", "E-DEV"]


def main() -> None:
    out = Path("demo-out") / "errors"
    out.mkdir(parents=True, exist_ok=True)
    for code in CODES:
        stencil = render_error_stencil(code, 128, 32)
        (out / f"{code}.png").write_bytes(stencil_to_png(stencil))
        frame = pack_raster(stencil)
        (out / f"{code}.escpos").write_bytes(frame.data)
        print(f"{code}: {stencil.open_count} open dots, {len(frame.data)}-byte frame")
    print(f"previews written under {out}/")


if __name__ == "__main__":
    main()
