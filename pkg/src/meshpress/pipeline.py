"""End-to-end pipeline shared by the CLI and the job service.

Both front ends call run() and write_artifacts() so their outputs are
byte-identical for the same inputs: one code path, one set of bytes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional

from .errors import StylizerError
from .modes import contour_trim, silhouette
from .protocol import RasterFrame, PrintPlan, Strategy, pack_raster, plan_order
from .raster import CHANNELS, Mode, PipelineConfig, StencilSet, load_png, stencil_to_png
from .separation import separate
from .stylizer import StylizerClient

# Stages reported to the on_stage callback, in order of occurrence.
STAGE_STYLIZING = "stylizing"
STAGE_SEPARATING = "separating"


@dataclass
class PipelineResult:
    stencils: StencilSet
    frames: dict[str, RasterFrame]
    plan: PrintPlan
    counts: dict[str, int]
    stylized_png: Optional[bytes]
    stylizer_fallback: bool


def run(
    image_png: bytes,
    mode: Mode,
    strategy: Strategy,
    cfg: PipelineConfig,
    stylizer: Optional[StylizerClient] = None,
    strict_stylize: bool = False,
    on_stage: Optional[Callable[[str], None]] = None,
) -> PipelineResult:
    """Run capture-to-frames processing for one image.

    When a stylizer client is given, its failure falls back to the original
    image (stylizer_fallback=True) unless strict_stylize is set, in which
    case StylizerError propagates. A print is always preferable to nothing.
    """
    load_png(image_png)  # validate early so BadImage precedes any stylizer call

    stylized: Optional[bytes] = None
    fallback = False
    working = image_png
    if stylizer is not None:
        if on_stage:
            on_stage(STAGE_STYLIZING)
        try:
            stylized = stylizer.stylize(image_png)
            working = stylized
        except StylizerError:
            if strict_stylize:
                raise
            fallback = True

    if on_stage:
        on_stage(STAGE_SEPARATING)
    img = load_png(working)
    if mode == Mode.SILHOUETTE:
        stencils = silhouette(img, cfg)
    else:
        stencils = separate(img, cfg)
        if mode == Mode.CONTOUR_TRIM:
            stencils = contour_trim(stencils)

    frames = {ch: pack_raster(stencils.layers[ch]) for ch in CHANNELS}
    plan = plan_order(stencils, strategy)
    counts = {ch: stencils.layers[ch].open_count for ch in CHANNELS}
    return PipelineResult(
        stencils=stencils,
        frames=frames,
        plan=plan,
        counts=counts,
        stylized_png=stylized,
        stylizer_fallback=fallback,
    )


def plan_json(result: PipelineResult, mode: Mode) -> str:
    doc = {
        "mode": mode.value,
        "strategy": result.plan.strategy.value,
        "order": list(result.plan.order),
        "counts": result.counts,
        "config_hash": result.stencils.config_hash,
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def write_artifacts(
    out_dir: Path,
    result: PipelineResult,
    mode: Mode,
    emit_frames: bool = True,
) -> dict[str, Path]:
    """Write stencil PNGs, plan.json, and optionally .escpos frames.

    Returns artifact name -> path. Deterministic bytes throughout.
    """
    out_dir.mkdir(parents=True, exist_ok=True)
    written: dict[str, Path] = {}
    for ch in CHANNELS:
        path = out_dir / f"{ch.lower()}.png"
        path.write_bytes(stencil_to_png(result.stencils.layers[ch]))
        written[f"stencil_{ch.lower()}"] = path
    plan_path = out_dir / "plan.json"
    plan_path.write_text(plan_json(result, mode))
    written["plan"] = plan_path
    if emit_frames:
        for ch in CHANNELS:
            path = out_dir / f"{ch.lower()}.escpos"
            path.write_bytes(result.frames[ch].data)
            written[f"frame_{ch.lower()}"] = path
    return written
