"""One-shot offline pipeline: photo in, four stencils plus print plan out.

Exit codes: 0 success, 1 bad or missing input image, 2 bad configuration,
3 stylizer failure under --strict-stylize.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import pipeline
from .errors import BadConfig, BadImage, StylizerError
from .protocol import Strategy
from .raster import Mode
from .settings import load_pipeline_config
from .stylizer import StylizerClient

EXIT_OK = 0
EXIT_BAD_IMAGE = 1
EXIT_BAD_CONFIG = 2
EXIT_STYLIZER = 3

_MODES = {m.value: m for m in Mode}
_STRATEGIES = {s.value: s for s in Strategy}


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse default exits 2, which matches BadConfig
        self.exit(EXIT_BAD_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="meshpress", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    sep = sub.add_parser("separate", help="separate a PNG into four 1-bit stencils")
    sep.add_argument("input", help="input PNG path")
    sep.add_argument("--mode", choices=sorted(_MODES), default=Mode.FOUR_COLOR.value)
    sep.add_argument("--strategy", choices=sorted(_STRATEGIES), default=Strategy.CMYK.value)
    sep.add_argument("--out", required=True, help="output directory")
    sep.add_argument("--config", help="TOML config file ([pipeline] table)")
    group = sep.add_mutually_exclusive_group()
    group.add_argument("--stylizer", help="stylizer endpoint URL")
    group.add_argument("--no-stylize", action="store_true", help="skip stylization (default)")
    sep.add_argument("--strict-stylize", action="store_true",
                     help="fail (exit 3) instead of falling back when the stylizer fails")
    sep.add_argument("--emit-frames", action="store_true", help="also write .escpos raster frames")
    return parser


def run_separate(args: argparse.Namespace) -> int:
    try:
        cfg = load_pipeline_config(args.config)
    except BadConfig as exc:
        print(f"meshpress: bad config: {exc}", file=sys.stderr)
        return EXIT_BAD_CONFIG

    in_path = Path(args.input)
    if not in_path.is_file():
        print(f"meshpress: input not found: {in_path}", file=sys.stderr)
        return EXIT_BAD_IMAGE
    data = in_path.read_bytes()

    stylizer = StylizerClient(args.stylizer) if args.stylizer else None
    try:
        result = pipeline.run(
            data,
            mode=_MODES[args.mode],
            strategy=_STRATEGIES[args.strategy],
            cfg=cfg,
            stylizer=stylizer,
            strict_stylize=args.strict_stylize,
        )
    except BadImage as exc:
        print(f"meshpress: bad image: {exc}", file=sys.stderr)
        return EXIT_BAD_IMAGE
    except StylizerError as exc:
        print(f"meshpress: stylizer failed: {exc}", file=sys.stderr)
        return EXIT_STYLIZER

    if result.stylizer_fallback:
        print("meshpress: stylizer failed, continuing with the original image", file=sys.stderr)
    written = pipeline.write_artifacts(
        Path(args.out), result, _MODES[args.mode], emit_frames=args.emit_frames
    )
    for path in sorted(p.name for p in written.values()):
        print(path)
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "separate":
        return run_separate(args)
    return EXIT_BAD_CONFIG


def entrypoint() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    entrypoint()
