#!/usr/bin/env python3
"""Regenerate the committed fixture inputs and golden-artifact manifest.

The CLI is the one canonical producer of regression bytes: this script feeds
each fixture through `meshpress separate --emit-frames` for every mode and
records sha256 digests of the artifacts in tests/fixtures/goldens.json.
Run it after an intentional pipeline change and commit the result.
"""

from __future__ import annotations

import contextlib
import hashlib
import io
import json
import sys
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "src"))
sys.path.insert(0, str(ROOT / "tests"))

from fixture_corpus import fixture_corpus  # noqa: E402
from meshpress.cli import main as cli_main  # noqa: E402

ARTIFACTS = ["c.png", "m.png", "y.png", "k.png", "plan.json",
             "c.escpos", "m.escpos", "y.escpos", "k.escpos"]
MODES = ["fourcolor", "trim", "silhouette"]


def main() -> int:
    fixtures_dir = ROOT / "tests" / "fixtures"
    inputs_dir = fixtures_dir / "inputs"
    inputs_dir.mkdir(parents=True, exist_ok=True)

    manifest: dict[str, dict] = {}
    for name, png in sorted(fixture_corpus().items()):
        (inputs_dir / f"{name}.png").write_bytes(png)
        manifest[name] = {"input_sha256": hashlib.sha256(png).hexdigest(), "modes": {}}
        for mode in MODES:
            with tempfile.TemporaryDirectory() as tmp:
                out = Path(tmp) / "out"
                with contextlib.redirect_stdout(io.StringIO()):
                    code = cli_main([
                        "separate", str(inputs_dir / f"{name}.png"),
                        "--mode", mode, "--out", str(out), "--emit-frames",
                    ])
                if code != 0:
                    print(f"CLI failed on {name}/{mode} with exit {code}", file=sys.stderr)
                    return 1
                manifest[name]["modes"][mode] = {
                    a: hashlib.sha256((out / a).read_bytes()).hexdigest() for a in ARTIFACTS
                }

    manifest_path = fixtures_dir / "goldens.json"
    manifest_path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    print(f"wrote {len(manifest)} fixtures to {inputs_dir}")
    print(f"wrote manifest {manifest_path}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
