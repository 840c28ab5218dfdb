"""Acceptance suite: one test per release criterion, each printing a PASS line.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
lines. Every tolerance is pinned here; nothing is deferred to calibration.
"""

from __future__ import annotations

import filecmp
import json
import time
from collections import deque
from pathlib import Path

import numpy as np
import pytest

from conftest import fixture_corpus, png_bytes, solid, wait_for
from meshpress.cli import main as cli_main
from meshpress.jobs import JobService
from meshpress.protocol import FONT_5X7, Strategy, pack_raster
from meshpress.raster import CHANNELS, BitStencil, Mode, PipelineConfig, RasterImage, StencilSet
from meshpress.separation import separate
from meshpress.modes import outside_mask

ARTIFACTS = ["c.png", "m.png", "y.png", "k.png", "plan.json",
             "c.escpos", "m.escpos", "y.escpos", "k.escpos"]


def ok(line: str) -> None:
    print(f"[acceptance] PASS - {line}")


def bfs_outside(k_bits: np.ndarray) -> np.ndarray:
    h, w = k_bits.shape
    outside = np.zeros((h, w), bool)
    q: deque[tuple[int, int]] = deque()
    for y in range(h):
        for x in range(w):
            if (y in (0, h - 1) or x in (0, w - 1)) and not k_bits[y, x]:
                if not outside[y, x]:
                    outside[y, x] = True
                    q.append((y, x))
    while q:
        y, x = q.popleft()
        for dy, dx in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            ny, nx = y + dy, x + dx
            if 0 <= ny < h and 0 <= nx < w and not k_bits[ny, nx] and not outside[ny, nx]:
                outside[ny, nx] = True
                q.append((ny, nx))
    return outside


def test_disjointness_suite():
    """1,000 random 64x64 images: no non-fiducial pixel opens more than one layer."""
    cfg = PipelineConfig()
    rng = np.random.default_rng(2024)
    t0 = time.perf_counter()
    for _ in range(1000):
        img = RasterImage(rng.integers(0, 256, (64, 64, 3), dtype=np.uint8))
        out = separate(img, cfg)
        stacked = sum(out.layers[ch].bits.astype(np.uint8) for ch in CHANNELS)
        violations = int((stacked[~out.fiducial_mask()] > 1).sum())
        assert violations == 0
    elapsed = time.perf_counter() - t0
    assert elapsed < 30.0, f"disjointness suite took {elapsed:.1f}s, budget 30s"
    ok(f"disjointness: 1000 random separations, zero overlaps, {elapsed:.1f}s")


def test_dither_exactness():
    """Constant tiles at every d = k/64 open exactly the analytic count. No tolerance."""
    from meshpress.separation import TAG_C, ClassifiedImage, dither

    cfg = PipelineConfig()
    for k in range(65):
        d = k / 64
        cls = ClassifiedImage(np.full((8, 8), TAG_C, np.uint8), np.full((8, 8), d))
        got = dither(cls, "C", cfg).open_count
        analytic = sum(1 for v in range(64) if (v + 0.5) / 64 < d)
        assert got == analytic == k, f"d={k}/64: got {got}, analytic {analytic}"
    ok("dither exactness: all 65 densities k/64 open exactly k bits per tile")


def test_flood_fill_oracle():
    """outside_mask equals brute-force BFS on 10,000 random K layers <= 16x16."""
    rng = np.random.default_rng(4099)
    for i in range(10_000):
        h = int(rng.integers(1, 17))
        w = int(rng.integers(1, 17))
        k = rng.random((h, w)) < rng.uniform(0.05, 0.95)
        got = outside_mask(BitStencil(k)).bits
        want = bfs_outside(k)
        assert np.array_equal(got, want), f"mismatch on sample {i} ({w}x{h})"
    ok("flood fill: 10,000 random K layers match the BFS oracle bit-for-bit")


def test_raster_round_trip():
    """pack then unpack is the identity for every width 1..64 and height 1..16."""
    from meshpress.protocol import unpack_raster

    rng = np.random.default_rng(71)
    for w in range(1, 65):
        for h in range(1, 17):
            bits = rng.random((h, w)) < 0.5
            back = unpack_raster(pack_raster(BitStencil(bits)), width=w)
            assert np.array_equal(back.bits, bits), f"round trip failed at {w}x{h}"

    # byte-exact goldens
    bits = np.zeros((1, 8), bool)
    bits[0, 0] = bits[0, 7] = True
    assert pack_raster(BitStencil(bits)).data == bytes.fromhex("1d76300001000100 81")
    assert pack_raster(BitStencil(np.zeros((1, 8), bool))).data == bytes.fromhex(
        "1d76300001000100 00")
    assert pack_raster(BitStencil(np.ones((2, 10), bool))).data == bytes.fromhex(
        "1d76300002000200 ffc0ffc0")
    ok("raster round trip: 1024 geometries identity + 3 byte-exact goldens")


def test_print_order():
    """AREA keeps K last with C/M/Y non-increasing; CMYK is always C,M,Y,K."""
    from meshpress.protocol import plan_order

    rng = np.random.default_rng(113)
    for _ in range(1000):
        counts = {ch: int(rng.integers(0, 256)) for ch in CHANNELS}
        layers = {}
        for ch in CHANNELS:
            flat = np.zeros(256, bool)
            flat[: counts[ch]] = True
            layers[ch] = BitStencil(flat.reshape(16, 16))
        s = StencilSet(layers=layers, mode=Mode.FOUR_COLOR, fiducials=(), config_hash="a")

        plan = plan_order(s, Strategy.AREA_DESC_BLACK_LAST)
        assert sorted(plan.order) == sorted(CHANNELS)
        assert plan.order[-1] == "K"
        cmy = [counts[ch] for ch in plan.order[:3]]
        assert cmy == sorted(cmy, reverse=True)

        assert plan_order(s, Strategy.CMYK).order == ("C", "M", "Y", "K")
    ok("print order: 1000 random sets, K always last, areas non-increasing")


def _run_cli(src: Path, out: Path) -> None:
    code = cli_main(["separate", str(src), "--out", str(out), "--emit-frames"])
    assert code == 0


def test_end_to_end_determinism(tmp_path, service_factory):
    """CLI twice and the service produce byte-identical artifacts per fixture."""
    corpus = fixture_corpus()
    assert len(corpus) >= 6
    svc: JobService = service_factory()
    for name, data in corpus.items():
        src = tmp_path / f"{name}.png"
        src.write_bytes(data)
        run_a, run_b = tmp_path / name / "a", tmp_path / name / "b"
        _run_cli(src, run_a)
        _run_cli(src, run_b)
        for artifact in ARTIFACTS:
            assert filecmp.cmp(run_a / artifact, run_b / artifact, shallow=False), (
                f"{name}/{artifact} differs across CLI runs")

        job = svc.submit(data)
        done = wait_for(svc, job["id"])
        assert done["state"] == "ready", f"{name}: {done}"
        for artifact in ARTIFACTS:
            cli_bytes = (run_a / artifact).read_bytes()
            stem, ext = artifact.split(".")
            key = "plan" if stem == "plan" else ("stencil_" + stem if ext == "png" else "frame_" + stem)
            svc_bytes = svc.artifact_path(job["id"], key).read_bytes()
            assert svc_bytes == cli_bytes, f"{name}/{artifact} differs between CLI and service"
    ok(f"determinism: {len(corpus)} fixtures byte-identical across runs and front ends")


def test_stylizer_fallback(tmp_path, service_factory):
    """Dead stylizer: jobs still reach ready with fallback; strict CLI exits 3."""
    from conftest import dead_url

    svc: JobService = service_factory()  # dead stylizer by default
    job = svc.submit(png_bytes(solid(64, 64, (123, 33, 33))), stylize=True)
    done = wait_for(svc, job["id"])
    assert done["state"] == "ready"
    assert done["stylizer_fallback"] is True

    src = tmp_path / "in.png"
    src.write_bytes(png_bytes(solid(64, 64, (123, 33, 33))))
    code = cli_main([
        "separate", str(src), "--out", str(tmp_path / "out"),
        "--stylizer", dead_url(), "--strict-stylize",
    ])
    assert code == 3
    ok("stylizer fallback: ready with fallback=true; strict CLI exits 3")


def test_failure_path(service_factory):
    """An injected separation fault fails the job with a printable E-SEP stencil."""
    from meshpress.protocol import render_error_stencil, unpack_raster
    from meshpress.jobs import ERROR_STENCIL_H, ERROR_STENCIL_W

    def exploding(*args, **kwargs):
        raise RuntimeError("injected separation panic")

    svc: JobService = service_factory(pipeline_run=exploding)
    job = svc.submit(png_bytes(solid(64, 64, (200, 100, 50))))
    done = wait_for(svc, job["id"])
    assert done["state"] == "failed"
    assert done["error"]["code"] == "E-SEP"

    frame_bytes = svc.artifact_path(job["id"], "frame_error").read_bytes()
    from meshpress.protocol import RasterFrame

    stencil = unpack_raster(RasterFrame(frame_bytes), width=ERROR_STENCIL_W)
    font_count = sum(row.count("#") for ch in "E-SEP" for row in FONT_5X7[ch])
    assert stencil.open_count == font_count
    expected = render_error_stencil("E-SEP", ERROR_STENCIL_W, ERROR_STENCIL_H)
    assert np.array_equal(stencil.bits, expected.bits)
    ok("failure path: E-SEP job failed with an error stencil matching the font oracle")


def test_throughput_sanity(service_factory):
    """A 512x512 four-color job completes in under 5 seconds, stylize off."""
    rng = np.random.default_rng(555)
    data = png_bytes(rng.integers(0, 256, (512, 512, 3), dtype=np.uint8))
    svc: JobService = service_factory()
    t0 = time.perf_counter()
    job = svc.submit(data, mode=Mode.FOUR_COLOR, strategy=Strategy.CMYK, stylize=False)
    done = wait_for(svc, job["id"], timeout=10.0)
    elapsed = time.perf_counter() - t0
    assert done["state"] == "ready"
    assert elapsed < 5.0, f"512x512 job took {elapsed:.2f}s, budget 5s"
    ok(f"throughput: 512x512 job ready in {elapsed:.2f}s (< 5s)")
