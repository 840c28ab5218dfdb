from __future__ import annotations

import json

import numpy as np
import pytest

from conftest import dead_url, half_cyan, png_bytes, solid
from meshpress.cli import main
from meshpress.raster import stencil_from_png


@pytest.fixture
def white_png(tmp_path):
    path = tmp_path / "white.png"
    path.write_bytes(png_bytes(solid(64, 64, (255, 255, 255))))
    return path


def run(args: list[str]) -> int:
    return main(args)


class TestSeparateCommand:
    def test_happy_path_writes_stencils_and_plan(self, tmp_path, white_png):
        out = tmp_path / "out"
        code = run(["separate", str(white_png), "--out", str(out)])
        assert code == 0
        for name in ("c.png", "m.png", "y.png", "k.png", "plan.json"):
            assert (out / name).exists(), name
        plan = json.loads((out / "plan.json").read_text())
        assert plan["order"] == ["C", "M", "Y", "K"]
        assert plan["mode"] == "fourcolor"
        assert set(plan["counts"]) == set("CMYK")
        assert len(plan["config_hash"]) == 64
        # white input: everything closed except the four fiducials
        assert plan["counts"]["C"] == 4 * 36

    def test_emit_frames_flag(self, tmp_path, white_png):
        out = tmp_path / "out"
        assert run(["separate", str(white_png), "--out", str(out), "--emit-frames"]) == 0
        for name in ("c.escpos", "m.escpos", "y.escpos", "k.escpos"):
            assert (out / name).exists(), name
        assert (out / "c.escpos").read_bytes().startswith(b"\x1dv0\x00")

    def test_plan_counts_match_png_popcounts(self, tmp_path):
        src = tmp_path / "in.png"
        src.write_bytes(png_bytes(half_cyan()))
        out = tmp_path / "out"
        assert run(["separate", str(src), "--out", str(out)]) == 0
        plan = json.loads((out / "plan.json").read_text())
        for ch in "CMYK":
            stencil = stencil_from_png((out / f"{ch.lower()}.png").read_bytes())
            assert stencil.open_count == plan["counts"][ch]

    def test_silhouette_mode_gives_identical_layers(self, tmp_path):
        src = tmp_path / "in.png"
        src.write_bytes(png_bytes(half_cyan()))
        out = tmp_path / "out"
        assert run(["separate", str(src), "--mode", "silhouette", "--out", str(out)]) == 0
        layers = [stencil_from_png((out / f"{c}.png").read_bytes()) for c in "cmyk"]
        for other in layers[1:]:
            assert np.array_equal(layers[0].bits, other.bits)

    def test_missing_input_exits_1_and_writes_nothing(self, tmp_path, capsys):
        out = tmp_path / "out"
        code = run(["separate", str(tmp_path / "absent.png"), "--out", str(out)])
        assert code == 1
        assert not out.exists()
        assert "not found" in capsys.readouterr().err

    def test_non_png_input_exits_1(self, tmp_path):
        src = tmp_path / "in.png"
        src.write_bytes(b"plain text")
        assert run(["separate", str(src), "--out", str(tmp_path / "out")]) == 1
        assert not (tmp_path / "out").exists()

    def test_bad_config_value_exits_2(self, tmp_path, white_png):
        cfg = tmp_path / "cfg.toml"
        cfg.write_text("[pipeline]\ntheta_k = 3.0\n")
        code = run(["separate", str(white_png), "--out", str(tmp_path / "out"), "--config", str(cfg)])
        assert code == 2

    def test_unknown_config_key_exits_2(self, tmp_path, white_png):
        cfg = tmp_path / "cfg.toml"
        cfg.write_text("[pipeline]\nmystery = 1\n")
        assert run(["separate", str(white_png), "--out", str(tmp_path / "out"), "--config", str(cfg)]) == 2

    def test_config_overrides_change_output_hash(self, tmp_path, white_png):
        cfg = tmp_path / "cfg.toml"
        cfg.write_text("[pipeline]\ntheta_k = 0.2\n")
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        assert run(["separate", str(white_png), "--out", str(out_a)]) == 0
        assert run(["separate", str(white_png), "--out", str(out_b), "--config", str(cfg)]) == 0
        hash_a = json.loads((out_a / "plan.json").read_text())["config_hash"]
        hash_b = json.loads((out_b / "plan.json").read_text())["config_hash"]
        assert hash_a != hash_b

    def test_usage_error_exits_2(self, tmp_path, white_png):
        with pytest.raises(SystemExit) as exc:
            run(["separate", str(white_png), "--out", str(tmp_path / "o"), "--mode", "sepia"])
        assert exc.value.code == 2

    def test_strict_stylize_dead_endpoint_exits_3(self, tmp_path, white_png):
        out = tmp_path / "out"
        code = run([
            "separate", str(white_png), "--out", str(out),
            "--stylizer", dead_url(), "--strict-stylize",
        ])
        assert code == 3
        assert not out.exists()

    def test_stylizer_fallback_without_strict(self, tmp_path, white_png, capsys):
        out = tmp_path / "out"
        code = run(["separate", str(white_png), "--out", str(out), "--stylizer", dead_url()])
        assert code == 0
        assert (out / "k.png").exists()
        assert "stylizer failed" in capsys.readouterr().err

    def test_stylizer_used_when_up(self, tmp_path, stub_stylizer_url):
        src = tmp_path / "in.png"
        src.write_bytes(png_bytes(solid(64, 64, (120, 120, 120))))
        out_plain, out_styled = tmp_path / "plain", tmp_path / "styled"
        assert run(["separate", str(src), "--out", str(out_plain)]) == 0
        assert run(["separate", str(src), "--out", str(out_styled), "--stylizer", stub_stylizer_url]) == 0
        # posterized gray (120 -> 85) dithers differently than the original
        k_plain = stencil_from_png((out_plain / "k.png").read_bytes())
        k_styled = stencil_from_png((out_styled / "k.png").read_bytes())
        assert not np.array_equal(k_plain.bits, k_styled.bits)
