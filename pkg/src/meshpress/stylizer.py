"""Stylization stage: HTTP contract client plus a deterministic stub server.

The real system ran diffusion models here; this package replaces them with a
pluggable image-in/image-out HTTP contract (POST a PNG, get a PNG of the same
dimensions back) and ships a posterizing stub that honors it.
"""

from __future__ import annotations

import argparse
import threading
from dataclasses import dataclass
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import numpy as np
import requests

from .errors import BadImage, StylizerError
from .raster import RasterImage, image_to_png, load_png

DEFAULT_TIMEOUT_MS = 10_000


def posterize_png(data: bytes) -> bytes:
    """Posterize each channel to 4 levels: out = floor(v / 64) * 85.

    Endpoints are fixed (0 -> 0, 255 -> 255) and dimensions are preserved,
    so the stub always satisfies the stylizer contract.
    """
    img = load_png(data)
    out = (img.pixels // 64).astype(np.uint8) * 85
    return image_to_png(RasterImage(out))


@dataclass(frozen=True)
class StylizerClient:
    """Client side of the stylizer contract.

    Any non-200 response, timeout, undecodable body, or dimension mismatch
    counts as stylizer failure and raises StylizerError.
    """

    endpoint: str
    timeout_ms: int = DEFAULT_TIMEOUT_MS

    def stylize(self, png: bytes) -> bytes:
        source = load_png(png)
        try:
            resp = requests.post(
                self.endpoint,
                data=png,
                headers={"Content-Type": "image/png"},
                timeout=self.timeout_ms / 1000.0,
            )
        except requests.RequestException as exc:
            raise StylizerError(f"stylizer unreachable: {exc}") from None
        if resp.status_code != 200:
            raise StylizerError(f"stylizer returned HTTP {resp.status_code}")
        try:
            styled = load_png(resp.content)
        except BadImage as exc:
            raise StylizerError(f"stylizer response is not a PNG: {exc}") from None
        if (styled.width, styled.height) != (source.width, source.height):
            raise StylizerError(
                f"stylizer changed dimensions: {source.width}x{source.height} -> "
                f"{styled.width}x{styled.height}"
            )
        return resp.content


class _StubHandler(BaseHTTPRequestHandler):
    def do_POST(self):  # noqa: N802 (http.server API)
        if self.path != "/stylize":
            self.send_error(404)
            return
        length = int(self.headers.get("Content-Length", "0"))
        body = self.rfile.read(length)
        try:
            out = posterize_png(body)
        except BadImage as exc:
            self.send_response(400)
            self.send_header("Content-Type", "text/plain")
            self.end_headers()
            self.wfile.write(str(exc).encode())
            return
        self.send_response(200)
        self.send_header("Content-Type", "image/png")
        self.send_header("Content-Length", str(len(out)))
        self.end_headers()
        self.wfile.write(out)

    def do_GET(self):  # noqa: N802
        if self.path == "/healthz":
            self.send_response(200)
            self.send_header("Content-Type", "text/plain")
            self.end_headers()
            self.wfile.write(b"ok")
        else:
            self.send_error(404)

    def log_message(self, fmt, *args):
        pass


def start_stub_server(host: str = "127.0.0.1", port: int = 0) -> ThreadingHTTPServer:
    """Start the stub stylizer in a daemon thread; caller shuts it down."""
    server = ThreadingHTTPServer((host, port), _StubHandler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    return server


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="meshpress-stylizer", description="Run the stub stylizer.")
    parser.add_argument("--bind", default="127.0.0.1:9100", help="host:port to listen on")
    args = parser.parse_args(argv)
    host, _, port = args.bind.rpartition(":")
    server = ThreadingHTTPServer((host or "127.0.0.1", int(port)), _StubHandler)
    print(f"stub stylizer listening on {server.server_address[0]}:{server.server_address[1]}/stylize")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
