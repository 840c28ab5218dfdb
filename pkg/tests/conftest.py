from __future__ import annotations

import time

import pytest

from fixture_corpus import (  # noqa: F401 -- re-exported for the test modules
    brown_portrait,
    color_blocks,
    fixture_corpus,
    gray_ramp,
    half_cyan,
    png_bytes,
    solid,
)
from meshpress import pipeline
from meshpress.jobs import JobService, PrinterSession
from meshpress.settings import ServiceConfig
from meshpress.stylizer import start_stub_server


def oversized_png(w: int = 4100, h: int = 16) -> bytes:
    """A PNG larger than the pipeline accepts; built with PIL to dodge the guard."""
    from io import BytesIO

    from PIL import Image

    buf = BytesIO()
    Image.new("RGB", (w, h), (255, 255, 255)).save(buf, format="PNG")
    return buf.getvalue()


@pytest.fixture(scope="session")
def corpus() -> dict[str, bytes]:
    return fixture_corpus()


@pytest.fixture
def stub_stylizer_url():
    server = start_stub_server(port=0)
    host, port = server.server_address[:2]
    yield f"http://{host}:{port}/stylize"
    server.shutdown()
    server.server_close()


# A port nothing listens on: bind-and-release so the OS will refuse connects.
def dead_url() -> str:
    import socket

    s = socket.socket()
    s.bind(("127.0.0.1", 0))
    port = s.getsockname()[1]
    s.close()
    return f"http://127.0.0.1:{port}/stylize"


@pytest.fixture
def service_factory(tmp_path):
    created: list[JobService] = []
    counter = {"n": 0}

    def make(
        stylizer_url: str | None = None,
        pipeline_run=pipeline.run,
        printer: PrinterSession | None = None,
        workers: int = 1,
        autostart: bool = True,
    ) -> JobService:
        counter["n"] += 1
        n = counter["n"]
        cfg = ServiceConfig(
            data_dir=str(tmp_path / f"data-{n}"),
            printer_device="capture:" + str(tmp_path / f"capture-{n}.bin"),
            stylizer_url=stylizer_url or dead_url(),
            stylizer_timeout_ms=2000,
            workers=workers,
        )
        svc = JobService(cfg, printer=printer, pipeline_run=pipeline_run, autostart=autostart)
        created.append(svc)
        return svc

    yield make
    for svc in created:
        svc.close()


def wait_for(service: JobService, job_id: str, states=("ready", "failed"), timeout: float = 20.0) -> dict:
    deadline = time.time() + timeout
    while time.time() < deadline:
        job = service.get(job_id)
        assert job is not None, f"job {job_id} vanished"
        if job["state"] in states:
            return job
        time.sleep(0.01)
    raise AssertionError(f"job {job_id} did not reach {states} within {timeout}s: {service.get(job_id)}")
