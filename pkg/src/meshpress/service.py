"""HTTP job API: upload an image, watch the pipeline advance, fire prints.

Endpoints:
    POST /v1/jobs                          multipart image + JSON options
    GET  /v1/jobs/{id}
    GET  /v1/jobs/{id}/stencils/{c|m|y|k}.png
    GET  /v1/jobs/{id}/frames/{c|m|y|k|error}.escpos
    POST /v1/jobs/{id}/print
    GET  /v1/healthz
"""

from __future__ import annotations

import argparse
import json
from contextlib import asynccontextmanager
from pathlib import Path

import uvicorn
from fastapi import FastAPI, File, Form, HTTPException, UploadFile
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, Response
from fastapi.staticfiles import StaticFiles

from .errors import BadConfig, BadImage, DeviceWriteError, NotReady
from .jobs import JobService
from .protocol import Strategy
from .raster import Mode
from .settings import ServiceConfig, load_service_config

_LAYERS = {"c", "m", "y", "k"}


def _http_error(status: int, code: str, message: str) -> HTTPException:
    return HTTPException(status_code=status, detail={"code": code, "message": message})


def _parse_options(raw: str) -> dict:
    try:
        opts = json.loads(raw) if raw else {}
    except json.JSONDecodeError as exc:
        raise _http_error(422, "BadConfig", f"options is not valid JSON: {exc}") from None
    if not isinstance(opts, dict):
        raise _http_error(422, "BadConfig", "options must be a JSON object")
    return opts


def create_app(service: JobService, ui_dir: str | Path | None = None) -> FastAPI:
    @asynccontextmanager
    async def lifespan(_: FastAPI):
        yield
        service.close()

    app = FastAPI(title="meshpress job service", lifespan=lifespan)
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    app.state.service = service

    @app.post("/v1/jobs", status_code=201)
    async def submit_job(image: UploadFile = File(...), options: str = Form("{}")):
        opts = _parse_options(options)
        try:
            mode = Mode(opts.get("mode", Mode.FOUR_COLOR.value))
            strategy = Strategy(opts.get("strategy", Strategy.CMYK.value))
        except ValueError as exc:
            raise _http_error(422, "BadConfig", str(exc)) from None
        data = await image.read()
        try:
            return service.submit(
                data,
                mode=mode,
                strategy=strategy,
                stylize=bool(opts.get("stylize", False)),
                strict_stylize=bool(opts.get("strict_stylize", False)),
                config_overrides=opts.get("config"),
            )
        except BadImage as exc:
            raise _http_error(400, "BadImage", str(exc)) from None
        except BadConfig as exc:
            raise _http_error(422, "BadConfig", str(exc)) from None

    @app.get("/v1/jobs/{job_id}")
    def get_job(job_id: str):
        job = service.get(job_id)
        if job is None:
            raise _http_error(404, "NotFound", f"no job {job_id}")
        return job

    @app.get("/v1/jobs/{job_id}/stencils/{layer}.png")
    def get_stencil(job_id: str, layer: str):
        if layer not in _LAYERS:
            raise _http_error(404, "NotFound", f"no stencil layer {layer!r}")
        path = service.artifact_path(job_id, f"stencil_{layer}")
        if path is None or not path.exists():
            raise _http_error(404, "NotFound", "stencil not available")
        return Response(content=path.read_bytes(), media_type="image/png")

    @app.get("/v1/jobs/{job_id}/frames/{layer}.escpos")
    def get_frame(job_id: str, layer: str):
        if layer not in _LAYERS | {"error"}:
            raise _http_error(404, "NotFound", f"no frame layer {layer!r}")
        path = service.artifact_path(job_id, f"frame_{layer}")
        if path is None or not path.exists():
            raise _http_error(404, "NotFound", "frame not available")
        return Response(content=path.read_bytes(), media_type="application/octet-stream")

    @app.post("/v1/jobs/{job_id}/print")
    def print_job(job_id: str):
        try:
            return service.print_job(job_id)
        except KeyError:
            raise _http_error(404, "NotFound", f"no job {job_id}") from None
        except NotReady as exc:
            raise _http_error(409, "NotReady", str(exc)) from None
        except DeviceWriteError as exc:
            raise _http_error(503, "E-DEV", str(exc)) from None

    @app.get("/v1/healthz")
    def healthz():
        return {"status": "ok"}

    @app.exception_handler(HTTPException)
    async def _on_http_error(_, exc: HTTPException):
        detail = exc.detail if isinstance(exc.detail, dict) else {"code": "Error", "message": str(exc.detail)}
        return JSONResponse(status_code=exc.status_code, content={"error": detail})

    if ui_dir and Path(ui_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")
    return app


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="meshpress-serve", description="Run the job service.")
    parser.add_argument("--config", help="TOML config file")
    parser.add_argument("--bind", help="host:port (overrides config and BIND_ADDR)")
    parser.add_argument("--data-dir", help="artifact directory")
    parser.add_argument("--printer", help="printer device path or capture:<file>")
    parser.add_argument("--stylizer", help="stylizer endpoint URL")
    parser.add_argument("--ui", help="static directory for the operator console")
    args = parser.parse_args(argv)

    cfg = load_service_config(args.config)
    updates = {}
    if args.bind:
        updates["bind_addr"] = args.bind
    if args.data_dir:
        updates["data_dir"] = args.data_dir
    if args.printer:
        updates["printer_device"] = args.printer
    if args.stylizer:
        updates["stylizer_url"] = args.stylizer
    if updates:
        from dataclasses import replace

        cfg = replace(cfg, **updates)

    service = JobService(cfg)
    app = create_app(service, ui_dir=args.ui)
    uvicorn.run(app, host=cfg.host, port=cfg.port, log_level="info")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
