"""Service and pipeline configuration loading: one TOML file plus env overrides.

Recognized environment overrides: PRINTER_DEVICE, STYLIZER_URL, BIND_ADDR.
The same file format serves the job service and the CLI's --config flag; the
CLI only reads the [pipeline] table.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from .errors import BadConfig
from .raster import PipelineConfig

_SERVICE_KEYS = {
    "bind_addr",
    "data_dir",
    "printer_device",
    "stylizer_url",
    "stylizer_timeout_ms",
    "workers",
}


@dataclass(frozen=True)
class ServiceConfig:
    bind_addr: str = "127.0.0.1:8080"
    data_dir: str = "meshpress-data"
    printer_device: str = "capture:printer-capture.escpos"
    stylizer_url: str = "http://127.0.0.1:9100/stylize"
    stylizer_timeout_ms: int = 10_000
    workers: int = 1
    pipeline: PipelineConfig = field(default_factory=PipelineConfig)

    @property
    def host(self) -> str:
        host, _, _ = self.bind_addr.rpartition(":")
        return host or "127.0.0.1"

    @property
    def port(self) -> int:
        _, _, port = self.bind_addr.rpartition(":")
        try:
            return int(port)
        except ValueError:
            raise BadConfig(f"bind_addr has no numeric port: {self.bind_addr!r}") from None


def _read_toml(path: str | Path) -> dict:
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except OSError as exc:
        raise BadConfig(f"cannot read config file {path}: {exc}") from None
    except tomllib.TOMLDecodeError as exc:
        raise BadConfig(f"invalid TOML in {path}: {exc}") from None


def load_pipeline_config(path: str | Path | None) -> PipelineConfig:
    """Pipeline thresholds from the [pipeline] table of a config file."""
    if path is None:
        return PipelineConfig()
    data = _read_toml(path)
    overrides = data.get("pipeline", {})
    if not isinstance(overrides, dict):
        raise BadConfig("[pipeline] must be a table")
    return PipelineConfig().with_overrides(overrides)


def load_service_config(
    path: str | Path | None = None, env: Mapping[str, str] | None = None
) -> ServiceConfig:
    """Service settings from a TOML file, then env overrides on top."""
    env = os.environ if env is None else env
    data = _read_toml(path) if path is not None else {}
    unknown = set(data) - _SERVICE_KEYS - {"pipeline"}
    if unknown:
        raise BadConfig(f"unknown service config keys: {sorted(unknown)}")

    kwargs: dict = {k: data[k] for k in _SERVICE_KEYS if k in data}
    kwargs["pipeline"] = PipelineConfig().with_overrides(data.get("pipeline", {}))
    if env.get("PRINTER_DEVICE"):
        kwargs["printer_device"] = env["PRINTER_DEVICE"]
    if env.get("STYLIZER_URL"):
        kwargs["stylizer_url"] = env["STYLIZER_URL"]
    if env.get("BIND_ADDR"):
        kwargs["bind_addr"] = env["BIND_ADDR"]
    try:
        return ServiceConfig(**kwargs)
    except TypeError as exc:
        raise BadConfig(f"bad service config: {exc}") from None
