"""Job state machine, pipeline worker, and printer session.

Jobs are content-addressed: the id is a digest of the input image, the
pipeline config, and the processing options, so resubmitting the same work
dedupes to the same artifacts. Artifacts live on the filesystem under
<data_dir>/jobs/<id>/.
"""

from __future__ import annotations

import hashlib
import json
import queue
import threading
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path
from typing import BinaryIO, Callable, Optional

from . import pipeline
from .errors import DeviceWriteError, NotReady, StylizerError
from .protocol import FEED, Strategy, pack_raster, render_error_stencil
from .raster import Mode, PipelineConfig, load_png
from .settings import ServiceConfig
from .stylizer import StylizerClient

ERROR_STENCIL_W, ERROR_STENCIL_H = 128, 32


class JobState(str, Enum):
    RECEIVED = "received"
    STYLIZING = "stylizing"
    SEPARATING = "separating"
    READY = "ready"
    PRINTING = "printing"
    DONE = "done"
    FAILED = "failed"


# PRINTING -> READY is the device-failure retry path: a partial mesh set is
# useless for registration, so the whole job goes back to printable.
_ALLOWED_TRANSITIONS: dict[JobState, set[JobState]] = {
    JobState.RECEIVED: {JobState.STYLIZING, JobState.SEPARATING, JobState.FAILED},
    JobState.STYLIZING: {JobState.SEPARATING, JobState.FAILED},
    JobState.SEPARATING: {JobState.READY, JobState.FAILED},
    JobState.READY: {JobState.PRINTING, JobState.FAILED},
    JobState.PRINTING: {JobState.DONE, JobState.READY, JobState.FAILED},
    JobState.DONE: set(),
    JobState.FAILED: set(),
}


def _utcnow() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="milliseconds")


@dataclass
class PrintJob:
    id: str
    state: JobState
    mode: Mode
    strategy: Strategy
    stylize: bool
    strict_stylize: bool
    stylizer_fallback: bool = False
    created_at: str = field(default_factory=_utcnow)
    updated_at: str = field(default_factory=_utcnow)
    artifacts: dict[str, str] = field(default_factory=dict)
    plan: Optional[dict] = None
    error: Optional[dict] = None
    history: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "state": self.state.value,
            "mode": self.mode.value,
            "strategy": self.strategy.value,
            "stylize": self.stylize,
            "strict_stylize": self.strict_stylize,
            "stylizer_fallback": self.stylizer_fallback,
            "created_at": self.created_at,
            "updated_at": self.updated_at,
            "artifacts": dict(self.artifacts),
            "plan": dict(self.plan) if self.plan else None,
            "error": dict(self.error) if self.error else None,
            "history": list(self.history),
        }


def job_digest(image: bytes, cfg: PipelineConfig, mode: Mode, strategy: Strategy,
               stylize: bool, strict_stylize: bool) -> str:
    h = hashlib.sha256()
    h.update(b"meshpress-job\0")
    h.update(image)
    h.update(b"\0" + cfg.canonical().encode())
    h.update(f"\0{mode.value}\0{strategy.value}\0{int(stylize)}\0{int(strict_stylize)}".encode())
    return h.hexdigest()[:32]


class PrinterSession:
    """Serializes raster writes to one printer device.

    The device is a character-device path, or "capture:<file>" to append the
    byte stream to a file (the test and offline mode). Exactly one print runs
    at a time per session.
    """

    def __init__(self, device: str, opener: Optional[Callable[[], BinaryIO]] = None):
        self.device = device
        self._opener = opener
        self._lock = threading.Lock()

    def _open(self) -> BinaryIO:
        if self._opener is not None:
            return self._opener()
        path = self.device.removeprefix("capture:") if self.device.startswith("capture:") else self.device
        try:
            return open(path, "ab")
        except OSError as exc:
            raise DeviceWriteError(f"cannot open printer device {path}: {exc}") from None

    def write_frames(self, frames: list[tuple[str, bytes]]) -> list[dict]:
        """Write (layer, frame bytes) pairs in order, each followed by a feed."""
        with self._lock:
            records = []
            try:
                with self._open() as dev:
                    for layer, data in frames:
                        t0 = time.perf_counter()
                        dev.write(data)
                        dev.write(FEED)
                        dev.flush()
                        records.append({
                            "layer": layer,
                            "bytes": len(data),
                            "duration_ms": round((time.perf_counter() - t0) * 1000.0, 3),
                        })
            except OSError as exc:
                raise DeviceWriteError(f"device write failed: {exc}") from None
            return records


class JobService:
    """Accepts jobs, runs the pipeline in worker threads, owns the printer.

    The job store is a serialized critical section; pipeline workers are
    independent. One worker is the default: a single physical printer is the
    bottleneck anyway.
    """

    def __init__(
        self,
        config: ServiceConfig,
        printer: Optional[PrinterSession] = None,
        pipeline_run: Callable = pipeline.run,
        autostart: bool = True,
    ):
        self.config = config
        self.data_dir = Path(config.data_dir)
        self.printer = printer or PrinterSession(config.printer_device)
        self._pipeline_run = pipeline_run
        self._jobs: dict[str, PrintJob] = {}
        self._configs: dict[str, PipelineConfig] = {}
        self._lock = threading.Lock()
        # Serializes whole print runs so at most one job is PRINTING at a time.
        self._print_lock = threading.Lock()
        self._queue: "queue.Queue[Optional[str]]" = queue.Queue()
        self._threads: list[threading.Thread] = []
        if autostart:
            self.start()

    # -- lifecycle ---------------------------------------------------------

    def start(self) -> None:
        if self._threads:
            return
        for i in range(max(1, self.config.workers)):
            t = threading.Thread(target=self._worker, name=f"meshpress-worker-{i}", daemon=True)
            t.start()
            self._threads.append(t)

    def close(self) -> None:
        for _ in self._threads:
            self._queue.put(None)
        for t in self._threads:
            t.join(timeout=5)
        self._threads.clear()

    # -- public API --------------------------------------------------------

    def submit(
        self,
        image: bytes,
        mode: Mode = Mode.FOUR_COLOR,
        strategy: Strategy = Strategy.CMYK,
        stylize: bool = False,
        strict_stylize: bool = False,
        config_overrides: Optional[dict] = None,
    ) -> dict:
        """Persist a new job in RECEIVED state and schedule its pipeline."""
        load_png(image)  # BadImage / ImageTooLarge before anything is stored
        cfg = self.config.pipeline.with_overrides(config_overrides)
        job_id = job_digest(image, cfg, mode, strategy, stylize, strict_stylize)
        with self._lock:
            existing = self._jobs.get(job_id)
            if existing is not None:
                return existing.to_dict()
            job = PrintJob(
                id=job_id, state=JobState.RECEIVED, mode=mode, strategy=strategy,
                stylize=stylize, strict_stylize=strict_stylize,
            )
            job.history.append(job.state.value)
            self._jobs[job_id] = job
            self._configs[job_id] = cfg
            job_dir = self._job_dir(job_id)
            job_dir.mkdir(parents=True, exist_ok=True)
            (job_dir / "input.png").write_bytes(image)
            job.artifacts["input"] = "input.png"
            self._persist(job)
            snapshot = job.to_dict()
        self._queue.put(job_id)
        return snapshot

    def get(self, job_id: str) -> Optional[dict]:
        with self._lock:
            job = self._jobs.get(job_id)
            return job.to_dict() if job else None

    def artifact_path(self, job_id: str, name: str) -> Optional[Path]:
        with self._lock:
            job = self._jobs.get(job_id)
            if job is None or name not in job.artifacts:
                return None
            return self._job_dir(job_id) / job.artifacts[name]

    def print_job(self, job_id: str) -> dict:
        """Send a READY job's frames to the printer in plan order.

        FAILED jobs with an error stencil are also printable (the workshop
        kept printing error meshes); that path does not change job state.
        """
        with self._print_lock:
            with self._lock:
                job = self._jobs.get(job_id)
                if job is None:
                    raise KeyError(job_id)
                if job.state == JobState.FAILED and "frame_error" in job.artifacts:
                    frames = [("ERROR", (self._job_dir(job_id) / job.artifacts["frame_error"]).read_bytes())]
                    plan_order_labels = ["ERROR"]
                elif job.state != JobState.READY:
                    raise NotReady(f"job {job_id} is {job.state.value}, not ready to print")
                else:
                    plan_doc = json.loads((self._job_dir(job_id) / job.artifacts["plan"]).read_text())
                    plan_order_labels = plan_doc["order"]
                    frames = [
                        (ch, (self._job_dir(job_id) / job.artifacts[f"frame_{ch.lower()}"]).read_bytes())
                        for ch in plan_order_labels
                    ]
                    self._transition(job, JobState.PRINTING)
            try:
                records = self.printer.write_frames(frames)
            except DeviceWriteError:
                with self._lock:
                    if job.state == JobState.PRINTING:
                        self._transition(job, JobState.READY)
                raise
            with self._lock:
                if job.state == JobState.PRINTING:
                    self._transition(job, JobState.DONE)
            return {"job_id": job_id, "order": plan_order_labels, "frames": records,
                    "device": self.printer.device}

    # -- internals ---------------------------------------------------------

    def _job_dir(self, job_id: str) -> Path:
        return self.data_dir / "jobs" / job_id

    def _persist(self, job: PrintJob) -> None:
        (self._job_dir(job.id) / "job.json").write_text(
            json.dumps(job.to_dict(), indent=2, sort_keys=True) + "\n"
        )

    def _transition(self, job: PrintJob, new_state: JobState) -> None:
        if new_state not in _ALLOWED_TRANSITIONS[job.state]:
            raise RuntimeError(f"illegal transition {job.state.value} -> {new_state.value}")
        job.state = new_state
        job.updated_at = _utcnow()
        job.history.append(new_state.value)
        self._persist(job)

    def _worker(self) -> None:
        while True:
            job_id = self._queue.get()
            if job_id is None:
                return
            try:
                self._execute(job_id)
            except Exception:  # noqa: BLE001 -- workers must not die
                pass

    def _execute(self, job_id: str) -> None:
        with self._lock:
            job = self._jobs[job_id]
            cfg = self._configs[job_id]
        job_dir = self._job_dir(job_id)
        image = (job_dir / "input.png").read_bytes()
        stylizer = None
        if job.stylize:
            stylizer = StylizerClient(self.config.stylizer_url, self.config.stylizer_timeout_ms)

        def on_stage(stage: str) -> None:
            target = JobState.STYLIZING if stage == pipeline.STAGE_STYLIZING else JobState.SEPARATING
            with self._lock:
                self._transition(job, target)

        try:
            result = self._pipeline_run(
                image, job.mode, job.strategy, cfg,
                stylizer=stylizer, strict_stylize=job.strict_stylize, on_stage=on_stage,
            )
        except StylizerError as exc:
            self._fail(job, "E-STY", str(exc))
            return
        except Exception as exc:  # noqa: BLE001 -- any pipeline panic
            self._fail(job, "E-SEP", str(exc))
            return

        try:
            written = pipeline.write_artifacts(job_dir, result, job.mode, emit_frames=True)
        except Exception as exc:  # noqa: BLE001
            self._fail(job, "E-ENC", str(exc))
            return
        with self._lock:
            if result.stylized_png is not None:
                (job_dir / "stylized.png").write_bytes(result.stylized_png)
                job.artifacts["stylized"] = "stylized.png"
            job.stylizer_fallback = result.stylizer_fallback
            for name, path in written.items():
                job.artifacts[name] = path.name
            job.plan = {"order": list(result.plan.order), "counts": dict(result.counts)}
            self._transition(job, JobState.READY)

    def _fail(self, job: PrintJob, code: str, message: str) -> None:
        job_dir = self._job_dir(job.id)
        try:
            stencil = render_error_stencil(code, ERROR_STENCIL_W, ERROR_STENCIL_H)
            frame = pack_raster(stencil)
            (job_dir / "error.escpos").write_bytes(frame.data)
            error_artifact = True
        except Exception:  # noqa: BLE001 -- the error stencil is best-effort
            error_artifact = False
        with self._lock:
            job.error = {"code": code, "message": message}
            if error_artifact:
                job.artifacts["frame_error"] = "error.escpos"
            self._transition(job, JobState.FAILED)
