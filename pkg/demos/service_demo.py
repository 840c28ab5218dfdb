#!/usr/bin/env python3
"""Exercise the whole job service loop in-process.

Starts the stub stylizer and a job service (capture-file printer), submits a
stylized job, polls it to ready exactly like the operator console does, then
prints it and shows the execution record.
"""

import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from separate_demo import build_photo

from meshpress.jobs import JobService
from meshpress.settings import ServiceConfig
from meshpress.stylizer import start_stub_server


def main() -> None:
    stub = start_stub_server(port=0)
    stylizer_url = f"http://127.0.0.1:{stub.server_address[1]}/stylize"
    capture = Path("demo-out") / "printer-capture.escpos"
    capture.parent.mkdir(exist_ok=True)

    cfg = ServiceConfig(
        data_dir="demo-out/service-data",
        printer_device=f"capture:{capture}",
        stylizer_url=stylizer_url,
    )
    service = JobService(cfg)
    try:
        job = service.submit(build_photo(), stylize=True)
        print(f"submitted job {job['id']} (state {job['state']})")
        while job["state"] not in ("ready", "failed"):
            time.sleep(0.1)
            job = service.get(job["id"])
            print(f"  ... {job['state']}")
        if job["state"] == "failed":
            print(f"failed: {job['error']}")
            return
        record = service.print_job(job["id"])
        for frame in record["frames"]:
            print(f"printed layer {frame['layer']}: {frame['bytes']} bytes "
                  f"in {frame['duration_ms']} ms")
        print(f"raster stream captured to {capture}")
    finally:
        service.close()
        stub.shutdown()
        stub.server_close()


if __name__ == "__main__":
    main()
