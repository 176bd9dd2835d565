"""Job lifecycle for long-running paint requests: bounded worker pool,
directory-per-job persistence, monotone progress, cooperative cancellation.
"""

from __future__ import annotations

import hashlib
import json
import threading
import time
import uuid
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, asdict
from pathlib import Path

from ..canvas import encode_png, rasterize, spec_from_json
from ..sampler import (
    PaintCancelled,
    ResampleConfig,
    Snapshot,
    build_resample_plan,
    count_ops,
    paint,
)
from ..schedule import GaussianNoiseSource, linear_beta_schedule
from .denoisers import resolve_denoiser

TERMINAL_STATES = frozenset({"done", "failed", "cancelled"})
DEFAULT_T = 250


class QueueFull(RuntimeError):
    pass


class UnknownJob(KeyError):
    pass


class TerminalJob(RuntimeError):
    pass


@dataclass
class JobRecord:
    id: str
    state: str  # queued -> running -> done | failed | cancelled
    progress: float
    spec: dict
    config: dict
    error: str | None = None
    created_at: float = 0.0
    started_at: float | None = None
    finished_at: float | None = None
    result: dict | None = None
    n_snapshots: int = 0
    warnings: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "JobRecord":
        return cls(**data)


def normalize_config(config: dict | None) -> dict:
    """Fill defaults and validate the per-job sampler configuration."""
    config = dict(config or {})
    out = {
        "strategy": config.pop("strategy", "stop:100"),
        "lambda": int(config.pop("lambda", config.pop("lam", 10))),
        "repeats": int(config.pop("repeats", 10)),
        "seed": int(config.pop("seed", 0)),
        "T": int(config.pop("T", DEFAULT_T)),
        "denoiser": config.pop("denoiser", None),
        "snapshots": bool(config.pop("snapshots", True)),
        "clamp_x0": bool(config.pop("clamp_x0", True)),
        "known_noise_index": config.pop("known_noise_index", "t-1"),
    }
    if config:
        raise ValueError(f"unknown config keys: {sorted(config)}")
    if out["known_noise_index"] not in ("t-1", "t"):
        raise ValueError("known_noise_index must be 't-1' or 't'")
    # validates strategy/lambda/repeats eagerly so submission fails fast
    ResampleConfig(lam=out["lambda"], repeats=out["repeats"], strategy=out["strategy"])
    if out["T"] < 2:
        raise ValueError("T must be >= 2")
    return out


class JobStore:
    """Directory-per-job layout with JSON metadata and a content-addressed
    blob area for result images. All writes go through the owning manager's
    single writer lock."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        (self.root / "jobs").mkdir(parents=True, exist_ok=True)
        (self.root / "blobs").mkdir(parents=True, exist_ok=True)

    def job_dir(self, job_id: str) -> Path:
        return self.root / "jobs" / job_id

    def save_record(self, record: JobRecord) -> None:
        d = self.job_dir(record.id)
        d.mkdir(parents=True, exist_ok=True)
        tmp = d / "record.json.tmp"
        tmp.write_text(json.dumps(record.to_dict(), indent=2))
        tmp.replace(d / "record.json")

    def load_record(self, job_id: str) -> JobRecord:
        path = self.job_dir(job_id) / "record.json"
        if not path.exists():
            raise UnknownJob(job_id)
        return JobRecord.from_dict(json.loads(path.read_text()))

    def put_blob(self, data: bytes, suffix: str = ".png") -> str:
        digest = hashlib.sha256(data).hexdigest()
        rel = f"blobs/{digest}{suffix}"
        path = self.root / rel
        if not path.exists():
            path.write_bytes(data)
        return rel

    def read(self, relpath: str) -> bytes:
        return (self.root / relpath).read_bytes()

    def save_snapshot(self, job_id: str, index: int, png: bytes) -> None:
        d = self.job_dir(job_id) / "snapshots"
        d.mkdir(parents=True, exist_ok=True)
        (d / f"{index}.png").write_bytes(png)

    def read_snapshot(self, job_id: str, index: int) -> bytes:
        path = self.job_dir(job_id) / "snapshots" / f"{index}.png"
        if not path.exists():
            raise UnknownJob(f"{job_id}/snapshots/{index}")
        return path.read_bytes()


class JobManager:
    """Executes paint jobs on a bounded FIFO pool; paint jobs are
    long-running and must not starve status reads, which only touch the
    in-memory record map."""

    def __init__(
        self,
        store: JobStore,
        max_workers: int | None = None,
        queue_size: int = 32,
        default_denoiser: str = "flat",
    ):
        import os

        self.store = store
        self.default_denoiser = default_denoiser
        self.queue_size = queue_size
        workers = max_workers or min(4, os.cpu_count() or 1)
        self._pool = ThreadPoolExecutor(max_workers=workers)
        self._lock = threading.Lock()
        self._records: dict[str, JobRecord] = {}
        self._cancel_events: dict[str, threading.Event] = {}

    # -- public API ---------------------------------------------------------

    def submit(self, spec: dict, config: dict | None = None) -> str:
        config = normalize_config(config)
        spec_from_json(spec)  # validate (and fail fast on bad patch payloads)
        with self._lock:
            active = sum(
                1 for r in self._records.values() if r.state not in TERMINAL_STATES
            )
            if active >= self.queue_size:
                raise QueueFull(f"{active} jobs already active")
            job_id = uuid.uuid4().hex[:12]
            record = JobRecord(
                id=job_id,
                state="queued",
                progress=0.0,
                spec=spec,
                config=config,
                created_at=time.time(),
            )
            self._records[job_id] = record
            self._cancel_events[job_id] = threading.Event()
            self.store.save_record(record)
        self._pool.submit(self._run, job_id)
        return job_id

    def get(self, job_id: str) -> JobRecord:
        with self._lock:
            if job_id in self._records:
                return self._records[job_id]
        record = self.store.load_record(job_id)  # restart recovery
        with self._lock:
            self._records.setdefault(job_id, record)
        return record

    def cancel(self, job_id: str) -> JobRecord:
        with self._lock:
            record = self._records.get(job_id)
        if record is None:
            record = self.get(job_id)
        if record.state in TERMINAL_STATES:
            raise TerminalJob(job_id)
        event = self._cancel_events.get(job_id)
        if event is not None:
            event.set()
        else:
            # recovered from disk with no live worker (e.g. after restart)
            self._update(record, state="cancelled", finished_at=time.time())
        return record

    def shutdown(self) -> None:
        self._pool.shutdown(wait=True)

    # -- execution ----------------------------------------------------------

    def _update(self, record: JobRecord, persist: bool = True, **changes) -> None:
        with self._lock:
            for key, value in changes.items():
                if key == "progress":
                    value = max(record.progress, float(value))
                setattr(record, key, value)
            if persist:
                self.store.save_record(record)

    def _run(self, job_id: str) -> None:
        record = self._records[job_id]
        cancel = self._cancel_events[job_id]
        if cancel.is_set():
            self._update(record, state="cancelled", finished_at=time.time())
            return
        self._update(record, state="running", started_at=time.time())
        try:
            self._paint_job(record, cancel)
        except PaintCancelled:
            self._update(record, state="cancelled", finished_at=time.time())
        except Exception as exc:  # noqa: BLE001 - job boundary
            self._update(record, state="failed", error=str(exc), finished_at=time.time())

    def _paint_job(self, record: JobRecord, cancel: threading.Event) -> None:
        cfg = record.config
        schedule = linear_beta_schedule(cfg["T"])
        comp_spec = spec_from_json(record.spec)
        comp = rasterize(comp_spec)
        if comp.warnings:
            self._update(record, warnings=comp.warnings)
        plan = build_resample_plan(
            ResampleConfig(lam=cfg["lambda"], repeats=cfg["repeats"], strategy=cfg["strategy"]),
            schedule.T,
        )
        expected = count_ops(plan)
        denoiser = resolve_denoiser(
            cfg["denoiser"] or self.default_denoiser, schedule, comp.known.shape
        )
        rng = GaussianNoiseSource(cfg["seed"], 0)
        snapshot_every = max(1, expected.n_dn // 40) if cfg["snapshots"] else 0

        last_persisted = [0.0]

        def on_progress(done: int, total: int) -> None:
            frac = done / total
            persist = frac - last_persisted[0] >= 0.05 or frac >= 1.0
            if persist:
                last_persisted[0] = frac
            self._update(record, persist=persist, progress=frac)

        def on_snapshot(snap: Snapshot) -> None:
            index = record.n_snapshots
            self.store.save_snapshot(record.id, index, encode_png(snap.image))
            self._update(record, persist=False, n_snapshots=index + 1)

        result = paint(
            comp,
            denoiser,
            schedule,
            plan,
            rng,
            clamp_x0=cfg["clamp_x0"],
            known_noise_index=cfg["known_noise_index"],
            snapshot_every=snapshot_every,
            on_snapshot=on_snapshot,
            progress=on_progress,
            should_cancel=cancel.is_set,
        )

        png = encode_png(result.image)
        rel = self.store.put_blob(png)
        manifest = {
            "seed": cfg["seed"],
            "config": cfg,
            "schedule_digest": schedule.digest(),
            "denoiser_digest": denoiser.digest(),
            "ops": result.ops.to_dict(),
            "result_sha256": hashlib.sha256(png).hexdigest(),
        }
        job_dir = self.store.job_dir(record.id)
        (job_dir / "report.json").write_text(json.dumps(result.ops.to_dict(), indent=2))
        (job_dir / "manifest.json").write_text(json.dumps(manifest, indent=2))
        self._update(
            record,
            state="done",
            progress=1.0,
            finished_at=time.time(),
            result={
                "png": rel,
                "sha256": manifest["result_sha256"],
                "ops": result.ops.to_dict(),
            },
        )
