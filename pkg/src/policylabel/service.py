"""HTTP API serving labels, on-demand analysis and the feedback loop.

Feedback is event-sourced: every vote is appended to a JSONL log (flushed per
write) and aggregates are an in-memory index that can always be rebuilt by
recounting the log. One vote per (client, match) is retained, latest wins.
"""

from __future__ import annotations

import hashlib
import json
import threading
import time
import uuid
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

import jsonschema
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse, PlainTextResponse

from . import schemas
from .corpus import CaseCatalog
from .labeling import PrivacyLabel, build_label, scan_policy, segment_policy

VALID_VOTES = ("up", "down")


@dataclass(frozen=True)
class FeedbackEvent:
    match_id: str
    vote: str
    client_id: str
    timestamp: float

    def to_dict(self) -> dict:
        return {
            "match_id": self.match_id,
            "vote": self.vote,
            "client_id": self.client_id,
            "timestamp": self.timestamp,
        }


class FeedbackStore:
    """Append-only event log with latest-wins per (client_id, match_id)."""

    def __init__(self, log_path: str | Path):
        self.log_path = Path(log_path)
        self._lock = threading.Lock()
        self._latest: dict[tuple[str, str], FeedbackEvent] = {}
        if self.log_path.exists():
            for event in self._read_log():
                self._latest[(event.client_id, event.match_id)] = event

    def _read_log(self) -> Iterable[FeedbackEvent]:
        with open(self.log_path, encoding="utf-8") as fh:
            for line in fh:
                if line.strip():
                    record = json.loads(line)
                    yield FeedbackEvent(
                        match_id=record["match_id"],
                        vote=record["vote"],
                        client_id=record["client_id"],
                        timestamp=record["timestamp"],
                    )

    def append(self, event: FeedbackEvent) -> None:
        if event.vote not in VALID_VOTES:
            raise ValueError(f"invalid vote {event.vote!r}")
        with self._lock:
            self.log_path.parent.mkdir(parents=True, exist_ok=True)
            with open(self.log_path, "a", encoding="utf-8") as fh:
                fh.write(json.dumps(event.to_dict(), sort_keys=True) + "\n")
                fh.flush()
            self._latest[(event.client_id, event.match_id)] = event

    def counts_for(self, match_id: str) -> dict[str, int]:
        counts = {"up": 0, "down": 0}
        with self._lock:
            for (_, mid), event in self._latest.items():
                if mid == match_id:
                    counts[event.vote] += 1
        return counts

    def all_counts(self) -> dict[str, dict[str, int]]:
        counts: dict[str, dict[str, int]] = {}
        with self._lock:
            for (_, match_id), event in self._latest.items():
                bucket = counts.setdefault(match_id, {"up": 0, "down": 0})
                bucket[event.vote] += 1
        return counts

    def recount_from_log(self) -> dict[str, dict[str, int]]:
        """Brute-force recount of the on-disk log; must equal ``all_counts``."""
        latest: dict[tuple[str, str], FeedbackEvent] = {}
        if self.log_path.exists():
            for event in self._read_log():
                latest[(event.client_id, event.match_id)] = event
        counts: dict[str, dict[str, int]] = {}
        for (_, match_id), event in latest.items():
            bucket = counts.setdefault(match_id, {"up": 0, "down": 0})
            bucket[event.vote] += 1
        return counts

    def events_since(self, since: float = 0.0) -> list[FeedbackEvent]:
        with self._lock:
            events = [e for e in self._latest.values() if e.timestamp >= since]
        return sorted(events, key=lambda e: (e.timestamp, e.client_id, e.match_id))


class LabelStore:
    """Stored labels per service plus the match registry for feedback joins."""

    def __init__(self):
        self._labels: dict[str, dict] = {}
        self._matches: dict[str, dict] = {}
        self._lock = threading.Lock()

    def put(self, service_id: str, label: PrivacyLabel) -> None:
        self.put_payload(service_id, label.to_dict())

    def put_payload(self, service_id: str, payload: dict) -> None:
        jsonschema.validate(payload, schemas.LABEL_SCHEMA)
        matches = {}
        for group in payload["groups"].values():
            for entry in group:
                for evidence in entry["evidence"]:
                    matches[evidence["match_id"]] = {
                        "case_id": entry["case_id"],
                        "segment_index": evidence["segment_index"],
                        "text": evidence["text"],
                        "probability": evidence["probability"],
                    }
        with self._lock:
            self._labels[service_id] = payload
            self._matches.update(matches)

    def get(self, service_id: str) -> dict | None:
        with self._lock:
            return self._labels.get(service_id)

    def match(self, match_id: str) -> dict | None:
        with self._lock:
            return self._matches.get(match_id)

    def register_matches(self, index: dict[str, dict]) -> None:
        with self._lock:
            self._matches.update(index)

    def services(self) -> list[str]:
        with self._lock:
            return sorted(self._labels)


@dataclass
class AnalysisJob:
    job_id: str
    status: str = "pending"
    result: dict | None = None
    detail: str | None = None


@dataclass
class ServiceState:
    """Everything the request handlers share; the matcher is immutable."""

    catalog: CaseCatalog
    matcher: object
    labels: LabelStore = field(default_factory=LabelStore)
    feedback: FeedbackStore | None = None
    scan_threshold: float | None = None
    async_segment_threshold: int = 300
    jobs: dict[str, AnalysisJob] = field(default_factory=dict)
    analyze_cache: dict[str, dict] = field(default_factory=dict)

    def analyze_text(self, text: str) -> dict:
        """segment -> scan -> label, cached by content hash."""
        content_hash = hashlib.sha256(text.encode("utf-8")).hexdigest()
        cached = self.analyze_cache.get(content_hash)
        if cached is not None:
            return cached
        segments = segment_policy(text)
        service_id = f"sha256:{content_hash[:16]}"
        results = scan_policy(
            self.matcher,
            segments,
            self.catalog,
            threshold=self.scan_threshold,
            service_id=service_id,
        )
        label = build_label(
            {"id": service_id, "name": "ad-hoc analysis"},
            results,
            self.catalog,
            segments,
        )
        stored = label.to_dict()
        jsonschema.validate(stored, schemas.LABEL_SCHEMA)
        self.analyze_cache[content_hash] = stored
        self.labels.register_matches(label.match_index())
        return stored


def _error(status_code: int, error: str, detail: str) -> JSONResponse:
    return JSONResponse(status_code=status_code, content={"error": error, "detail": detail})


def serve_label(payload: dict, feedback: FeedbackStore | None) -> dict:
    """Decorate a stored label with percentages and feedback aggregates."""
    counts = feedback.all_counts() if feedback is not None else {}
    served = json.loads(json.dumps(payload))
    for group in served["groups"].values():
        for entry in group:
            for evidence in entry["evidence"]:
                evidence["probability_percent"] = round(evidence["probability"] * 100)
                evidence["feedback"] = counts.get(
                    evidence["match_id"], {"up": 0, "down": 0}
                )
    return served


def create_app(state: ServiceState) -> FastAPI:
    app = FastAPI(title="policylabel", docs_url=None, redoc_url=None)
    app.state.service = state

    @app.get("/health")
    def health():
        return {"status": "ok"}

    @app.get("/api/cases")
    def cases():
        return state.catalog.to_records()

    @app.get("/api/services/{service_id}/label")
    def get_label(service_id: str):
        payload = state.labels.get(service_id)
        if payload is None:
            return _error(404, "not_found", f"no label stored for {service_id!r}")
        return serve_label(payload, state.feedback)

    @app.post("/api/analyze")
    async def analyze(request: Request):
        try:
            body = await request.json()
        except Exception:
            return _error(400, "bad_request", "body must be JSON")
        text = body.get("text") if isinstance(body, dict) else None
        if not text or not str(text).strip():
            return _error(400, "validation_error", "text must be a non-empty string")
        if state.matcher is None:
            return _error(503, "matcher_unavailable", "no matcher loaded")
        text = str(text)
        if len(segment_policy(text)) > state.async_segment_threshold:
            job = AnalysisJob(job_id=uuid.uuid4().hex)
            state.jobs[job.job_id] = job
            thread = threading.Thread(target=_run_job, args=(state, job, text), daemon=True)
            thread.start()
            return {"job_id": job.job_id}
        return state.analyze_text(text)

    @app.get("/api/jobs/{job_id}")
    def job_status(job_id: str):
        job = state.jobs.get(job_id)
        if job is None:
            return _error(404, "not_found", f"unknown job {job_id!r}")
        return {
            "job_id": job.job_id,
            "status": job.status,
            "result": job.result,
            "detail": job.detail,
        }

    @app.post("/api/feedback")
    async def submit_feedback(request: Request):
        try:
            body = await request.json()
        except Exception:
            return _error(400, "bad_request", "body must be JSON")
        match_id = body.get("match_id")
        vote = body.get("vote")
        client_id = body.get("client_id")
        if vote not in VALID_VOTES:
            return _error(400, "validation_error", f"vote must be one of {VALID_VOTES}")
        if not match_id or not client_id:
            return _error(400, "validation_error", "match_id and client_id are required")
        if state.labels.match(match_id) is None:
            return _error(404, "not_found", f"unknown match_id {match_id!r}")
        if state.feedback is None:
            return _error(503, "feedback_unavailable", "no feedback store configured")
        event = FeedbackEvent(
            match_id=match_id, vote=vote, client_id=client_id, timestamp=time.time()
        )
        state.feedback.append(event)
        return {
            "status": "ok",
            "match_id": match_id,
            "counts": state.feedback.counts_for(match_id),
        }

    @app.get("/api/feedback/export")
    def export_feedback(since: float = 0.0):
        if state.feedback is None:
            return _error(503, "feedback_unavailable", "no feedback store configured")
        lines = []
        for event in state.feedback.events_since(since):
            match = state.labels.match(event.match_id) or {}
            record = event.to_dict()
            record.update(
                case_id=match.get("case_id"),
                excerpt=match.get("text"),
                probability=match.get("probability"),
            )
            lines.append(json.dumps(record, ensure_ascii=False, sort_keys=True))
        return PlainTextResponse(
            "\n".join(lines) + ("\n" if lines else ""),
            media_type="application/jsonl",
        )

    return app


def _run_job(state: ServiceState, job: AnalysisJob, text: str) -> None:
    job.status = "running"
    try:
        job.result = state.analyze_text(text)
        job.status = "done"
    except Exception as exc:  # surfaced through the job endpoint
        job.status = "failed"
        job.detail = str(exc)


def parse_feedback_export(text: str) -> list[dict]:
    """Inverse of the export endpoint's JSONL payload."""
    records = []
    for line in text.splitlines():
        if line.strip():
            record = json.loads(line)
            jsonschema.validate(record, schemas.EXPORT_LINE_SCHEMA)
            records.append(record)
    return records
