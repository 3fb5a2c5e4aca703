"""Published JSON schemas for stored labels and API payloads."""

from __future__ import annotations

_EVIDENCE = {
    "type": "object",
    "required": ["segment_index", "text", "probability", "match_id"],
    "properties": {
        "segment_index": {"type": "integer", "minimum": 0},
        "text": {"type": "string"},
        "probability": {"type": "number", "minimum": 0, "maximum": 1},
        "match_id": {"type": "string"},
    },
}

_CASE_ENTRY = {
    "type": "object",
    "required": ["case_id", "title", "rating", "evidence"],
    "properties": {
        "case_id": {"type": "string"},
        "title": {"type": "string"},
        "rating": {"enum": ["blocker", "bad", "neutral", "good"]},
        "evidence": {"type": "array", "items": _EVIDENCE},
    },
}

LABEL_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["service", "grade", "generated_at", "groups"],
    "properties": {
        "service": {
            "type": "object",
            "required": ["id"],
            "properties": {"id": {"type": "string"}, "name": {"type": "string"}},
        },
        "grade": {"enum": ["A", "B", "C", "D", "E", "Ungraded"]},
        "generated_at": {"type": "string"},
        "groups": {
            "type": "object",
            "required": ["blocker", "bad", "neutral", "good"],
            "properties": {
                rating: {"type": "array", "items": _CASE_ENTRY}
                for rating in ("blocker", "bad", "neutral", "good")
            },
        },
    },
}

_SERVED_EVIDENCE = {
    "type": "object",
    "required": [
        "segment_index",
        "text",
        "probability",
        "probability_percent",
        "match_id",
        "feedback",
    ],
    "properties": {
        **_EVIDENCE["properties"],
        "probability_percent": {"type": "integer", "minimum": 0, "maximum": 100},
        "feedback": {
            "type": "object",
            "required": ["up", "down"],
            "properties": {
                "up": {"type": "integer", "minimum": 0},
                "down": {"type": "integer", "minimum": 0},
            },
        },
    },
}

_SERVED_CASE_ENTRY = {
    "type": "object",
    "required": ["case_id", "title", "rating", "evidence"],
    "properties": {
        **_CASE_ENTRY["properties"],
        "evidence": {"type": "array", "items": _SERVED_EVIDENCE},
    },
}

SERVED_LABEL_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["service", "grade", "generated_at", "groups"],
    "properties": {
        **LABEL_SCHEMA["properties"],
        "groups": {
            "type": "object",
            "required": ["blocker", "bad", "neutral", "good"],
            "properties": {
                rating: {"type": "array", "items": _SERVED_CASE_ENTRY}
                for rating in ("blocker", "bad", "neutral", "good")
            },
        },
    },
}

FEEDBACK_ACK_SCHEMA = {
    "type": "object",
    "required": ["status", "match_id", "counts"],
    "properties": {
        "status": {"const": "ok"},
        "match_id": {"type": "string"},
        "counts": {
            "type": "object",
            "required": ["up", "down"],
            "properties": {
                "up": {"type": "integer", "minimum": 0},
                "down": {"type": "integer", "minimum": 0},
            },
        },
    },
}

ERROR_SCHEMA = {
    "type": "object",
    "required": ["error", "detail"],
    "properties": {"error": {"type": "string"}, "detail": {"type": "string"}},
}

CASES_SCHEMA = {
    "type": "array",
    "items": {
        "type": "object",
        "required": ["id", "title", "rating"],
        "properties": {
            "id": {"type": "string"},
            "title": {"type": "string"},
            "rating": {"enum": ["blocker", "bad", "neutral", "good"]},
        },
    },
}

JOB_SCHEMA = {
    "type": "object",
    "required": ["job_id", "status"],
    "properties": {
        "job_id": {"type": "string"},
        "status": {"enum": ["pending", "running", "done", "failed"]},
        "result": {"type": ["object", "null"]},
        "detail": {"type": ["string", "null"]},
    },
}

EXPORT_LINE_SCHEMA = {
    "type": "object",
    "required": [
        "match_id",
        "vote",
        "client_id",
        "timestamp",
        "case_id",
        "excerpt",
        "probability",
    ],
    "properties": {
        "match_id": {"type": "string"},
        "vote": {"enum": ["up", "down"]},
        "client_id": {"type": "string"},
        "timestamp": {"type": "number"},
        "case_id": {"type": ["string", "null"]},
        "excerpt": {"type": ["string", "null"]},
        "probability": {"type": ["number", "null"]},
    },
}
