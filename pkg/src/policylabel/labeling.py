"""Policy segmentation, full-catalog scanning and privacy-label assembly.

A raw policy is split on newlines into segments, every segment is scored
against every case in the catalog, and the predicted matches drive a letter
grade plus a three-level label: grade, cases grouped by rating, and per-case
evidence excerpts with probabilities.
"""

from __future__ import annotations

import hashlib
import json
import os
import re
from dataclasses import dataclass
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path
from typing import Sequence

from .corpus import Case, CaseCatalog, Rating
from .evaluation import ClassReport, classification_report

RATING_ORDER = ("blocker", "bad", "neutral", "good")
RATING_COLORS = {"blocker": "red", "bad": "yellow", "neutral": "grey", "good": "green"}

_LIST_MARKER = re.compile(r"^\s*([-*•◦‣]|\d+[.)]|[a-z][.)]|\([a-z0-9]+\))\s+", re.IGNORECASE)
_TERMINAL_PUNCTUATION = (".", "!", "?", "…")


class SegmentKind(str, Enum):
    PARAGRAPH = "paragraph"
    TITLE = "title"
    LIST_ITEM = "list_item"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class Segment:
    index: int
    text: str
    kind: SegmentKind


def segment_policy(text: str) -> list[Segment]:
    """Split policy text on newline characters into contiguous segments.

    Blank and whitespace-only lines are dropped. Kind heuristics: a leading
    bullet or enumeration marker makes a list item; a short line (under 8
    words) without terminal punctuation looks like a section title; anything
    else is a paragraph. The kind only informs downstream consumers (section
    titles are a known false-positive source); nothing is suppressed here.
    """
    segments = []
    for line in text.splitlines():
        stripped = line.strip()
        if not stripped:
            continue
        segments.append(
            Segment(index=len(segments), text=stripped, kind=_classify_line(stripped))
        )
    return segments


def _classify_line(line: str) -> SegmentKind:
    if _LIST_MARKER.match(line):
        return SegmentKind.LIST_ITEM
    if len(line.split()) < 8 and not line.endswith(_TERMINAL_PUNCTUATION):
        return SegmentKind.TITLE
    return SegmentKind.PARAGRAPH


@dataclass(frozen=True)
class MatchResult:
    segment_index: int
    case_id: str
    probability: float
    predicted: bool
    match_id: str


def match_id_for(service_id: str, segment_index: int, case_id: str) -> str:
    digest = hashlib.sha1(f"{service_id}\n{segment_index}\n{case_id}".encode()).hexdigest()
    return digest[:16]


def scan_policy(
    matcher,
    segments: Sequence[Segment],
    catalog: CaseCatalog,
    threshold: float | None = None,
    service_id: str = "",
    batch_size: int = 256,
) -> list[MatchResult]:
    """Score every (segment, case) pair in the catalog.

    Returns |segments| x |catalog| results ordered by (segment_index,
    case_id); every pair carries its probability, predicted ones are flagged
    against ``threshold`` (the matcher's own decision threshold by default).
    """
    if threshold is None:
        threshold = matcher.decision_threshold
    cases = sorted(catalog, key=lambda c: c.id)
    grid = [(segment, case) for segment in segments for case in cases]
    results: list[MatchResult] = []
    for start in range(0, len(grid), batch_size):
        chunk = grid[start : start + batch_size]
        proba = matcher.predict_proba([(c.title, s.text) for s, c in chunk])[:, 1]
        for (segment, case), p in zip(chunk, proba):
            results.append(
                MatchResult(
                    segment_index=segment.index,
                    case_id=case.id,
                    probability=float(p),
                    predicted=bool(p >= threshold),
                    match_id=match_id_for(service_id, segment.index, case.id),
                )
            )
    return results


def evaluate_scan(
    results: Sequence[MatchResult],
    gold_tags: set[tuple[int, str]],
    metadata: dict | None = None,
) -> ClassReport:
    """Case-level report over the full segment x case grid.

    ``gold_tags`` holds the (segment_index, case_id) pairs two reviewers
    tagged as true matches; any grid cell not tagged is a gold non-match.
    """
    known_cells = {(r.segment_index, r.case_id) for r in results}
    unknown = [tag for tag in gold_tags if tag not in known_cells]
    if unknown:
        raise ValueError(f"gold tags outside the scan grid: {sorted(unknown)[:3]}")
    y_true = [int((r.segment_index, r.case_id) in gold_tags) for r in results]
    y_pred = [int(r.predicted) for r in results]
    meta = {"classes": {"0": "False", "1": "True"}, **(metadata or {})}
    return classification_report(y_true, y_pred, metadata=meta)


class Grade(str, Enum):
    A = "A"
    B = "B"
    C = "C"
    D = "D"
    E = "E"
    UNGRADED = "Ungraded"


def assign_grade(identified_cases: Sequence[Case]) -> Grade:
    """Letter grade from blocker presence and the bad-case fraction.

    Evaluated most-severe-first over disjoint bands: any blocker forces E;
    otherwise with b = bad / identified, b > 0.75 is D, 0.5 < b <= 0.75 is C,
    0.25 <= b <= 0.5 is B and b < 0.25 is A. No identified cases: Ungraded.
    """
    if not identified_cases:
        return Grade.UNGRADED
    if any(c.rating is Rating.BLOCKER for c in identified_cases):
        return Grade.E
    bad_fraction = sum(c.rating is Rating.BAD for c in identified_cases) / len(
        identified_cases
    )
    if bad_fraction > 0.75:
        return Grade.D
    if bad_fraction > 0.5:
        return Grade.C
    if bad_fraction >= 0.25:
        return Grade.B
    return Grade.A


@dataclass
class PrivacyLabel:
    """Three-level label: grade, rating groups, per-case evidence."""

    service: dict
    grade: Grade
    groups: dict[str, list[dict]]
    generated_at: str
    threshold: float | None = None

    def to_dict(self) -> dict:
        return {
            "service": self.service,
            "grade": self.grade.value,
            "generated_at": self.generated_at,
            "groups": self.groups,
        }

    def match_index(self) -> dict[str, dict]:
        """match_id -> evidence context for feedback joins."""
        index = {}
        for group in self.groups.values():
            for entry in group:
                for evidence in entry["evidence"]:
                    index[evidence["match_id"]] = {
                        "case_id": entry["case_id"],
                        "segment_index": evidence["segment_index"],
                        "text": evidence["text"],
                        "probability": evidence["probability"],
                    }
        return index


def build_label(
    service: dict,
    scan_results: Sequence[MatchResult],
    catalog: CaseCatalog,
    segments: Sequence[Segment],
    generated_at: str | None = None,
) -> PrivacyLabel:
    """Assemble the label from a completed scan.

    Identified cases are those with at least one predicted match; they are
    grouped by rating (blocker, bad, neutral, good — severest first) and each
    carries its predicted evidence excerpts sorted by probability descending.
    """
    segment_text = {s.index: s.text for s in segments}
    evidence_by_case: dict[str, list[MatchResult]] = {}
    for result in scan_results:
        if result.predicted:
            evidence_by_case.setdefault(result.case_id, []).append(result)

    identified = [catalog[case_id] for case_id in evidence_by_case]
    grade = assign_grade(identified)

    groups: dict[str, list[dict]] = {rating: [] for rating in RATING_ORDER}
    for case in sorted(identified, key=lambda c: c.id):
        evidence = sorted(
            evidence_by_case[case.id], key=lambda r: (-r.probability, r.segment_index)
        )
        groups[case.rating.value].append(
            {
                "case_id": case.id,
                "title": case.title,
                "rating": case.rating.value,
                "evidence": [
                    {
                        "segment_index": r.segment_index,
                        "text": segment_text.get(r.segment_index, ""),
                        "probability": round(r.probability, 6),
                        "match_id": r.match_id,
                    }
                    for r in evidence
                ],
            }
        )

    if generated_at is None:
        generated_at = _timestamp()
    return PrivacyLabel(
        service=service, grade=grade, groups=groups, generated_at=generated_at
    )


def _timestamp() -> str:
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    if epoch is not None:
        moment = datetime.fromtimestamp(int(epoch), tz=timezone.utc)
    else:
        moment = datetime.now(tz=timezone.utc)
    return moment.strftime("%Y-%m-%dT%H:%M:%SZ")


def write_label(label: PrivacyLabel, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(label.to_dict(), fh, indent=2, ensure_ascii=False, sort_keys=True)
        fh.write("\n")
