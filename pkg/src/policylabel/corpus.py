"""Case catalog, annotation ingestion, cluster validation and dataset splits.

The corpus is the ground truth everything downstream consumes: a catalog of
rated data-practice cases, moderator-approved case-excerpt annotations, and a
curated file grouping contrasting cases into clusters. All structures are
read-only after construction.
"""

from __future__ import annotations

import hashlib
import json
import random
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Iterator


class CorpusError(ValueError):
    """Raised when a corpus document violates a structural invariant."""


class Rating(str, Enum):
    BLOCKER = "blocker"
    BAD = "bad"
    NEUTRAL = "neutral"
    GOOD = "good"


@dataclass(frozen=True)
class Case:
    """A predefined data-practice description with a privacy rating."""

    id: str
    title: str
    rating: Rating
    cluster_id: str | None = None

    @property
    def is_contrasting(self) -> bool:
        return self.cluster_id is not None


@dataclass(frozen=True)
class Excerpt:
    """A span of policy text attributed to a service."""

    id: str
    service_id: str
    text: str
    word_count: int


@dataclass(frozen=True)
class Annotation:
    """A moderated link between a case and an excerpt."""

    case_id: str
    excerpt_id: str
    approved: bool = True

    @property
    def pair_id(self) -> str:
        return f"{self.case_id}::{self.excerpt_id}"


@dataclass(frozen=True)
class Cluster:
    id: str
    member_case_ids: tuple[str, ...]


def word_count(text: str) -> int:
    """Whitespace token count; punctuation stays attached to its word."""
    return len(text.split())


def excerpt_id_for(service_id: str, text: str) -> str:
    """Stable excerpt identity: hash of service and whitespace-normalized text."""
    normalized = " ".join(text.split())
    digest = hashlib.sha1(f"{service_id}\n{normalized}".encode("utf-8")).hexdigest()
    return digest[:16]


class CaseCatalog:
    """Immutable collection of cases keyed by id."""

    def __init__(self, cases: Iterable[Case]):
        self._cases: dict[str, Case] = {}
        for case in cases:
            if case.id in self._cases:
                raise CorpusError(f"duplicate case id: {case.id!r}")
            if not case.title.strip():
                raise CorpusError(f"case {case.id!r} has an empty title")
            self._cases[case.id] = case

    def __len__(self) -> int:
        return len(self._cases)

    def __iter__(self) -> Iterator[Case]:
        return iter(self._cases.values())

    def __contains__(self, case_id: str) -> bool:
        return case_id in self._cases

    def __getitem__(self, case_id: str) -> Case:
        try:
            return self._cases[case_id]
        except KeyError:
            raise CorpusError(f"unknown case id: {case_id!r}") from None

    def get(self, case_id: str) -> Case | None:
        return self._cases.get(case_id)

    @property
    def case_ids(self) -> list[str]:
        return list(self._cases)

    def standalone_cases(self) -> list[Case]:
        return [c for c in self if c.cluster_id is None]

    def contrasting_cases(self) -> list[Case]:
        return [c for c in self if c.cluster_id is not None]

    def rating_histogram(self) -> dict[str, int]:
        hist = {r.value: 0 for r in Rating}
        for case in self:
            hist[case.rating.value] += 1
        return hist

    def with_clusters(self, clusters: "ClusterSet") -> "CaseCatalog":
        """Return a copy whose cases carry cluster membership."""
        membership: dict[str, str] = {}
        for cluster in clusters:
            for case_id in cluster.member_case_ids:
                membership[case_id] = cluster.id
        return CaseCatalog(
            Case(c.id, c.title, c.rating, membership.get(c.id)) for c in self
        )

    def to_records(self) -> list[dict]:
        return [
            {"id": c.id, "title": c.title, "rating": c.rating.value} for c in self
        ]


def ingest_cases(source: str | Path | Iterable[dict]) -> CaseCatalog:
    """Parse and validate a case-catalog document.

    ``source`` is a path to a JSON array or an iterable of record dicts, each
    with ``id``, ``title`` and ``rating``.
    """
    records = _read_json_array(source, "case catalog")
    cases = []
    for record in records:
        for key in ("id", "title", "rating"):
            if key not in record:
                raise CorpusError(f"case record missing {key!r}: {record!r}")
        try:
            rating = Rating(record["rating"])
        except ValueError:
            raise CorpusError(
                f"unknown rating {record['rating']!r} for case {record['id']!r}"
            ) from None
        cases.append(Case(id=str(record["id"]), title=record["title"], rating=rating))
    return CaseCatalog(cases)


class AnnotationSet:
    """Approved annotations plus their deduplicated excerpts.

    Rejected records are retained verbatim (``rejected``) so exports
    round-trip, but they are excluded from everything downstream: the excerpt
    pool holds approved excerpts only, and ``len()`` counts approved
    annotations only.
    """

    def __init__(
        self,
        annotations: Iterable[Annotation],
        excerpts: dict[str, Excerpt],
        rejected: Iterable[dict] = (),
    ):
        self.annotations: list[Annotation] = list(annotations)
        self.excerpts: dict[str, Excerpt] = dict(excerpts)
        self.rejected: list[dict] = list(rejected)
        self._by_case: dict[str, list[Annotation]] = {}
        for ann in self.annotations:
            self._by_case.setdefault(ann.case_id, []).append(ann)

    def __len__(self) -> int:
        return len(self.annotations)

    def __iter__(self) -> Iterator[Annotation]:
        return iter(self.annotations)

    def excerpt(self, excerpt_id: str) -> Excerpt:
        try:
            return self.excerpts[excerpt_id]
        except KeyError:
            raise CorpusError(f"unknown excerpt id: {excerpt_id!r}") from None

    def for_case(self, case_id: str) -> list[Annotation]:
        return list(self._by_case.get(case_id, []))

    def approved_pair_keys(self) -> set[tuple[str, str]]:
        return {(a.case_id, a.excerpt_id) for a in self.annotations}

    def excerpt_ids_by_case(self) -> dict[str, set[str]]:
        return {
            case_id: {a.excerpt_id for a in anns}
            for case_id, anns in self._by_case.items()
        }


def ingest_annotations(
    source: str | Path | Iterable[dict], catalog: CaseCatalog
) -> AnnotationSet:
    """Parse annotation records, keep approved ones, dedupe excerpts.

    Records carry ``case_id``, ``service_id``, ``excerpt`` and ``approved``.
    Excerpts are deduplicated by (service_id, normalized text); a record whose
    case is absent from the catalog is an error.
    """
    records = _read_jsonl_or_list(source)
    excerpts: dict[str, Excerpt] = {}
    approved: list[Annotation] = []
    rejected: list[dict] = []
    seen_pairs: set[tuple[str, str]] = set()
    for record in records:
        case_id = str(record["case_id"])
        if case_id not in catalog:
            raise CorpusError(f"annotation references unknown case {case_id!r}")
        text = record["excerpt"]
        if not text or not text.strip():
            raise CorpusError(f"annotation for case {case_id!r} has empty excerpt")
        service_id = str(record.get("service_id", ""))
        if not bool(record.get("approved", True)):
            rejected.append(
                {
                    "case_id": case_id,
                    "service_id": service_id,
                    "excerpt": text,
                    "approved": False,
                }
            )
            continue
        eid = excerpt_id_for(service_id, text)
        if eid not in excerpts:
            excerpts[eid] = Excerpt(
                id=eid, service_id=service_id, text=text, word_count=word_count(text)
            )
        if (case_id, eid) in seen_pairs:
            continue
        seen_pairs.add((case_id, eid))
        approved.append(Annotation(case_id, eid, approved=True))
    return AnnotationSet(approved, excerpts, rejected)


class ClusterSet:
    def __init__(self, clusters: Iterable[Cluster]):
        self.clusters: list[Cluster] = list(clusters)
        self._member_to_cluster: dict[str, str] = {}
        for cluster in self.clusters:
            for case_id in cluster.member_case_ids:
                self._member_to_cluster[case_id] = cluster.id

    def __len__(self) -> int:
        return len(self.clusters)

    def __iter__(self) -> Iterator[Cluster]:
        return iter(self.clusters)

    def cluster_of(self, case_id: str) -> str | None:
        return self._member_to_cluster.get(case_id)

    def siblings_of(self, case_id: str) -> list[str]:
        """Other member cases of this case's cluster; empty when standalone."""
        cluster_id = self.cluster_of(case_id)
        if cluster_id is None:
            return []
        for cluster in self.clusters:
            if cluster.id == cluster_id:
                return [m for m in cluster.member_case_ids if m != case_id]
        return []

    def to_records(self) -> list[dict]:
        return [
            {"cluster_id": c.id, "case_ids": list(c.member_case_ids)}
            for c in self.clusters
        ]


def load_clusters(
    source: str | Path | Iterable[dict], catalog: CaseCatalog
) -> tuple[ClusterSet, CaseCatalog]:
    """Validate the curated cluster file and tag catalog cases with membership.

    Returns the cluster set and a new catalog whose cases carry ``cluster_id``
    (cases not in any cluster stay standalone). Clusters must be pairwise
    disjoint with 2..6 members, all present in the catalog.
    """
    records = _read_json_array(source, "cluster file")
    clusters = []
    seen_members: set[str] = set()
    for record in records:
        cluster_id = str(record["cluster_id"])
        members = [str(m) for m in record["case_ids"]]
        if len(members) < 2:
            raise CorpusError(f"cluster {cluster_id!r} has fewer than 2 members")
        if len(members) > 6:
            raise CorpusError(f"cluster {cluster_id!r} has more than 6 members")
        if len(set(members)) != len(members):
            raise CorpusError(f"cluster {cluster_id!r} repeats a member")
        for member in members:
            if member not in catalog:
                raise CorpusError(
                    f"cluster {cluster_id!r} references unknown case {member!r}"
                )
            if member in seen_members:
                raise CorpusError(f"case {member!r} appears in two clusters")
            seen_members.add(member)
        clusters.append(Cluster(id=cluster_id, member_case_ids=tuple(members)))
    cluster_set = ClusterSet(clusters)
    return cluster_set, catalog.with_clusters(cluster_set)


@dataclass
class DataSplit:
    """Deterministic train/validation/test partition of approved annotations.

    The test partition is additionally split into ``standalone_set`` and
    ``contrasting_set`` by the annotated case's cluster membership.
    """

    seed: int
    train: list[Annotation]
    validation: list[Annotation]
    test: list[Annotation]
    standalone_set: list[Annotation] = field(default_factory=list)
    contrasting_set: list[Annotation] = field(default_factory=list)

    def partitions(self) -> dict[str, list[Annotation]]:
        return {
            "train": self.train,
            "validation": self.validation,
            "test": self.test,
        }


def split_dataset(
    annotations: AnnotationSet,
    catalog: CaseCatalog,
    ratios: tuple[int, int, int] = (3, 1, 1),
    seed: int = 0,
    by_service: bool = False,
) -> DataSplit:
    """Shuffle approved annotations and cut them in ``ratios`` proportions.

    Pure function of (annotations, ratios, seed): the same inputs always give
    the same split. Partition sizes follow largest-remainder apportionment, so
    each is within one of its exact proportion. ``by_service`` switches to
    grouping whole services into partitions instead of single annotations.
    """
    if len(annotations) < 5:
        raise CorpusError("need at least 5 approved annotations to split")
    if len(ratios) != 3 or any(r <= 0 for r in ratios):
        raise CorpusError(f"ratios must be three positive integers, got {ratios!r}")

    rng = random.Random(seed)
    if by_service:
        ordered = _shuffled_by_service(annotations, rng)
    else:
        ordered = sorted(annotations, key=lambda a: a.pair_id)
        rng.shuffle(ordered)

    sizes = _apportion(len(ordered), ratios)
    train = ordered[: sizes[0]]
    validation = ordered[sizes[0] : sizes[0] + sizes[1]]
    test = ordered[sizes[0] + sizes[1] :]

    standalone = [a for a in test if catalog[a.case_id].cluster_id is None]
    contrasting = [a for a in test if catalog[a.case_id].cluster_id is not None]
    return DataSplit(
        seed=seed,
        train=train,
        validation=validation,
        test=test,
        standalone_set=standalone,
        contrasting_set=contrasting,
    )


def _shuffled_by_service(annotations: AnnotationSet, rng: random.Random) -> list[Annotation]:
    by_service: dict[str, list[Annotation]] = {}
    for ann in sorted(annotations, key=lambda a: a.pair_id):
        service = annotations.excerpt(ann.excerpt_id).service_id
        by_service.setdefault(service, []).append(ann)
    services = sorted(by_service)
    rng.shuffle(services)
    return [ann for service in services for ann in by_service[service]]


def _apportion(n: int, ratios: tuple[int, int, int]) -> list[int]:
    total = sum(ratios)
    exact = [n * r / total for r in ratios]
    sizes = [int(x) for x in exact]
    remainder = n - sum(sizes)
    by_fraction = sorted(range(3), key=lambda i: (-(exact[i] - sizes[i]), i))
    for i in by_fraction[:remainder]:
        sizes[i] += 1
    return sizes


@dataclass(frozen=True)
class CorpusStats:
    case_count: int
    rating_histogram: dict[str, int]
    cluster_count: int
    standalone_count: int
    annotation_count: int
    excerpt_count: int
    mean_excerpt_words: float
    mean_excerpts_per_case: float
    min_excerpts_per_case: int
    max_excerpts_per_case: int

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def catalog_stats(catalog: CaseCatalog, annotations: AnnotationSet) -> CorpusStats:
    """Summary statistics over the catalog and its approved annotations.

    Excerpt counts are taken over every catalog case, so a case without any
    approved annotation contributes zero.
    """
    per_case = {case.id: 0 for case in catalog}
    for ann in annotations:
        per_case[ann.case_id] += 1
    counts = list(per_case.values())
    words = [e.word_count for e in annotations.excerpts.values()]
    cluster_ids = {c.cluster_id for c in catalog if c.cluster_id is not None}
    return CorpusStats(
        case_count=len(catalog),
        rating_histogram=catalog.rating_histogram(),
        cluster_count=len(cluster_ids),
        standalone_count=len(catalog.standalone_cases()),
        annotation_count=len(annotations),
        excerpt_count=len(annotations.excerpts),
        mean_excerpt_words=round(sum(words) / len(words), 4) if words else 0.0,
        mean_excerpts_per_case=round(sum(counts) / len(counts), 4) if counts else 0.0,
        min_excerpts_per_case=min(counts) if counts else 0,
        max_excerpts_per_case=max(counts) if counts else 0,
    )


@dataclass
class Corpus:
    """The loaded corpus: catalog (cluster-tagged), annotations, clusters."""

    catalog: CaseCatalog
    annotations: AnnotationSet
    clusters: ClusterSet | None = None

    @classmethod
    def load(
        cls,
        cases_path: str | Path,
        annotations_path: str | Path,
        clusters_path: str | Path | None = None,
    ) -> "Corpus":
        catalog = ingest_cases(cases_path)
        clusters = None
        if clusters_path is not None:
            clusters, catalog = load_clusters(clusters_path, catalog)
        annotations = ingest_annotations(annotations_path, catalog)
        return cls(catalog=catalog, annotations=annotations, clusters=clusters)

    def stats(self) -> CorpusStats:
        return catalog_stats(self.catalog, self.annotations)


# --- serialization -----------------------------------------------------------

def save_cases(catalog: CaseCatalog, path: str | Path) -> None:
    _write_json(catalog.to_records(), path)


def save_clusters(clusters: ClusterSet, path: str | Path) -> None:
    _write_json(clusters.to_records(), path)


def save_annotations(annotations: AnnotationSet, path: str | Path) -> None:
    """Write annotations.jsonl, rejected records included for round-trips."""
    with open(path, "w", encoding="utf-8") as fh:
        for ann in annotations:
            excerpt = annotations.excerpt(ann.excerpt_id)
            fh.write(
                json.dumps(
                    {
                        "case_id": ann.case_id,
                        "service_id": excerpt.service_id,
                        "excerpt": excerpt.text,
                        "approved": True,
                    },
                    ensure_ascii=False,
                    sort_keys=True,
                )
                + "\n"
            )
        for record in annotations.rejected:
            fh.write(json.dumps(record, ensure_ascii=False, sort_keys=True) + "\n")


def save_split(split: DataSplit, path: str | Path) -> None:
    payload = {
        "seed": split.seed,
        "train": [a.pair_id for a in split.train],
        "validation": [a.pair_id for a in split.validation],
        "test": {
            "standalone": [a.pair_id for a in split.standalone_set],
            "contrasting": [a.pair_id for a in split.contrasting_set],
        },
    }
    _write_json(payload, path)


def load_split(path: str | Path, annotations: AnnotationSet, catalog: CaseCatalog) -> DataSplit:
    with open(path, encoding="utf-8") as fh:
        payload = json.load(fh)
    by_pair = {a.pair_id: a for a in annotations}

    def resolve(pair_ids: list[str]) -> list[Annotation]:
        try:
            return [by_pair[p] for p in pair_ids]
        except KeyError as exc:
            raise CorpusError(f"split references unknown pair {exc.args[0]!r}") from None

    standalone = resolve(payload["test"]["standalone"])
    contrasting = resolve(payload["test"]["contrasting"])
    return DataSplit(
        seed=payload["seed"],
        train=resolve(payload["train"]),
        validation=resolve(payload["validation"]),
        test=standalone + contrasting,
        standalone_set=standalone,
        contrasting_set=contrasting,
    )


def _write_json(payload, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, ensure_ascii=False, sort_keys=True)
        fh.write("\n")


def _read_json_array(source: str | Path | Iterable[dict], what: str) -> list[dict]:
    if isinstance(source, (str, Path)):
        with open(source, encoding="utf-8") as fh:
            try:
                payload = json.load(fh)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"{what} is not valid JSON: {exc}") from None
        if not isinstance(payload, list):
            raise CorpusError(f"{what} must be a JSON array")
        return payload
    return list(source)


def _read_jsonl_or_list(source: str | Path | Iterable[dict]) -> list[dict]:
    if isinstance(source, (str, Path)):
        records = []
        with open(source, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                try:
                    records.append(json.loads(line))
                except json.JSONDecodeError as exc:
                    raise CorpusError(
                        f"annotation file line {lineno} is not valid JSON: {exc}"
                    ) from None
        return records
    return list(source)
