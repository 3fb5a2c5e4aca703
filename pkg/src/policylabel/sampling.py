"""Training-pair construction: random and cluster-based negative sampling.

Positives are the approved annotations of a split partition. Negatives pair a
case with excerpts annotated to other cases; the cluster-based strategy first
exhausts excerpts of contrasting sibling cases before topping up from outside
the cluster. Both strategies are deterministic per seed: every case draws from
its own sub-seeded generator, so random sampling and cluster-based sampling
coincide exactly on a corpus without clusters.
"""

from __future__ import annotations

import json
import random
import warnings
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Sequence

from .corpus import Annotation, ClusterSet, Corpus


class SamplingExhaustionWarning(UserWarning):
    """Corpus too small to supply the requested number of unique negatives."""


class PairOrigin(str, Enum):
    POSITIVE = "positive"
    WITHIN_CLUSTER_NEGATIVE = "within_cluster_negative"
    RANDOM_NEGATIVE = "random_negative"


@dataclass(frozen=True)
class LabeledPair:
    case_id: str
    case_title: str
    excerpt_id: str
    excerpt_text: str
    label: int
    origin: PairOrigin

    def __post_init__(self):
        if (self.label == 1) != (self.origin is PairOrigin.POSITIVE):
            raise ValueError("label 1 if and only if origin is positive")

    @property
    def key(self) -> tuple[str, str]:
        return (self.case_id, self.excerpt_id)


@dataclass(frozen=True)
class SamplingConfig:
    strategy: str  # "rs" | "cbs"
    ratio: int
    seed: int

    def __post_init__(self):
        if self.strategy not in ("rs", "cbs"):
            raise ValueError(f"unknown strategy {self.strategy!r}")
        if self.ratio < 1:
            raise ValueError("ratio must be >= 1")


class _PairIndex:
    """Per-call index: which cases each excerpt is annotated to, and per-case
    approved excerpt sets, for collision-free pool construction."""

    def __init__(self, corpus: Corpus):
        self.excerpts_by_case = corpus.annotations.excerpt_ids_by_case()
        self.cases_by_excerpt: dict[str, set[str]] = {}
        for ann in corpus.annotations:
            self.cases_by_excerpt.setdefault(ann.excerpt_id, set()).add(ann.case_id)

    def pool(self, case_id: str, within_cases: set[str] | None = None) -> list[str]:
        """Excerpts annotated to at least one other case (optionally restricted
        to ``within_cases``), excluding approved excerpts of ``case_id``."""
        own = self.excerpts_by_case.get(case_id, set())
        pool: set[str] = set()
        for other_case, excerpt_ids in self.excerpts_by_case.items():
            if other_case == case_id:
                continue
            if within_cases is not None and other_case not in within_cases:
                continue
            pool.update(excerpt_ids)
        return sorted(pool - own)

    def outside_pool(self, case_id: str, cluster_members: set[str]) -> list[str]:
        """Excerpts annotated to at least one case outside the cluster,
        excluding approved excerpts of ``case_id``."""
        own = self.excerpts_by_case.get(case_id, set())
        pool = {
            eid
            for eid, cases in self.cases_by_excerpt.items()
            if not cases <= cluster_members
        }
        return sorted(pool - own)


def positives_from(partition: Sequence[Annotation], corpus: Corpus) -> list[LabeledPair]:
    """Turn a split partition's annotations into positive labeled pairs."""
    pairs = []
    for ann in partition:
        excerpt = corpus.annotations.excerpt(ann.excerpt_id)
        pairs.append(
            LabeledPair(
                case_id=ann.case_id,
                case_title=corpus.catalog[ann.case_id].title,
                excerpt_id=excerpt.id,
                excerpt_text=excerpt.text,
                label=1,
                origin=PairOrigin.POSITIVE,
            )
        )
    return pairs


def sample_random_negatives(
    partition: Sequence[Annotation],
    corpus: Corpus,
    ratio: int,
    seed: int,
) -> list[LabeledPair]:
    """For each positive pair draw ``ratio`` negatives uniformly.

    A negative pairs the case with an excerpt annotated to some other case.
    No drawn pair duplicates an approved annotation anywhere in the corpus,
    and (case_id, excerpt_id) keys are unique within the output. When a case's
    eligible pool runs out, the maximum achievable count is emitted together
    with a SamplingExhaustionWarning.
    """
    if not partition:
        raise ValueError("partition is empty")
    if ratio < 1:
        raise ValueError("ratio must be >= 1")
    index = _PairIndex(corpus)
    negatives = []
    for case_id, need in _needs_by_case(partition, ratio):
        rng = _case_rng(seed, case_id)
        drawn = _draw(index.pool(case_id), need, rng, case_id)
        negatives.extend(
            _negative_pair(case_id, eid, corpus, PairOrigin.RANDOM_NEGATIVE)
            for eid in drawn
        )
    return negatives


def sample_cluster_negatives(
    partition: Sequence[Annotation],
    corpus: Corpus,
    clusters: ClusterSet,
    ratio: int,
    seed: int,
) -> list[LabeledPair]:
    """Cluster-based sampling: contrasting siblings first, then random top-up.

    For a clustered case, negatives come from excerpts annotated to sibling
    cases in the same cluster until the quota is met or every unique sibling
    excerpt is used; any shortfall is topped up uniformly from outside the
    cluster. Standalone cases draw exactly as random sampling would under the
    same seed.
    """
    if not partition:
        raise ValueError("partition is empty")
    if ratio < 1:
        raise ValueError("ratio must be >= 1")
    index = _PairIndex(corpus)
    negatives = []
    for case_id, need in _needs_by_case(partition, ratio):
        rng = _case_rng(seed, case_id)
        siblings = clusters.siblings_of(case_id)
        if not siblings:
            drawn = _draw(index.pool(case_id), need, rng, case_id)
            negatives.extend(
                _negative_pair(case_id, eid, corpus, PairOrigin.RANDOM_NEGATIVE)
                for eid in drawn
            )
            continue
        sibling_pool = index.pool(case_id, within_cases=set(siblings))
        if len(sibling_pool) <= need:
            within = sibling_pool
        else:
            within = rng.sample(sibling_pool, need)
        negatives.extend(
            _negative_pair(case_id, eid, corpus, PairOrigin.WITHIN_CLUSTER_NEGATIVE)
            for eid in within
        )
        shortfall = need - len(within)
        if shortfall > 0:
            taken = set(within)
            outside = [
                eid
                for eid in index.outside_pool(case_id, set(siblings) | {case_id})
                if eid not in taken
            ]
            drawn = _draw(outside, shortfall, rng, case_id)
            negatives.extend(
                _negative_pair(case_id, eid, corpus, PairOrigin.RANDOM_NEGATIVE)
                for eid in drawn
            )
    return negatives


def _needs_by_case(partition: Sequence[Annotation], ratio: int) -> list[tuple[str, int]]:
    counts: dict[str, int] = {}
    for ann in partition:
        counts[ann.case_id] = counts.get(ann.case_id, 0) + 1
    return [(case_id, counts[case_id] * ratio) for case_id in sorted(counts)]


def _case_rng(seed: int, case_id: str) -> random.Random:
    return random.Random(f"{seed}:{case_id}")


def _draw(pool: list[str], need: int, rng: random.Random, case_id: str) -> list[str]:
    if len(pool) < need:
        warnings.warn(
            f"case {case_id!r}: only {len(pool)} unique negatives available, "
            f"{need} requested",
            SamplingExhaustionWarning,
        )
        return list(pool)
    return rng.sample(pool, need)


def _negative_pair(
    case_id: str, excerpt_id: str, corpus: Corpus, origin: PairOrigin
) -> LabeledPair:
    excerpt = corpus.annotations.excerpt(excerpt_id)
    return LabeledPair(
        case_id=case_id,
        case_title=corpus.catalog[case_id].title,
        excerpt_id=excerpt_id,
        excerpt_text=excerpt.text,
        label=0,
        origin=origin,
    )


@dataclass
class TrainingSet:
    pairs: list[LabeledPair]
    counts: dict[str, int]
    config: SamplingConfig | None = None

    def __len__(self) -> int:
        return len(self.pairs)


def build_training_set(
    positives: Sequence[LabeledPair],
    negatives: Sequence[LabeledPair],
    seed: int = 0,
    config: SamplingConfig | None = None,
) -> TrainingSet:
    """Seeded shuffle of positives + negatives with per-origin audit counts."""
    overlap = {p.key for p in positives} & {n.key for n in negatives}
    if overlap:
        raise ValueError(f"positive/negative key overlap: {sorted(overlap)[:3]}")
    pairs = list(positives) + list(negatives)
    keys = [p.key for p in pairs]
    if len(set(keys)) != len(keys):
        raise ValueError("duplicate (case_id, excerpt_id) key in training set")
    pairs.sort(key=lambda p: p.key)
    random.Random(seed).shuffle(pairs)
    counts: dict[str, int] = {origin.value: 0 for origin in PairOrigin}
    for pair in pairs:
        counts[pair.origin.value] += 1
    return TrainingSet(pairs=pairs, counts=counts, config=config)


def sample_training_set(
    partition: Sequence[Annotation],
    corpus: Corpus,
    config: SamplingConfig,
) -> TrainingSet:
    """End-to-end sampling for one partition under one configuration."""
    positives = positives_from(partition, corpus)
    if config.strategy == "cbs":
        if corpus.clusters is None:
            raise ValueError("cluster-based sampling requires a cluster file")
        negatives = sample_cluster_negatives(
            partition, corpus, corpus.clusters, config.ratio, config.seed
        )
    else:
        negatives = sample_random_negatives(partition, corpus, config.ratio, config.seed)
    return build_training_set(positives, negatives, seed=config.seed, config=config)


def build_frozen_eval_sets(
    split_partition: Sequence[Annotation],
    corpus: Corpus,
    seed: int,
) -> TrainingSet:
    """Evaluation pairs at a fixed 1:1 negative ratio.

    Built once per split and reused across training configurations so metric
    movements reflect the training set, not the test set. Uses the cluster
    discipline when clusters are loaded, plain random sampling otherwise.
    """
    config = SamplingConfig(
        strategy="cbs" if corpus.clusters is not None else "rs", ratio=1, seed=seed
    )
    return sample_training_set(split_partition, corpus, config)


# --- serialization -----------------------------------------------------------

def write_training_set(
    training_set: TrainingSet, path: str | Path, manifest_extra: dict | None = None
) -> Path:
    """Write training_set.jsonl plus a sidecar manifest next to it."""
    path = Path(path)
    with open(path, "w", encoding="utf-8") as fh:
        for pair in training_set.pairs:
            fh.write(
                json.dumps(
                    {
                        "case_id": pair.case_id,
                        "case_title": pair.case_title,
                        "excerpt": pair.excerpt_text,
                        "label": pair.label,
                        "origin": pair.origin.value,
                    },
                    ensure_ascii=False,
                    sort_keys=True,
                )
                + "\n"
            )
    manifest = {
        "counts": training_set.counts,
        "size": len(training_set),
    }
    if training_set.config is not None:
        manifest.update(
            strategy=training_set.config.strategy,
            ratio=training_set.config.ratio,
            seed=training_set.config.seed,
        )
    if manifest_extra:
        manifest.update(manifest_extra)
    manifest_path = path.with_suffix(path.suffix + ".manifest.json")
    with open(manifest_path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return manifest_path


def read_training_set(path: str | Path) -> list[LabeledPair]:
    from .corpus import excerpt_id_for

    pairs = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            record = json.loads(line)
            pairs.append(
                LabeledPair(
                    case_id=record["case_id"],
                    case_title=record["case_title"],
                    excerpt_id=record.get("excerpt_id")
                    or excerpt_id_for("", record["excerpt"]),
                    excerpt_text=record["excerpt"],
                    label=int(record["label"]),
                    origin=PairOrigin(record["origin"]),
                )
            )
    return pairs
