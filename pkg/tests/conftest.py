import random
from pathlib import Path

import pytest

from policylabel.corpus import (
    Corpus,
    ingest_annotations,
    ingest_cases,
    load_clusters,
)

DATA_DIR = Path(__file__).resolve().parents[1] / "data"


@pytest.fixture(scope="session")
def data_dir() -> Path:
    return DATA_DIR


@pytest.fixture(scope="session")
def fixture_corpus() -> Corpus:
    return Corpus.load(
        DATA_DIR / "cases.json",
        DATA_DIR / "annotations.jsonl",
        DATA_DIR / "clusters.json",
    )


def make_corpus(
    case_specs: dict[str, list[str]],
    clusters: list[list[str]] | None = None,
    ratings: dict[str, str] | None = None,
) -> Corpus:
    """Tiny in-memory corpus: case id -> list of its excerpt texts.

    Each excerpt gets its own service id so texts never dedupe accidentally.
    """
    case_records = [
        {
            "id": case_id,
            "title": f"practice {case_id} described",
            "rating": (ratings or {}).get(case_id, "good"),
        }
        for case_id in case_specs
    ]
    catalog = ingest_cases(case_records)
    cluster_set = None
    if clusters is not None:
        cluster_records = [
            {"cluster_id": f"k{i}", "case_ids": members}
            for i, members in enumerate(clusters)
        ]
        cluster_set, catalog = load_clusters(cluster_records, catalog)
    annotation_records = []
    for case_id, texts in case_specs.items():
        for j, text in enumerate(texts):
            annotation_records.append(
                {
                    "case_id": case_id,
                    "service_id": f"svc-{case_id}-{j}",
                    "excerpt": text,
                    "approved": True,
                }
            )
    annotations = ingest_annotations(annotation_records, catalog)
    return Corpus(catalog=catalog, annotations=annotations, clusters=cluster_set)


def make_separable_pairs(n_train: int = 400, n_heldout: int = 100, seed: int = 7):
    """Synthetic separable pair corpus: label = keyword co-occurrence.

    Each case title names one topic keyword; a matching excerpt mentions the
    same keyword, a disparate one mentions a different keyword. A bag-of-words
    rule (same keyword on both sides) classifies this perfectly, so a trained
    matcher should approach F1 1.0.
    """
    from policylabel.sampling import LabeledPair, PairOrigin

    topics = [
        "cookies", "location", "advertising", "deletion", "encryption",
        "payments", "biometrics", "retention", "sharing", "analytics",
    ]
    fillers = [
        "the policy describes how the service handles everyday information",
        "users should read the relevant section before agreeing to anything",
        "the document sets out duties that apply to members in all regions",
        "this paragraph was reviewed during the most recent annual update",
        "several controls in the dashboard relate to the practices here",
    ]
    rng = random.Random(seed)

    def make_pair(i: int, label: int) -> LabeledPair:
        topic = rng.choice(topics)
        other = rng.choice([t for t in topics if t != topic])
        title = f"the service explains its {topic} practice"
        mentioned = topic if label == 1 else other
        excerpt = (
            f"section {i}: regarding {mentioned} the provider states that "
            f"{rng.choice(fillers)} and the {mentioned} rules are binding"
        )
        return LabeledPair(
            case_id=f"case-{topic}",
            case_title=title,
            excerpt_id=f"x{i}",
            excerpt_text=excerpt,
            label=label,
            origin=PairOrigin.POSITIVE if label else PairOrigin.RANDOM_NEGATIVE,
        )

    total = n_train + n_heldout
    pairs = [make_pair(i, i % 2) for i in range(total)]
    rng.shuffle(pairs)
    return pairs[:n_train], pairs[n_train:]
