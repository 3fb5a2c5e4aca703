"""Shared matcher interface: scikit-learn-style estimators over text pairs.

A matcher scores a (case title, excerpt text) pair with a match probability in
[0, 1]; the predicted label is 1 exactly when the probability reaches the
decision threshold. ``X`` everywhere is a sequence of 2-tuples of strings.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

Pair = tuple[str, str]


def get_params_of(obj, names: Sequence[str]) -> dict:
    return {name: getattr(obj, name) for name in names}


def check_pairs(X) -> list[Pair]:
    """Validate pair input: a sequence of (case_title, excerpt_text) with both
    sides non-empty after trimming."""
    pairs = list(X)
    for i, item in enumerate(pairs):
        if not isinstance(item, (tuple, list)) or len(item) != 2:
            raise ValueError(f"X[{i}] is not a (case_title, excerpt_text) pair")
        title, excerpt = item
        if not isinstance(title, str) or not title.strip():
            raise ValueError(f"X[{i}] has an empty case title")
        if not isinstance(excerpt, str) or not excerpt.strip():
            raise ValueError(f"X[{i}] has an empty excerpt text")
    return [(t, e) for t, e in pairs]


def check_binary_labels(y) -> np.ndarray:
    labels = np.asarray(y, dtype=int)
    values = set(np.unique(labels).tolist())
    if not values <= {0, 1}:
        raise ValueError(f"labels must be 0/1, got {sorted(values)}")
    return labels


class PairMatcher:
    """Base estimator for case-excerpt matchers.

    Subclasses implement ``predict_proba``; ``predict`` and ``score_pair``
    derive from it. ``get_params``/``set_params`` follow the scikit-learn
    convention so matchers compose with its model-selection utilities.
    """

    _param_names: tuple[str, ...] = ("decision_threshold",)

    def __init__(self, decision_threshold: float = 0.5):
        self.decision_threshold = decision_threshold

    def get_params(self, deep: bool = True) -> dict:
        return get_params_of(self, self._param_names)

    def set_params(self, **params) -> "PairMatcher":
        for name, value in params.items():
            if name not in self._param_names:
                raise ValueError(f"unknown parameter {name!r} for {type(self).__name__}")
            setattr(self, name, value)
        return self

    def predict_proba(self, X) -> np.ndarray:
        """Return an (n, 2) array of [P(no match), P(match)] per pair."""
        raise NotImplementedError

    def predict(self, X) -> np.ndarray:
        proba = self.predict_proba(X)[:, 1]
        return (proba >= self.decision_threshold).astype(int)

    def score_pair(self, case_title: str, excerpt_text: str) -> float:
        """Match probability for a single pair."""
        return float(self.predict_proba([(case_title, excerpt_text)])[0, 1])

    def __repr__(self) -> str:
        params = ", ".join(f"{k}={v!r}" for k, v in self.get_params().items())
        return f"{type(self).__name__}({params})"


def stack_proba(match_probability: np.ndarray) -> np.ndarray:
    p = np.asarray(match_probability, dtype=float)
    if np.any(p < 0) or np.any(p > 1):
        raise ValueError("probabilities must lie in [0, 1]")
    return np.column_stack([1.0 - p, p])


def write_scores_jsonl(matcher: PairMatcher, labeled_pairs, path) -> None:
    """Score labeled pairs and write one {case_id, excerpt_id, probability}
    JSON object per line."""
    import json

    items = list(getattr(labeled_pairs, "pairs", labeled_pairs))
    proba = matcher.predict_proba([(p.case_title, p.excerpt_text) for p in items])
    with open(path, "w", encoding="utf-8") as fh:
        for pair, p in zip(items, proba[:, 1]):
            fh.write(
                json.dumps(
                    {
                        "case_id": pair.case_id,
                        "excerpt_id": pair.excerpt_id,
                        "probability": round(float(p), 6),
                    },
                    sort_keys=True,
                )
                + "\n"
            )
