"""Decision-threshold calibration against a scored validation set."""

from __future__ import annotations

from typing import Sequence

import numpy as np


def calibrate_threshold(
    scored_pairs: Sequence[tuple[float, int]] | None = None,
    scores: Sequence[float] | None = None,
    labels: Sequence[int] | None = None,
) -> float:
    """Pick the observed score that maximizes match-class F1 as a threshold.

    Candidates are exactly the distinct scores seen on the validation set
    (predicted label is 1 when score >= threshold); ties break toward the
    smallest threshold. Accepts either (score, label) tuples or parallel
    ``scores``/``labels`` sequences. An all-positive set degenerates cleanly
    to the minimum observed score; an all-negative set has no usable operating
    point and is an error.
    """
    if scored_pairs is not None:
        scores = [s for s, _ in scored_pairs]
        labels = [l for _, l in scored_pairs]
    if scores is None or labels is None:
        raise ValueError("provide scored_pairs or scores and labels")
    s = np.asarray(scores, dtype=float)
    y = np.asarray(labels, dtype=int)
    if s.shape != y.shape or s.size == 0:
        raise ValueError("scores and labels must be equal-length and non-empty")
    if not np.any(y == 1):
        raise ValueError("validation set has no match-class pairs to calibrate on")

    best_threshold, best_f1 = None, -1.0
    for candidate in np.unique(s):  # ascending, so ties keep the smallest
        predicted = s >= candidate
        tp = int(np.sum(predicted & (y == 1)))
        fp = int(np.sum(predicted & (y == 0)))
        fn = int(np.sum(~predicted & (y == 1)))
        f1 = 2 * tp / (2 * tp + fp + fn) if (2 * tp + fp + fn) else 0.0
        if f1 > best_f1:
            best_threshold, best_f1 = float(candidate), f1
    return best_threshold
