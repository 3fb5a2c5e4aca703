"""Per-class precision/recall/F1 reports and multi-run aggregation.

Class 0 is the disparate (no-match) class, class 1 the matching class. All
metrics come from a confusion matrix computed at the matcher's decision
threshold; 0/0 divisions are defined as 0 and flagged in the report metadata.
"""

from __future__ import annotations

import csv
import json
import statistics
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .corpus import Corpus, DataSplit
from .sampling import SamplingConfig, TrainingSet, sample_training_set


@dataclass(frozen=True)
class ClassMetrics:
    precision: float
    recall: float
    f1: float
    support: int

    def as_dict(self) -> dict:
        return {
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "support": self.support,
        }


@dataclass
class ClassReport:
    classes: dict[int, ClassMetrics]
    metadata: dict = field(default_factory=dict)

    def metric(self, cls: int, name: str) -> float:
        return getattr(self.classes[cls], name)

    def as_dict(self) -> dict:
        return {
            "classes": {str(c): m.as_dict() for c, m in self.classes.items()},
            "metadata": self.metadata,
        }


def classification_report(
    y_true: Sequence[int],
    y_pred: Sequence[int],
    metadata: dict | None = None,
) -> ClassReport:
    """Binary per-class report from gold and predicted labels.

    Predictions outside {0, 1} mark abstentions; those pairs are excluded
    from the confusion matrix and counted under ``metadata["abstentions"]``.
    """
    gold = np.asarray(y_true, dtype=int)
    pred = np.asarray(y_pred, dtype=int)
    if gold.shape != pred.shape:
        raise ValueError("y_true and y_pred must have the same length")
    if gold.size == 0:
        raise ValueError("empty pair set")
    known = (pred == 0) | (pred == 1)
    abstentions = int(np.sum(~known))
    gold, pred = gold[known], pred[known]

    meta = dict(metadata or {})
    if abstentions:
        meta["abstentions"] = abstentions
    zero_division_flags: list[str] = []
    classes: dict[int, ClassMetrics] = {}
    for cls in (0, 1):
        tp = int(np.sum((pred == cls) & (gold == cls)))
        fp = int(np.sum((pred == cls) & (gold != cls)))
        fn = int(np.sum((pred != cls) & (gold == cls)))
        precision = _safe_div(tp, tp + fp, f"precision[{cls}]", zero_division_flags)
        recall = _safe_div(tp, tp + fn, f"recall[{cls}]", zero_division_flags)
        f1 = (
            2 * precision * recall / (precision + recall)
            if (precision + recall) > 0
            else 0.0
        )
        classes[cls] = ClassMetrics(precision, recall, f1, support=tp + fn)
    if zero_division_flags:
        meta["zero_division"] = zero_division_flags
    return ClassReport(classes=classes, metadata=meta)


def _safe_div(num: int, den: int, name: str, flags: list[str]) -> float:
    if den == 0:
        flags.append(name)
        return 0.0
    return num / den


def evaluate(matcher, labeled_pairs, metadata: dict | None = None) -> ClassReport:
    """Score labeled pairs with a matcher and report per-class metrics."""
    items = list(getattr(labeled_pairs, "pairs", labeled_pairs))
    if not items:
        raise ValueError("empty pair set")
    X = [(p.case_title, p.excerpt_text) for p in items]
    y_true = [p.label for p in items]
    y_pred = matcher.predict(X)
    meta = dict(metadata or {})
    meta.setdefault("threshold", getattr(matcher, "decision_threshold", None))
    return classification_report(y_true, y_pred, metadata=meta)


def evaluate_partitioned(
    matcher, standalone_set, contrasting_set, metadata: dict | None = None
) -> tuple[ClassReport, ClassReport]:
    """Separate reports for the standalone and contrasting test sets."""
    reports = []
    for name, pairs in (("standalone", standalone_set), ("contrasting", contrasting_set)):
        items = list(getattr(pairs, "pairs", pairs))
        if not items:
            raise ValueError(f"{name} partition is empty")
        meta = dict(metadata or {})
        meta["test_set"] = name
        reports.append(evaluate(matcher, items, metadata=meta))
    return reports[0], reports[1]


@dataclass
class MeanReport:
    """Element-wise mean and sample standard deviation over repeated runs."""

    classes: dict[int, dict[str, tuple[float, float]]]
    run_count: int
    metadata: dict = field(default_factory=dict)

    def mean(self, cls: int, metric: str) -> float:
        return self.classes[cls][metric][0]

    def std(self, cls: int, metric: str) -> float:
        return self.classes[cls][metric][1]

    def as_dict(self) -> dict:
        return {
            "classes": {
                str(c): {m: {"mean": v[0], "std": v[1]} for m, v in metrics.items()}
                for c, metrics in self.classes.items()
            },
            "run_count": self.run_count,
            "metadata": self.metadata,
        }


METRIC_NAMES = ("precision", "recall", "f1", "support")


def aggregate_runs(reports: Sequence[ClassReport]) -> MeanReport:
    """Mean and sample (n-1) std per metric cell across runs.

    Requires at least two reports over the same test set; the result is
    invariant to the order of the input list.
    """
    if len(reports) < 2:
        raise ValueError("need at least 2 reports to aggregate")
    names = {r.metadata.get("test_set") for r in reports}
    if len(names) > 1:
        raise ValueError(f"mismatched test-set names: {sorted(map(str, names))}")
    classes: dict[int, dict[str, tuple[float, float]]] = {}
    for cls in (0, 1):
        classes[cls] = {}
        for metric in METRIC_NAMES:
            values = [r.metric(cls, metric) for r in reports]
            classes[cls][metric] = (
                statistics.fmean(values),
                statistics.stdev(values),
            )
    metadata = dict(reports[0].metadata)
    return MeanReport(classes=classes, run_count=len(reports), metadata=metadata)


def sweep_ratios(
    train_fn: Callable[[TrainingSet, int], object],
    corpus: Corpus,
    split: DataSplit,
    eval_sets: dict[str, TrainingSet],
    strategies: Sequence[str] = ("rs", "cbs"),
    ratios: Sequence[int] = (1, 2, 3, 5),
    runs: int = 3,
    seed: int = 0,
) -> list[dict]:
    """Train/evaluate over the (strategy, ratio) grid, aggregating ``runs``
    repeats per cell into mean/std rows.

    ``train_fn(training_set, run_seed)`` must return a fitted matcher. Each
    run reshuffles both the negative sample and the model's initial state
    through ``run_seed``; the evaluation sets stay frozen.
    """
    rows: list[dict] = []
    for strategy in strategies:
        for ratio in ratios:
            per_set_reports: dict[str, list[ClassReport]] = {
                name: [] for name in eval_sets
            }
            for run in range(runs):
                run_seed = seed + run
                config = SamplingConfig(strategy=strategy, ratio=ratio, seed=run_seed)
                training_set = sample_training_set(split.train, corpus, config)
                matcher = train_fn(training_set, run_seed)
                for set_name, pairs in eval_sets.items():
                    report = evaluate(
                        matcher,
                        pairs,
                        metadata={
                            "test_set": set_name,
                            "strategy": strategy,
                            "ratio": ratio,
                            "run": run,
                        },
                    )
                    per_set_reports[set_name].append(report)
            for set_name, reports in per_set_reports.items():
                aggregated = aggregate_runs(reports) if runs >= 2 else None
                for cls in (0, 1):
                    row = {
                        "strategy": strategy,
                        "ratio": ratio,
                        "set": set_name,
                        "class": cls,
                        "runs": runs,
                    }
                    if aggregated is not None:
                        for metric in METRIC_NAMES:
                            row[f"{metric}_mean"] = aggregated.mean(cls, metric)
                            row[f"{metric}_std"] = aggregated.std(cls, metric)
                    else:
                        for metric in METRIC_NAMES:
                            row[f"{metric}_mean"] = reports[0].metric(cls, metric)
                            row[f"{metric}_std"] = 0.0
                    row["support"] = int(reports[0].metric(cls, "support"))
                    rows.append(row)
    return rows


RESULT_COLUMNS = (
    "strategy",
    "ratio",
    "set",
    "class",
    "precision_mean",
    "precision_std",
    "recall_mean",
    "recall_std",
    "f1_mean",
    "f1_std",
    "support",
    "runs",
)


def write_results(rows: list[dict], csv_path: str | Path, json_path: str | Path | None = None, provenance: dict | None = None) -> None:
    """Serialize sweep rows as CSV (and JSON with provenance alongside)."""
    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=RESULT_COLUMNS, extrasaction="ignore")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: row.get(k) for k in RESULT_COLUMNS})
    if json_path is not None:
        payload = {"results": rows, "provenance": provenance or {}}
        with open(json_path, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")
