"""Masked-LM pseudo-perplexity per excerpt and per privacy rating.

Texts are tokenized, cut into fixed-size windows with a stride, and within
each window every position is masked separately; the score is the exponential
of the mean negative log-likelihood over all collected positions. Positions
covered by overlapping windows contribute once per window.
"""

from __future__ import annotations

import csv
import json
import math
import statistics
from dataclasses import dataclass
from pathlib import Path
from typing import Protocol, Sequence

from .corpus import CaseCatalog, AnnotationSet


class MaskedTokenModel(Protocol):
    """Anything that can tokenize text and score a masked position.

    ``token_log_prob(tokens, index)`` returns log P(tokens[index] | tokens
    with position ``index`` masked). Special tokens are the model's own
    concern and must not appear in ``tokenize`` output.
    """

    model_id: str

    def tokenize(self, text: str) -> list[str]: ...

    def token_log_prob(self, tokens: Sequence[str], index: int) -> float: ...


class UniformVocabModel:
    """Dummy model assigning every token probability 1/V; PPL is exactly V."""

    def __init__(self, vocab_size: int):
        if vocab_size < 1:
            raise ValueError("vocab_size must be >= 1")
        self.vocab_size = vocab_size
        self.model_id = f"uniform:{vocab_size}"

    def tokenize(self, text: str) -> list[str]:
        return text.split()

    def token_log_prob(self, tokens: Sequence[str], index: int) -> float:
        return -math.log(self.vocab_size)


def window_spans(n_tokens: int, window_size: int, stride: int) -> list[tuple[int, int]]:
    """(start, end) spans of sliding windows over ``n_tokens`` positions.

    A trailing partial window is kept when it has at least 2 tokens, otherwise
    it merges into the previous window. Texts shorter than ``window_size``
    yield a single window.
    """
    if window_size < 2:
        raise ValueError("window_size must be >= 2")
    if stride < 1:
        raise ValueError("stride must be >= 1")
    if n_tokens <= window_size:
        return [(0, n_tokens)]
    spans: list[tuple[int, int]] = []
    start = 0
    while start + window_size <= n_tokens:
        spans.append((start, start + window_size))
        start += stride
    if spans[-1][1] < n_tokens:
        remainder = n_tokens - start
        if remainder >= 2:
            spans.append((start, n_tokens))
        else:
            spans[-1] = (spans[-1][0], n_tokens)
    return spans


def pseudo_perplexity(
    mlm: MaskedTokenModel, text: str, window_size: int = 8, stride: int = 4
) -> float:
    """exp(mean NLL) over every masked position of every window."""
    tokens = mlm.tokenize(text)
    if not tokens:
        raise ValueError("text tokenizes to zero tokens")
    nlls: list[float] = []
    for start, end in window_spans(len(tokens), window_size, stride):
        window = tokens[start:end]
        for position in range(len(window)):
            nlls.append(-mlm.token_log_prob(window, position))
    return math.exp(sum(nlls) / len(nlls))


@dataclass(frozen=True)
class PerplexityRecord:
    excerpt_id: str
    rating: str
    model_id: str
    pseudo_perplexity: float
    window_count: int


def score_excerpts(
    mlm: MaskedTokenModel,
    annotations: AnnotationSet,
    catalog: CaseCatalog,
    window_size: int = 8,
    stride: int = 4,
    limit_per_rating: int | None = None,
) -> list[PerplexityRecord]:
    """One record per (excerpt, rating) pair under one model.

    An excerpt annotated to cases of different ratings contributes to each
    rating group it appears under.
    """
    seen: set[tuple[str, str]] = set()
    records = []
    per_rating: dict[str, int] = {}
    for ann in annotations:
        rating = catalog[ann.case_id].rating.value
        key = (ann.excerpt_id, rating)
        if key in seen:
            continue
        seen.add(key)
        if limit_per_rating is not None and per_rating.get(rating, 0) >= limit_per_rating:
            continue
        per_rating[rating] = per_rating.get(rating, 0) + 1
        excerpt = annotations.excerpt(ann.excerpt_id)
        tokens = mlm.tokenize(excerpt.text)
        if not tokens:
            continue
        spans = window_spans(len(tokens), window_size, stride)
        records.append(
            PerplexityRecord(
                excerpt_id=excerpt.id,
                rating=rating,
                model_id=mlm.model_id,
                pseudo_perplexity=pseudo_perplexity(mlm, excerpt.text, window_size, stride),
                window_count=len(spans),
            )
        )
    return records


def rating_perplexity_report(
    models: Sequence[MaskedTokenModel],
    annotations: AnnotationSet,
    catalog: CaseCatalog,
    window_size: int = 8,
    stride: int = 4,
    limit_per_rating: int | None = None,
    comparison_texts: Sequence[str] | None = None,
) -> dict:
    """Distribution summary per (model, rating): mean, median, quartiles.

    ``comparison_texts`` (e.g. sentences sampled from popular sites' policies)
    are reported under the pseudo-rating "general" for side-by-side plots.
    """
    summary: dict = {"window_size": window_size, "stride": stride, "models": {}}
    all_records: list[PerplexityRecord] = []
    for mlm in models:
        records = score_excerpts(
            mlm, annotations, catalog, window_size, stride, limit_per_rating
        )
        if comparison_texts:
            for i, text in enumerate(comparison_texts):
                if not mlm.tokenize(text):
                    continue
                spans = window_spans(len(mlm.tokenize(text)), window_size, stride)
                records.append(
                    PerplexityRecord(
                        excerpt_id=f"general-{i}",
                        rating="general",
                        model_id=mlm.model_id,
                        pseudo_perplexity=pseudo_perplexity(mlm, text, window_size, stride),
                        window_count=len(spans),
                    )
                )
        all_records.extend(records)
        by_rating: dict[str, list[float]] = {}
        for record in records:
            by_rating.setdefault(record.rating, []).append(record.pseudo_perplexity)
        model_summary = {}
        for rating, values in sorted(by_rating.items()):
            if not values:
                raise ValueError(f"no scored excerpts for rating {rating!r}")
            model_summary[rating] = _distribution(values)
        summary["models"][mlm.model_id] = model_summary
    summary["records"] = all_records
    return summary


def _distribution(values: list[float]) -> dict:
    ordered = sorted(values)
    if len(ordered) >= 2:
        q1, q2, q3 = statistics.quantiles(ordered, n=4)
    else:
        q1 = q2 = q3 = ordered[0]
    return {
        "count": len(ordered),
        "mean": statistics.fmean(ordered),
        "median": statistics.median(ordered),
        "q1": q1,
        "q3": q3,
        "min": ordered[0],
        "max": ordered[-1],
    }


def write_perplexity_csv(records: Sequence[PerplexityRecord], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["excerpt_id", "rating", "model_id", "pseudo_perplexity"])
        for record in records:
            writer.writerow(
                [
                    record.excerpt_id,
                    record.rating,
                    record.model_id,
                    f"{record.pseudo_perplexity:.6f}",
                ]
            )


def write_summary_json(summary: dict, path: str | Path) -> None:
    payload = {k: v for k, v in summary.items() if k != "records"}
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def resolve_model(identifier: str) -> MaskedTokenModel:
    """Model ids: "uniform:V" for the dummy model, anything else loads a
    Hugging Face masked LM."""
    if identifier.startswith("uniform:"):
        return UniformVocabModel(int(identifier.split(":", 1)[1]))
    return TransformersMaskedLM(identifier)


class TransformersMaskedLM:
    """Masked-LM adapter over a Hugging Face checkpoint.

    Masking is whole-word: when the tokenizer splits a word into several
    pieces, scoring any piece masks all pieces of that word. Special tokens
    never enter the token stream, so they contribute nothing to the NLL.
    """

    def __init__(self, model_name: str):
        import torch
        from transformers import AutoModelForMaskedLM, AutoTokenizer

        self._torch = torch
        self.model_id = model_name
        self.tokenizer = AutoTokenizer.from_pretrained(model_name)
        self.model = AutoModelForMaskedLM.from_pretrained(model_name)
        self.model.eval()

    def tokenize(self, text: str) -> list[str]:
        return self.tokenizer.tokenize(text)

    def _word_span(self, tokens: Sequence[str], index: int) -> range:
        # WordPiece marks continuations with "##"; byte-level BPE marks word
        # starts with a space glyph instead, so continuation = unmarked.
        uses_space_marker = any(
            t.startswith("Ġ") or t.startswith("▁") for t in tokens
        )

        def is_continuation(pos: int) -> bool:
            tok = tokens[pos]
            if tok.startswith("##"):
                return True
            if uses_space_marker and pos > 0:
                return not (tok.startswith("Ġ") or tok.startswith("▁"))
            return False

        start = index
        while start > 0 and is_continuation(start):
            start -= 1
        end = index + 1
        while end < len(tokens) and is_continuation(end):
            end += 1
        return range(start, end)

    def token_log_prob(self, tokens: Sequence[str], index: int) -> float:
        torch = self._torch
        ids = self.tokenizer.convert_tokens_to_ids(list(tokens))
        masked = list(ids)
        for position in self._word_span(tokens, index):
            masked[position] = self.tokenizer.mask_token_id
        input_ids = torch.tensor(
            [
                [self.tokenizer.cls_token_id]
                + masked
                + [self.tokenizer.sep_token_id]
            ]
        )
        with torch.no_grad():
            logits = self.model(input_ids).logits[0]
        log_probs = torch.log_softmax(logits[index + 1], dim=-1)
        return float(log_probs[ids[index]])
