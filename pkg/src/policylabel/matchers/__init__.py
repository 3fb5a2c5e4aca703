"""Matcher implementations behind one pair-scoring interface."""

from .base import PairMatcher, check_pairs, write_scores_jsonl
from .calibration import calibrate_threshold
from .cosine import EmbeddingCosineMatcher, HashingEmbedder, cosine_matcher
from .cross_encoder import (
    CrossEncoderMatcher,
    TrainConfig,
    bce_loss,
    pairs_to_xy,
    train_cross_encoder,
)
from .prompt import (
    HttpCompletionClient,
    PromptMatcher,
    PromptTemplate,
    TransportError,
    prompt_matcher,
    prompt_template,
)

__all__ = [
    "PairMatcher",
    "check_pairs",
    "write_scores_jsonl",
    "calibrate_threshold",
    "EmbeddingCosineMatcher",
    "HashingEmbedder",
    "cosine_matcher",
    "CrossEncoderMatcher",
    "TrainConfig",
    "bce_loss",
    "pairs_to_xy",
    "train_cross_encoder",
    "HttpCompletionClient",
    "PromptMatcher",
    "PromptTemplate",
    "TransportError",
    "prompt_matcher",
    "prompt_template",
]
