"""Trainable cross-encoder over concatenated case-excerpt pairs.

The matcher feeds "case <sep> excerpt" through a transformer encoder with a
single-logit head, trained with binary cross-entropy under the Adam optimizer
(default learning rate 1e-5 for 3 epochs). Two interchangeable backends exist
behind one class: ``base_model_identifier="tiny"`` builds a small self-contained
encoder with a word-level vocabulary (no downloads, used by the test suite),
while any other identifier loads a pretrained Hugging Face encoder, e.g.
"roberta-base" or a domain-pretrained variant of it.
"""

from __future__ import annotations

import hashlib
import json
import math
import random
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
import torch
from torch import nn

from .base import PairMatcher, check_binary_labels, check_pairs, stack_proba

EPS = 1e-7


def bce_loss(y: float, y_hat: float) -> float:
    """Binary cross-entropy -[y*log(p) + (1-y)*log(1-p)] for one prediction.

    ``y_hat`` is clamped to [EPS, 1-EPS] so exact 0/1 predictions stay finite.
    """
    if y not in (0, 1):
        raise ValueError(f"y must be 0 or 1, got {y!r}")
    p = min(max(float(y_hat), EPS), 1.0 - EPS)
    return -(y * math.log(p) + (1 - y) * math.log(1.0 - p))


@dataclass(frozen=True)
class TrainConfig:
    base_model_identifier: str = "tiny"
    learning_rate: float = 1e-5
    epochs: int = 3
    batch_size: int = 16
    seed: int = 0
    max_length: int = 256
    # tiny-backend sizing; ignored by pretrained encoders
    hidden_size: int = 64
    num_layers: int = 2
    num_heads: int = 4

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be > 0")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")

    def to_dict(self) -> dict:
        return asdict(self)


class WordTokenizer:
    """Lower-cased whitespace tokenizer with a frozen vocabulary."""

    PAD, UNK, CLS, SEP = 0, 1, 2, 3
    SPECIALS = ("[PAD]", "[UNK]", "[CLS]", "[SEP]")

    def __init__(self, vocab: dict[str, int]):
        self.vocab = vocab

    @classmethod
    def build(cls, texts: Sequence[str], max_vocab: int = 30000) -> "WordTokenizer":
        counts: dict[str, int] = {}
        for text in texts:
            for token in text.lower().split():
                counts[token] = counts.get(token, 0) + 1
        vocab = {special: i for i, special in enumerate(cls.SPECIALS)}
        for token, _ in sorted(counts.items(), key=lambda kv: (-kv[1], kv[0])):
            if len(vocab) >= max_vocab:
                break
            vocab[token] = len(vocab)
        return cls(vocab)

    def __len__(self) -> int:
        return len(self.vocab)

    def ids(self, text: str) -> list[int]:
        return [self.vocab.get(tok, self.UNK) for tok in text.lower().split()]

    def encode_pair(self, title: str, excerpt: str, max_length: int) -> tuple[list[int], bool]:
        """[CLS] title [SEP] excerpt, truncating the excerpt tail to fit.

        The case title is never truncated; a title that alone exceeds the
        budget is an error.
        """
        title_ids = self.ids(title)
        head = [self.CLS] + title_ids + [self.SEP]
        if len(head) > max_length:
            raise ValueError(
                f"case title of {len(title_ids)} tokens exceeds max_length {max_length}"
            )
        excerpt_ids = self.ids(excerpt)
        room = max_length - len(head)
        truncated = len(excerpt_ids) > room
        return head + excerpt_ids[:room], truncated


class TinyPairEncoder(nn.Module):
    """Small transformer encoder with a single-logit classification head."""

    def __init__(
        self,
        vocab_size: int,
        hidden_size: int = 64,
        num_layers: int = 2,
        num_heads: int = 4,
        max_length: int = 256,
        dropout: float = 0.1,
    ):
        super().__init__()
        self.embed = nn.Embedding(vocab_size, hidden_size, padding_idx=WordTokenizer.PAD)
        self.pos_embed = nn.Embedding(max_length, hidden_size)
        layer = nn.TransformerEncoderLayer(
            d_model=hidden_size,
            nhead=num_heads,
            dim_feedforward=hidden_size * 4,
            dropout=dropout,
            batch_first=True,
        )
        self.encoder = nn.TransformerEncoder(
            layer, num_layers=num_layers, enable_nested_tensor=False
        )
        self.head = nn.Linear(hidden_size, 1)

    def forward(self, ids: torch.Tensor, pad_mask: torch.Tensor) -> torch.Tensor:
        positions = torch.arange(ids.size(1), device=ids.device).unsqueeze(0)
        x = self.embed(ids) + self.pos_embed(positions)
        x = self.encoder(x, src_key_padding_mask=pad_mask)
        return self.head(x[:, 0, :]).squeeze(-1)


class _TinyBackend:
    name = "tiny"

    def __init__(self, config: TrainConfig):
        self.config = config
        self.tokenizer: WordTokenizer | None = None
        self.model: TinyPairEncoder | None = None

    def prepare(self, pairs: Sequence[tuple[str, str]]) -> None:
        texts = [t for pair in pairs for t in pair]
        self.tokenizer = WordTokenizer.build(texts)
        self.model = TinyPairEncoder(
            vocab_size=len(self.tokenizer),
            hidden_size=self.config.hidden_size,
            num_layers=self.config.num_layers,
            num_heads=self.config.num_heads,
            max_length=self.config.max_length,
        )

    def collate(self, pairs: Sequence[tuple[str, str]]) -> tuple[dict, int]:
        encoded, truncations = [], 0
        for title, excerpt in pairs:
            ids, truncated = self.tokenizer.encode_pair(
                title, excerpt, self.config.max_length
            )
            truncations += truncated
            encoded.append(ids)
        width = max(len(ids) for ids in encoded)
        batch_ids = torch.full((len(encoded), width), WordTokenizer.PAD, dtype=torch.long)
        pad_mask = torch.ones((len(encoded), width), dtype=torch.bool)
        for row, ids in enumerate(encoded):
            batch_ids[row, : len(ids)] = torch.tensor(ids, dtype=torch.long)
            pad_mask[row, : len(ids)] = False
        return {"ids": batch_ids, "pad_mask": pad_mask}, truncations

    def logits(self, batch: dict) -> torch.Tensor:
        return self.model(batch["ids"], batch["pad_mask"])

    def save(self, directory: Path) -> None:
        torch.save(self.model.state_dict(), directory / "weights.pt")
        with open(directory / "vocab.json", "w", encoding="utf-8") as fh:
            json.dump(self.tokenizer.vocab, fh, ensure_ascii=False, sort_keys=True)

    def load(self, directory: Path) -> None:
        with open(directory / "vocab.json", encoding="utf-8") as fh:
            self.tokenizer = WordTokenizer(json.load(fh))
        self.model = TinyPairEncoder(
            vocab_size=len(self.tokenizer),
            hidden_size=self.config.hidden_size,
            num_layers=self.config.num_layers,
            num_heads=self.config.num_heads,
            max_length=self.config.max_length,
        )
        self.model.load_state_dict(torch.load(directory / "weights.pt", weights_only=True))


class _PretrainedBackend:
    """Hugging Face encoder plus a fresh single-logit head."""

    name = "pretrained"

    def __init__(self, config: TrainConfig):
        self.config = config
        self.tokenizer = None
        self.model: nn.Module | None = None

    def prepare(self, pairs) -> None:
        from transformers import AutoModel, AutoTokenizer

        identifier = self.config.base_model_identifier
        tokenizer = AutoTokenizer.from_pretrained(identifier)
        encoder = AutoModel.from_pretrained(identifier)
        self.tokenizer = tokenizer
        self.model = _PretrainedPairEncoder(encoder)

    def collate(self, pairs) -> tuple[dict, int]:
        titles = [t for t, _ in pairs]
        excerpts = [e for _, e in pairs]
        unclipped = self.tokenizer(titles, excerpts, padding=False, truncation=False)
        truncations = sum(
            len(ids) > self.config.max_length for ids in unclipped["input_ids"]
        )
        batch = self.tokenizer(
            titles,
            excerpts,
            padding=True,
            truncation="only_second",
            max_length=self.config.max_length,
            return_tensors="pt",
        )
        return dict(batch), truncations

    def logits(self, batch: dict) -> torch.Tensor:
        return self.model(batch)

    def save(self, directory: Path) -> None:
        self.tokenizer.save_pretrained(directory / "tokenizer")
        self.model.encoder.save_pretrained(directory / "encoder")
        torch.save(self.model.head.state_dict(), directory / "head.pt")

    def load(self, directory: Path) -> None:
        from transformers import AutoModel, AutoTokenizer

        self.tokenizer = AutoTokenizer.from_pretrained(directory / "tokenizer")
        encoder = AutoModel.from_pretrained(directory / "encoder")
        self.model = _PretrainedPairEncoder(encoder)
        self.model.head.load_state_dict(torch.load(directory / "head.pt", weights_only=True))


class _PretrainedPairEncoder(nn.Module):
    def __init__(self, encoder):
        super().__init__()
        self.encoder = encoder
        self.head = nn.Linear(encoder.config.hidden_size, 1)

    def forward(self, batch: dict) -> torch.Tensor:
        output = self.encoder(**batch)
        pooled = output.last_hidden_state[:, 0, :]
        return self.head(pooled).squeeze(-1)


def _make_backend(config: TrainConfig):
    if config.base_model_identifier == "tiny":
        return _TinyBackend(config)
    return _PretrainedBackend(config)


class CrossEncoderMatcher(PairMatcher):
    """Fine-tunable pair classifier exposing fit / predict / predict_proba."""

    _param_names = (
        "base_model_identifier",
        "learning_rate",
        "epochs",
        "batch_size",
        "seed",
        "max_length",
        "hidden_size",
        "num_layers",
        "num_heads",
        "decision_threshold",
    )

    def __init__(
        self,
        base_model_identifier: str = "tiny",
        learning_rate: float = 1e-5,
        epochs: int = 3,
        batch_size: int = 16,
        seed: int = 0,
        max_length: int = 256,
        hidden_size: int = 64,
        num_layers: int = 2,
        num_heads: int = 4,
        decision_threshold: float = 0.5,
    ):
        super().__init__(decision_threshold=decision_threshold)
        self.base_model_identifier = base_model_identifier
        self.learning_rate = learning_rate
        self.epochs = epochs
        self.batch_size = batch_size
        self.seed = seed
        self.max_length = max_length
        self.hidden_size = hidden_size
        self.num_layers = num_layers
        self.num_heads = num_heads
        self._backend = None
        self.history_: dict[str, list[float]] = {}
        self.truncation_count_ = 0

    @classmethod
    def from_config(cls, config: TrainConfig, decision_threshold: float = 0.5):
        return cls(decision_threshold=decision_threshold, **config.to_dict())

    def _config(self) -> TrainConfig:
        return TrainConfig(
            base_model_identifier=self.base_model_identifier,
            learning_rate=self.learning_rate,
            epochs=self.epochs,
            batch_size=self.batch_size,
            seed=self.seed,
            max_length=self.max_length,
            hidden_size=self.hidden_size,
            num_layers=self.num_layers,
            num_heads=self.num_heads,
        )

    def fit(self, X, y, validation: tuple | None = None) -> "CrossEncoderMatcher":
        """Fine-tune on labeled pairs; records per-epoch loss in ``history_``.

        ``validation`` is an optional (X_val, y_val) tuple whose loss is
        computed after every epoch without touching gradients.
        """
        pairs = check_pairs(X)
        labels = check_binary_labels(y)
        if not pairs:
            raise ValueError("training set is empty")
        if len(pairs) != len(labels):
            raise ValueError("X and y length mismatch")
        if len(set(labels.tolist())) < 2:
            raise ValueError("training set must contain both labels")

        torch.manual_seed(self.seed)
        rng = random.Random(self.seed)
        backend = _make_backend(self._config())
        backend.prepare(pairs)
        backend.model.train()

        optimizer = torch.optim.Adam(backend.model.parameters(), lr=self.learning_rate)
        criterion = nn.BCEWithLogitsLoss()
        targets = torch.tensor(labels, dtype=torch.float32)

        self.history_ = {"train_loss": [], "validation_loss": []}
        order = list(range(len(pairs)))
        for _ in range(self.epochs):
            rng.shuffle(order)
            epoch_loss, seen = 0.0, 0
            for start in range(0, len(order), self.batch_size):
                batch_idx = order[start : start + self.batch_size]
                batch, truncations = backend.collate([pairs[i] for i in batch_idx])
                self.truncation_count_ += truncations
                logits = backend.logits(batch)
                loss = criterion(logits, targets[batch_idx])
                if not torch.isfinite(loss):
                    raise RuntimeError("non-finite training loss")
                optimizer.zero_grad()
                loss.backward()
                optimizer.step()
                epoch_loss += float(loss.detach()) * len(batch_idx)
                seen += len(batch_idx)
            self.history_["train_loss"].append(epoch_loss / seen)
            if validation is not None:
                self._backend = backend
                val_loss = self._validation_loss(*validation)
                self.history_["validation_loss"].append(val_loss)
                backend.model.train()

        backend.model.eval()
        self._backend = backend
        return self

    def _validation_loss(self, X_val, y_val) -> float:
        proba = self.predict_proba(X_val)[:, 1]
        labels = check_binary_labels(y_val)
        return float(np.mean([bce_loss(int(y), p) for y, p in zip(labels, proba)]))

    def predict_proba(self, X) -> np.ndarray:
        if self._backend is None:
            raise RuntimeError("matcher is not fitted; call fit() or load()")
        pairs = check_pairs(X)
        if not pairs:
            return np.zeros((0, 2))
        self._backend.model.eval()
        scores = []
        with torch.no_grad():
            for start in range(0, len(pairs), self.batch_size):
                batch, truncations = self._backend.collate(
                    pairs[start : start + self.batch_size]
                )
                self.truncation_count_ += truncations
                scores.append(torch.sigmoid(self._backend.logits(batch)).numpy())
        return stack_proba(np.concatenate(scores))

    # --- checkpointing -------------------------------------------------------

    def save(self, directory: str | Path, data_manifest_hash: str | None = None) -> Path:
        """Serialize weights + config into a checkpoint directory.

        The manifest carries a content hash over the saved files so reruns can
        verify they loaded exactly the weights they expect.
        """
        if self._backend is None:
            raise RuntimeError("nothing to save; matcher is not fitted")
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        self._backend.save(directory)
        manifest = {
            "backend": self._backend.name,
            "base_model_identifier": self.base_model_identifier,
            "decision_threshold": self.decision_threshold,
            "train_config": self._config().to_dict(),
            "history": self.history_,
            "data_manifest_hash": data_manifest_hash,
            "content_hash": _hash_directory(directory),
        }
        with open(directory / "manifest.json", "w", encoding="utf-8") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True)
            fh.write("\n")
        return directory

    @classmethod
    def load(cls, directory: str | Path) -> "CrossEncoderMatcher":
        directory = Path(directory)
        with open(directory / "manifest.json", encoding="utf-8") as fh:
            manifest = json.load(fh)
        config = TrainConfig(**manifest["train_config"])
        matcher = cls.from_config(
            config, decision_threshold=manifest.get("decision_threshold", 0.5)
        )
        backend = _make_backend(config)
        backend.load(directory)
        backend.model.eval()
        matcher._backend = backend
        matcher.history_ = manifest.get("history", {})
        return matcher


def train_cross_encoder(
    training_pairs,
    validation_pairs=None,
    config: TrainConfig | None = None,
    decision_threshold: float = 0.5,
    checkpoint_dir: str | Path | None = None,
) -> CrossEncoderMatcher:
    """Train a cross-encoder from LabeledPair sequences (or a TrainingSet).

    The fitted matcher carries per-epoch loss history in ``history_``; pass
    ``checkpoint_dir`` to serialize it immediately after training.
    """
    config = config or TrainConfig()
    X, y = pairs_to_xy(training_pairs)
    if not X:
        raise ValueError("training set is empty")
    validation = pairs_to_xy(validation_pairs) if validation_pairs else None
    matcher = CrossEncoderMatcher.from_config(config, decision_threshold)
    matcher.fit(X, y, validation=validation)
    if checkpoint_dir is not None:
        matcher.save(checkpoint_dir)
    return matcher


def pairs_to_xy(pairs) -> tuple[list[tuple[str, str]], list[int]]:
    """(case_title, excerpt_text) inputs and labels from LabeledPairs."""
    items = getattr(pairs, "pairs", pairs)
    X = [(p.case_title, p.excerpt_text) for p in items]
    y = [p.label for p in items]
    return X, y


def _hash_directory(directory: Path) -> str:
    digest = hashlib.sha256()
    for path in sorted(directory.rglob("*")):
        if path.is_file() and path.name != "manifest.json":
            digest.update(path.name.encode())
            digest.update(path.read_bytes())
    return digest.hexdigest()
