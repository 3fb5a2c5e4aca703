"""Prompt-based LLM baseline matcher.

Renders a fixed instruction prompt (optionally with two in-context examples,
one positive and one negative), sends it to a completion endpoint at
temperature 0, and maps a lone "0"/"1" reply to a probability. Anything else
is an abstention: logged, counted, and excluded from metrics by the evaluation
layer rather than silently coerced to a label.
"""

from __future__ import annotations

import logging
import os
import threading
import time
from dataclasses import dataclass, field
from typing import Protocol

import numpy as np

from .base import PairMatcher, check_pairs

logger = logging.getLogger(__name__)

INSTRUCTION = (
    "You are a privacy policy expert. Given a title and quote, your task is to "
    "evaluate whether the title represents the data practice described in the "
    "quote. Your output should only be either 0 (indicating the title does not "
    "represent the quote) or 1 (indicating the title represents the quote)."
)

SHOT_EXAMPLES = (
    {
        "title": "Third parties are involved in operating the service.",
        "quote": (
            "Note that we don't use any 3rd party website statistics tools "
            "like Google Analytics or similar."
        ),
        "output": "1",
    },
    {
        "title": "You can opt out of targeted advertising",
        "quote": (
            "Our CDN is Cloudflare, and they may include cookies with our "
            "pages to provide a better service."
        ),
        "output": "0",
    },
)


@dataclass(frozen=True)
class PromptTemplate:
    """Instruction plus optional two-shot examples with <title>/<quote> slots."""

    instruction: str = INSTRUCTION
    examples: tuple = ()

    def render(self, title: str, quote: str) -> str:
        blocks = [self.instruction]
        for i, example in enumerate(self.examples, start=1):
            blocks.append(
                f"Example {i}\n"
                f"Title: {example['title']}\n"
                f"Quote: {example['quote']}\n"
                f"Output: {example['output']}"
            )
        blocks.append(f"Title: {title}\nQuote: {quote}")
        return "\n\n".join(blocks)


def prompt_template(shots: int = 0) -> PromptTemplate:
    if shots == 0:
        return PromptTemplate()
    if shots == 2:
        return PromptTemplate(examples=SHOT_EXAMPLES)
    raise ValueError("shots must be 0 or 2")


class CompletionClient(Protocol):
    def complete(self, prompt: str) -> str: ...


class TransportError(RuntimeError):
    """Retriable transport-level failure while calling the completion API."""


class HttpCompletionClient:
    """Minimal chat-completions client (temperature 0, key from environment).

    Retries transport failures with exponential backoff and caps in-flight
    requests with a semaphore.
    """

    def __init__(
        self,
        base_url: str | None = None,
        model: str = "gpt-4",
        api_key_env: str = "COMPLETION_API_KEY",
        max_retries: int = 3,
        backoff_seconds: float = 1.0,
        max_concurrency: int = 4,
        timeout: float = 60.0,
    ):
        import httpx

        self.base_url = base_url or os.environ.get(
            "COMPLETION_API_BASE", "https://api.openai.com/v1"
        )
        self.model = model
        api_key = os.environ.get(api_key_env)
        if not api_key:
            raise RuntimeError(f"set {api_key_env} to use the prompt matcher")
        self.max_retries = max_retries
        self.backoff_seconds = backoff_seconds
        self._semaphore = threading.Semaphore(max_concurrency)
        self._client = httpx.Client(
            base_url=self.base_url,
            headers={"Authorization": f"Bearer {api_key}"},
            timeout=timeout,
        )

    def complete(self, prompt: str) -> str:
        import httpx

        payload = {
            "model": self.model,
            "temperature": 0,
            "messages": [{"role": "user", "content": prompt}],
        }
        last_error: Exception | None = None
        for attempt in range(self.max_retries):
            try:
                with self._semaphore:
                    response = self._client.post("/chat/completions", json=payload)
                response.raise_for_status()
                return response.json()["choices"][0]["message"]["content"]
            except httpx.HTTPError as exc:
                last_error = exc
                time.sleep(self.backoff_seconds * (2**attempt))
        raise TransportError(f"completion request failed: {last_error}")


@dataclass
class PromptMatcher(PairMatcher):
    """Matcher that delegates the match decision to a completion model."""

    client: CompletionClient = None
    shots: int = 0
    decision_threshold: float = 0.5
    abstain_count: int = field(default=0, init=False)

    _param_names = ("shots", "decision_threshold")

    def __post_init__(self):
        self.template = prompt_template(self.shots)

    def score_pair(self, case_title: str, excerpt_text: str) -> float | None:
        """Probability 1.0/0.0 for a "1"/"0" reply, None on abstention."""
        check_pairs([(case_title, excerpt_text)])
        reply = self.client.complete(self.template.render(case_title, excerpt_text))
        verdict = reply.strip()
        if verdict == "1":
            return 1.0
        if verdict == "0":
            return 0.0
        self.abstain_count += 1
        logger.warning("malformed completion reply %r; scored as abstain", reply)
        return None

    def predict_proba(self, X) -> np.ndarray:
        """(n, 2) probabilities with NaN rows marking abstentions."""
        pairs = check_pairs(X)
        rows = []
        for title, excerpt in pairs:
            p = self.score_pair(title, excerpt)
            rows.append([np.nan, np.nan] if p is None else [1.0 - p, p])
        return np.asarray(rows, dtype=float)

    def predict(self, X) -> np.ndarray:
        proba = self.predict_proba(X)[:, 1]
        out = np.full(proba.shape, -1, dtype=int)
        known = ~np.isnan(proba)
        out[known] = (proba[known] >= self.decision_threshold).astype(int)
        return out


def prompt_matcher(completion_client: CompletionClient, shots: int = 0) -> PromptMatcher:
    return PromptMatcher(client=completion_client, shots=shots)
