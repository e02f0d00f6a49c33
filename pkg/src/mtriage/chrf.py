"""Character n-gram F-score between a model translation and its reference."""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass

from .corpus import Corpus

_WHITESPACE = re.compile(r"\s+")


@dataclass(frozen=True)
class ChrfConfig:
    max_order: int = 6
    beta: float = 2.0
    remove_whitespace: bool = True

    def __post_init__(self):
        if self.max_order < 1:
            raise ValueError("max_order must be >= 1")
        if self.beta <= 0:
            raise ValueError("beta must be > 0")


def _ngram_counts(text: str, order: int) -> Counter:
    return Counter(text[i : i + order] for i in range(len(text) - order + 1))


def chrf(hypothesis: str, reference: str, config: ChrfConfig = ChrfConfig()) -> float:
    """Score in [0, 1]; F computed from order-averaged precision and recall.

    Orders where both sides have no n-grams are skipped, so strings shorter
    than max_order never divide by zero.
    """
    if config.remove_whitespace:
        hypothesis = _WHITESPACE.sub("", hypothesis)
        reference = _WHITESPACE.sub("", reference)
    if not reference:
        raise ValueError("reference must be non-empty")

    precisions: list[float] = []
    recalls: list[float] = []
    for order in range(1, config.max_order + 1):
        hyp_counts = _ngram_counts(hypothesis, order)
        ref_counts = _ngram_counts(reference, order)
        hyp_total = sum(hyp_counts.values())
        ref_total = sum(ref_counts.values())
        if hyp_total == 0 and ref_total == 0:
            continue
        matches = sum(min(count, ref_counts[gram]) for gram, count in hyp_counts.items())
        precisions.append(matches / hyp_total if hyp_total else 0.0)
        recalls.append(matches / ref_total if ref_total else 0.0)

    if not precisions:
        return 0.0
    p = sum(precisions) / len(precisions)
    r = sum(recalls) / len(recalls)
    if p + r == 0.0:
        return 0.0
    b2 = config.beta * config.beta
    return (1.0 + b2) * p * r / (b2 * p + r)


def score_training(corpus: Corpus, config: ChrfConfig = ChrfConfig()) -> Corpus:
    """Fill chrf for every train record; log records are untouched."""
    for rec in corpus.records:
        if rec.origin == "train":
            rec.chrf = chrf(rec.translation_text, rec.reference_text or "", config)
    return corpus
