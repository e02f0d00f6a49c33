"""Unfamiliar-topic extraction from the least-familiar usage logs.

The lowest-familiarity logs are grouped by density clustering in the 2D
projection; each group is named by its top class-based TF-IDF keywords.
"""

from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional

import numpy as np
from scipy.spatial import cKDTree

from .corpus import Corpus

_WORD_RE = re.compile(r"\w+", re.UNICODE)


@dataclass(frozen=True)
class TopicConfig:
    sample_size: int = 50_000
    top_k_topics: int = 100
    min_cluster_size: int = 25
    cluster_radius: Optional[float] = None  # None: 2x mean 1-NN distance
    rng_seed: int = 0
    stopword_list: Optional[str] = None  # path; None: bundled English list
    keyword_count: int = 10
    keyword_score_threshold: float = 0.0

    def __post_init__(self):
        if self.sample_size <= 0:
            raise ValueError("sample_size must be positive")
        if self.top_k_topics <= 0:
            raise ValueError("top_k_topics must be positive")
        if self.min_cluster_size < 2:
            raise ValueError("min_cluster_size must be >= 2")


@dataclass
class Topic:
    topic_id: int
    member_ids: list[str]
    keywords: list[tuple[str, float]] = field(default_factory=list)


def select_unfamiliar(corpus: Corpus, config: TopicConfig) -> list[str]:
    """Ids of the sample_size log records with the lowest familiarity.

    Ties break by record id ascending so the sample is reproducible.
    """
    logs = corpus.log_records()
    for rec in logs:
        if rec.familiarity is None:
            raise ValueError(f"log record {rec.id!r} has no familiarity score")
    ranked = sorted(logs, key=lambda r: (r.familiarity, r.id))
    return [r.id for r in ranked[: config.sample_size]]


def default_cluster_radius(points: np.ndarray) -> float:
    """2x the mean 1-nearest-neighbor distance of the sampled projection."""
    tree = cKDTree(points)
    dists, _ = tree.query(points, k=2)
    return 2.0 * float(dists[:, 1].mean())


def cluster(ids: list[str], corpus: Corpus, config: TopicConfig) -> list[Topic]:
    """Density-connected groups in the 2D projection (classic DBSCAN).

    Points are processed in id order and neighbor expansion is FIFO over
    sorted indices, so membership is deterministic. Noise points stay
    unassigned. Topics come back sorted by size descending, truncated to
    top_k_topics.
    """
    if not ids:
        return []
    ordered = sorted(ids)
    points = np.array([corpus.get(i).projection for i in ordered], dtype=np.float64)
    if np.any(~np.isfinite(points)):
        raise ValueError("cluster requires finite projections for all ids")
    radius = config.cluster_radius
    if radius is None:
        radius = default_cluster_radius(points)
    min_size = config.min_cluster_size

    tree = cKDTree(points)
    neighborhoods = tree.query_ball_point(points, r=radius)
    n = len(ordered)
    labels = np.full(n, -1, dtype=np.int64)
    is_core = np.array([len(nb) >= min_size for nb in neighborhoods])
    cluster_id = 0
    for i in range(n):
        if labels[i] != -1 or not is_core[i]:
            continue
        labels[i] = cluster_id
        queue = sorted(neighborhoods[i])
        head = 0
        while head < len(queue):
            j = queue[head]
            head += 1
            if labels[j] == -1:
                labels[j] = cluster_id
                if is_core[j]:
                    queue.extend(sorted(k for k in neighborhoods[j] if labels[k] == -1))
        cluster_id += 1

    groups: dict[int, list[str]] = {}
    for idx, label in enumerate(labels):
        if label >= 0:
            groups.setdefault(int(label), []).append(ordered[idx])
    topics = [Topic(topic_id=0, member_ids=members) for members in groups.values()]
    topics.sort(key=lambda t: (-len(t.member_ids), t.member_ids[0]))
    topics = topics[: config.top_k_topics]
    for new_id, topic in enumerate(topics):
        topic.topic_id = new_id
        for rid in topic.member_ids:
            corpus.get(rid).topic_id = new_id
    return topics


def load_stopwords(path: Optional[str] = None) -> frozenset[str]:
    if path is None:
        text = (resources.files("mtriage") / "data" / "stopwords_en.txt").read_text("utf-8")
    else:
        text = Path(path).read_text(encoding="utf-8")
    return frozenset(w.strip().lower() for w in text.splitlines() if w.strip())


def tokenize(text: str, stopwords: frozenset[str]) -> list[str]:
    return [t for t in (m.lower() for m in _WORD_RE.findall(text)) if t not in stopwords]


def ctfidf(
    class_documents: list[list[str]],
    stopwords: frozenset[str],
    keyword_count: int,
    score_threshold: float = 0.0,
) -> list[list[tuple[str, float]]]:
    """Class-based TF-IDF: W(t, c) = tf(t, c) * log(1 + A / f(t)).

    A is the average token count per class, f(t) the total count of t across
    all classes. Ties rank by term lexicographic order.
    """
    class_counts = [
        Counter(tok for doc in docs for tok in tokenize(doc, stopwords))
        for docs in class_documents
    ]
    totals: Counter = Counter()
    for counts in class_counts:
        totals.update(counts)
    n_classes = len(class_counts)
    if n_classes == 0:
        return []
    avg_tokens = sum(totals.values()) / n_classes
    results = []
    for counts in class_counts:
        scored = [
            (term, tf * math.log(1.0 + avg_tokens / totals[term]))
            for term, tf in counts.items()
        ]
        scored = [(t, w) for t, w in scored if w >= score_threshold]
        scored.sort(key=lambda item: (-item[1], item[0]))
        results.append(scored[:keyword_count])
    return results


def ctfidf_keywords(topics: list[Topic], corpus: Corpus, config: TopicConfig) -> list[Topic]:
    """Attach top keywords to every topic, scored against the other topics."""
    if not topics:
        return topics
    stopwords = load_stopwords(config.stopword_list)
    docs = [[corpus.get(rid).source_text for rid in t.member_ids] for t in topics]
    keyword_lists = ctfidf(docs, stopwords, config.keyword_count, config.keyword_score_threshold)
    for topic, keywords in zip(topics, keyword_lists):
        topic.keywords = keywords
    return topics


def name_topic(topic: Topic) -> str:
    if not topic.keywords:
        return f"topic-unnamed-{topic.topic_id}"
    terms = [term for term, _ in topic.keywords[:4]]
    return "topic-" + "_".join(terms)
