"""Assemble, expand, measure, edit, and export challenge sets.

Two kinds of sets exist: "mismatch-<rule>" sets collect records failing a
unit-test rule; "topic-*" sets collect an unfamiliar log topic plus nearby
training sentences. Edits journal removals reversibly and metrics are
recomputed after every change; the underlying corpus is never mutated.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import geometry
from .corpus import Corpus, format_timestamp
from .filters import SentenceFilter
from .topics import Topic, TopicConfig, ctfidf, load_stopwords, name_topic

HISTOGRAM_BINS = 20
PREVIEW_SIZE = 100

UNIT_TEST = "unit-test"
TOPIC = "topic"


@dataclass
class SetMetrics:
    log_count: int
    train_count: int
    train_ratio: Optional[float]  # None when the set is empty
    mean_chrf: Optional[float]
    chrf_histogram: list[int]
    mean_familiarity: Optional[float]
    familiarity_histogram: list[int]
    familiarity_range: tuple[float, float]
    source_counts: dict[str, int]
    overlap_counts: dict[str, int]
    timeline: dict[str, int]  # UTC day -> log count

    def to_json_dict(self) -> dict:
        return {
            "log_count": self.log_count,
            "train_count": self.train_count,
            "train_ratio": self.train_ratio,
            "mean_chrf": self.mean_chrf,
            "chrf_histogram": self.chrf_histogram,
            "mean_familiarity": self.mean_familiarity,
            "familiarity_histogram": self.familiarity_histogram,
            "familiarity_range": list(self.familiarity_range),
            "source_counts": self.source_counts,
            "overlap_counts": self.overlap_counts,
            "timeline": self.timeline,
        }


@dataclass
class ChallengeSet:
    set_id: str
    name: str
    kind: str  # UNIT_TEST | TOPIC
    member_ids: list[str]
    removed_ids: set[str] = field(default_factory=set)
    metrics: Optional[SetMetrics] = None
    keywords: list[tuple[str, float]] = field(default_factory=list)
    preview_ids: list[str] = field(default_factory=list)
    version: int = 1
    rule_name: Optional[str] = None
    topic_id: Optional[int] = None

    def effective_members(self) -> list[str]:
        return [m for m in self.member_ids if m not in self.removed_ids]

    def to_json_dict(self) -> dict:
        return {
            "set_id": self.set_id,
            "name": self.name,
            "kind": self.kind,
            "member_ids": self.member_ids,
            "removed_ids": sorted(self.removed_ids),
            "metrics": self.metrics.to_json_dict() if self.metrics else None,
            "keywords": [[t, s] for t, s in self.keywords],
            "preview_ids": self.preview_ids,
            "version": self.version,
            "rule_name": self.rule_name,
            "topic_id": self.topic_id,
        }

    @classmethod
    def from_json_dict(cls, obj: dict) -> "ChallengeSet":
        metrics = None
        if obj.get("metrics"):
            m = obj["metrics"]
            metrics = SetMetrics(
                log_count=m["log_count"],
                train_count=m["train_count"],
                train_ratio=m["train_ratio"],
                mean_chrf=m["mean_chrf"],
                chrf_histogram=m["chrf_histogram"],
                mean_familiarity=m["mean_familiarity"],
                familiarity_histogram=m["familiarity_histogram"],
                familiarity_range=tuple(m["familiarity_range"]),
                source_counts=m["source_counts"],
                overlap_counts=m["overlap_counts"],
                timeline=m["timeline"],
            )
        return cls(
            set_id=obj["set_id"],
            name=obj["name"],
            kind=obj["kind"],
            member_ids=list(obj["member_ids"]),
            removed_ids=set(obj.get("removed_ids") or ()),
            metrics=metrics,
            keywords=[(t, s) for t, s in obj.get("keywords") or []],
            preview_ids=list(obj.get("preview_ids") or ()),
            version=obj.get("version", 1),
            rule_name=obj.get("rule_name"),
            topic_id=obj.get("topic_id"),
        )


def build_unit_test_sets(corpus: Corpus) -> list[ChallengeSet]:
    """One set per rule with at least one failing record, both partitions."""
    by_rule: dict[str, list[str]] = {}
    for rec in corpus.records:
        for rule_name in rec.failed_rules:
            by_rule.setdefault(rule_name, []).append(rec.id)
    sets = []
    for rule_name in sorted(by_rule):
        members = sorted(by_rule[rule_name])
        sets.append(
            ChallengeSet(
                set_id=f"ut-{rule_name}",
                name=f"mismatch-{rule_name}",
                kind=UNIT_TEST,
                member_ids=members,
                rule_name=rule_name,
            )
        )
    return sets


def expand_topic_sets(
    topics: list[Topic],
    corpus: Corpus,
    seeds_per_topic: int = 15,
    radius: float = 0.6,
    rng_seed: int = 0,
) -> list[ChallengeSet]:
    """Each topic becomes a set of its log members plus nearby train sentences.

    Seeds are sampled uniformly without replacement per topic (all members when
    the topic is smaller than seeds_per_topic); neighbors come from the strict
    high-dimensional radius search.
    """
    sets = []
    for topic in topics:
        members = sorted(topic.member_ids)
        rng = np.random.default_rng([rng_seed, topic.topic_id])
        if len(members) <= seeds_per_topic:
            seeds = list(members)
        else:
            picks = rng.choice(len(members), size=seeds_per_topic, replace=False)
            seeds = [members[i] for i in sorted(picks)]
        neighbors = geometry.neighbors_within(corpus, seeds, radius)
        sets.append(
            ChallengeSet(
                set_id=f"tp-{topic.topic_id:03d}",
                name=name_topic(topic),
                kind=TOPIC,
                member_ids=sorted(set(members) | neighbors),
                keywords=list(topic.keywords),
                topic_id=topic.topic_id,
            )
        )
    return sets


def _histogram(values: list[float], lo: float, hi: float) -> list[int]:
    if not values:
        return [0] * HISTOGRAM_BINS
    if hi <= lo:
        bins = [0] * HISTOGRAM_BINS
        bins[0] = len(values)
        return bins
    counts, _ = np.histogram(values, bins=HISTOGRAM_BINS, range=(lo, hi))
    return [int(c) for c in counts]


def global_familiarity_range(corpus: Corpus) -> tuple[float, float]:
    """Global FA range over all logs, so histograms are comparable across sets."""
    values = [r.familiarity for r in corpus.log_records() if r.familiarity is not None]
    if not values:
        return (0.0, 1.0)
    return (float(min(values)), float(max(values)))


def compute_metrics(
    cset: ChallengeSet,
    corpus: Corpus,
    all_sets: list[ChallengeSet],
    fa_range: Optional[tuple[float, float]] = None,
) -> SetMetrics:
    """Fill every metric over the set's non-removed members."""
    if fa_range is None:
        fa_range = global_familiarity_range(corpus)
    members = [corpus.get(m) for m in cset.effective_members()]
    trains = [r for r in members if r.origin == "train"]
    logs = [r for r in members if r.origin == "log"]
    for r in trains:
        if r.chrf is None:
            raise ValueError(f"train member {r.id!r} has no chrf score")
    for r in logs:
        if r.familiarity is None:
            raise ValueError(f"log member {r.id!r} has no familiarity score")
    chrf_values = [r.chrf for r in trains]
    fa_values = [r.familiarity for r in logs]
    total = len(trains) + len(logs)
    timeline: Counter = Counter()
    for r in logs:
        timeline[r.timestamp.strftime("%Y-%m-%d")] += 1
    overlap: dict[str, int] = {}
    mine = set(cset.effective_members())
    for other in all_sets:
        if other.set_id == cset.set_id or other.kind == cset.kind:
            continue
        shared = len(mine.intersection(other.effective_members()))
        if shared:
            overlap[other.set_id] = shared
    metrics = SetMetrics(
        log_count=len(logs),
        train_count=len(trains),
        train_ratio=len(trains) / total if total else None,
        mean_chrf=sum(chrf_values) / len(chrf_values) if chrf_values else None,
        chrf_histogram=_histogram(chrf_values, 0.0, 1.0),
        mean_familiarity=sum(fa_values) / len(fa_values) if fa_values else None,
        familiarity_histogram=_histogram(fa_values, fa_range[0], fa_range[1]),
        familiarity_range=fa_range,
        source_counts=dict(sorted(Counter(r.provenance for r in members).items())),
        overlap_counts=dict(sorted(overlap.items())),
        timeline=dict(sorted(timeline.items())),
    )
    cset.metrics = metrics
    return metrics


def refresh_all_metrics(sets: list[ChallengeSet], corpus: Corpus) -> None:
    fa_range = global_familiarity_range(corpus)
    for cset in sets:
        compute_metrics(cset, corpus, sets, fa_range)


def attach_set_keywords(sets: list[ChallengeSet], corpus: Corpus, config: TopicConfig) -> None:
    """Score keywords for sets that have none (topic sets keep their own)."""
    pending = [s for s in sets if not s.keywords]
    if not pending:
        return
    stopwords = load_stopwords(config.stopword_list)
    docs = [[corpus.get(m).source_text for m in s.effective_members()] for s in sets]
    keyword_lists = ctfidf(docs, stopwords, config.keyword_count, config.keyword_score_threshold)
    for cset, keywords in zip(sets, keyword_lists):
        if not cset.keywords:
            cset.keywords = keywords


def assign_previews(sets: list[ChallengeSet], rng_seed: int, size: int = PREVIEW_SIZE) -> None:
    """Fix each set's preview sample once per pipeline run, from the global seed."""
    for cset in sets:
        members = sorted(cset.member_ids)
        rng = np.random.default_rng([rng_seed] + [ord(c) for c in cset.set_id])
        if len(members) <= size:
            cset.preview_ids = list(members)
        else:
            picks = rng.choice(len(members), size=size, replace=False)
            cset.preview_ids = [members[i] for i in sorted(picks)]


def edit_set(
    cset: ChallengeSet,
    corpus: Corpus,
    all_sets: list[ChallengeSet],
    remove: Optional[list[str]] = None,
    unremove: Optional[list[str]] = None,
    rename: Optional[str] = None,
    fa_range: Optional[tuple[float, float]] = None,
) -> ChallengeSet:
    """Apply one edit, journal removals reversibly, and recompute metrics."""
    member_set = set(cset.member_ids)
    if remove:
        for rid in remove:
            if rid not in member_set:
                raise ValueError(f"cannot remove non-member {rid!r}")
        cset.removed_ids.update(remove)
    if unremove:
        for rid in unremove:
            if rid not in cset.removed_ids:
                raise ValueError(f"{rid!r} is not in the removal journal")
        cset.removed_ids.difference_update(unremove)
    if rename is not None:
        if not rename.strip():
            raise ValueError("set name must be non-empty")
        cset.name = rename
    cset.version += 1
    compute_metrics(cset, corpus, all_sets, fa_range)
    return cset


def export_rows(
    cset: ChallengeSet,
    corpus: Corpus,
    filters: Optional[SentenceFilter] = None,
    overlap_members: Optional[set[str]] = None,
) -> list[dict]:
    filters = filters or SentenceFilter()
    rows = []
    for mid in cset.effective_members():
        rec = corpus.get(mid)
        if not filters.matches(rec, overlap_members):
            continue
        rows.append(
            {
                "id": rec.id,
                "origin": rec.origin,
                "source": rec.source_text,
                "translation": rec.translation_text,
                "reference": rec.reference_text,
                "timestamp": format_timestamp(rec.timestamp),
                "provenance": rec.provenance,
                "set": cset.name,
                "chrf": rec.chrf,
                "familiarity": rec.familiarity,
                "failed_rules": sorted(rec.failed_rules),
                "topic_id": rec.topic_id,
            }
        )
    return rows


def export_set(
    cset: ChallengeSet,
    corpus: Corpus,
    filters: Optional[SentenceFilter],
    path,
    overlap_members: Optional[set[str]] = None,
) -> int:
    """Write currently filtered, non-removed members as JSONL; returns row count."""
    rows = export_rows(cset, corpus, filters, overlap_members)
    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row, ensure_ascii=False, sort_keys=True) + "\n")
    return len(rows)
