"""Conjunctive sentence filters shared by set export, the HTTP API, and the UI.

Score filters are origin-scoped: chrf bounds only constrain train records and
familiarity bounds only constrain log records, matching how the metrics are
split between the two partitions. Time bounds likewise apply to logs only.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from datetime import datetime
from typing import Optional

from .corpus import SentenceRecord, parse_timestamp

_WORD_RE = re.compile(r"\w+", re.UNICODE)


@dataclass
class SentenceFilter:
    time_from: Optional[datetime] = None
    time_to: Optional[datetime] = None
    keywords: list[str] = field(default_factory=list)
    kw_mode: str = "or"  # "or" | "and"
    chrf_min: Optional[float] = None
    chrf_max: Optional[float] = None
    fa_min: Optional[float] = None
    fa_max: Optional[float] = None
    provenance: Optional[list[str]] = None
    query: Optional[str] = None  # free-text substring, source or translation
    overlap_set: Optional[str] = None

    def is_empty(self) -> bool:
        return self == SentenceFilter()

    def matches(self, rec: SentenceRecord, overlap_members: Optional[set[str]] = None) -> bool:
        if rec.origin == "log":
            if self.time_from is not None and (rec.timestamp is None or rec.timestamp < self.time_from):
                return False
            if self.time_to is not None and (rec.timestamp is None or rec.timestamp > self.time_to):
                return False
            if self.fa_min is not None and (rec.familiarity is None or rec.familiarity < self.fa_min):
                return False
            if self.fa_max is not None and (rec.familiarity is None or rec.familiarity > self.fa_max):
                return False
        else:
            if self.chrf_min is not None and (rec.chrf is None or rec.chrf < self.chrf_min):
                return False
            if self.chrf_max is not None and (rec.chrf is None or rec.chrf > self.chrf_max):
                return False
        if self.keywords:
            tokens = {t.lower() for t in _WORD_RE.findall(rec.source_text)}
            wanted = [k.lower() for k in self.keywords]
            if self.kw_mode == "and":
                if not all(k in tokens for k in wanted):
                    return False
            else:
                if not any(k in tokens for k in wanted):
                    return False
        if self.provenance is not None and rec.provenance not in self.provenance:
            return False
        if self.query:
            needle = self.query.lower()
            if needle not in rec.source_text.lower() and needle not in rec.translation_text.lower():
                return False
        if self.overlap_set is not None:
            if overlap_members is None or rec.id not in overlap_members:
                return False
        return True


def filter_from_params(params: dict) -> SentenceFilter:
    """Build a filter from flat (HTTP query style) string parameters."""
    f = SentenceFilter()
    if params.get("time_from"):
        f.time_from = parse_timestamp(params["time_from"])
    if params.get("time_to"):
        f.time_to = parse_timestamp(params["time_to"])
    if params.get("keywords"):
        raw = params["keywords"]
        f.keywords = raw if isinstance(raw, list) else [k for k in raw.split(",") if k]
    mode = params.get("kw_mode")
    if mode:
        if mode not in ("or", "and"):
            raise ValueError(f"kw_mode must be 'or' or 'and', got {mode!r}")
        f.kw_mode = mode
    for name in ("chrf_min", "chrf_max", "fa_min", "fa_max"):
        if params.get(name) is not None:
            setattr(f, name, float(params[name]))
    if params.get("provenance"):
        raw = params["provenance"]
        f.provenance = raw if isinstance(raw, list) else [p for p in raw.split(",") if p]
    if params.get("q"):
        f.query = params["q"]
    if params.get("overlap_set"):
        f.overlap_set = params["overlap_set"]
    return f
