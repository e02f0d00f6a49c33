"""Ingest, validate, and store training data and usage logs as sentence records.

Two JSONL inputs (training pairs with references, usage logs with timestamps)
become one uniform record collection. Embeddings are produced externally and
attached from a JSONL or binary sidecar file.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Optional

import numpy as np

EMBEDDING_MAGIC = b"AEMB"

_TRAIN_REQUIRED = ("id", "source", "translation", "reference", "provenance")
_LOG_REQUIRED = ("id", "source", "translation", "timestamp", "provenance")


class IngestError(ValueError):
    """Raised when an input file violates the corpus schema."""


@dataclass
class SentenceRecord:
    """One source/translation pair from either the training set or usage logs."""

    id: str
    origin: str  # "train" | "log"
    source_text: str
    translation_text: str
    reference_text: Optional[str] = None  # train only
    timestamp: Optional[datetime] = None  # log only, UTC
    provenance: str = ""
    embedding_ref: Optional[int] = None
    projection: Optional[tuple[float, float]] = None
    chrf: Optional[float] = None  # train only, [0, 1]
    familiarity: Optional[float] = None  # log only, nats
    failed_rules: set[str] = field(default_factory=set)
    topic_id: Optional[int] = None

    def to_json_dict(self) -> dict:
        return {
            "id": self.id,
            "origin": self.origin,
            "source": self.source_text,
            "translation": self.translation_text,
            "reference": self.reference_text,
            "timestamp": format_timestamp(self.timestamp),
            "provenance": self.provenance,
            "projection": list(self.projection) if self.projection else None,
            "chrf": self.chrf,
            "familiarity": self.familiarity,
            "failed_rules": sorted(self.failed_rules),
            "topic_id": self.topic_id,
        }


@dataclass
class Corpus:
    """Immutable-after-ingest container for train and log records."""

    records: list[SentenceRecord]
    language_pair: tuple[str, str]
    dropped_empty: int = 0
    embeddings: Optional[np.ndarray] = None  # float32, row per embedding_ref

    def __post_init__(self):
        self._by_id = {r.id: r for r in self.records}

    @property
    def n_train(self) -> int:
        return sum(1 for r in self.records if r.origin == "train")

    @property
    def n_log(self) -> int:
        return sum(1 for r in self.records if r.origin == "log")

    def get(self, record_id: str) -> SentenceRecord:
        try:
            return self._by_id[record_id]
        except KeyError:
            raise KeyError(f"unknown record id {record_id!r}") from None

    def __contains__(self, record_id: str) -> bool:
        return record_id in self._by_id

    def train_records(self) -> list[SentenceRecord]:
        return [r for r in self.records if r.origin == "train"]

    def log_records(self) -> list[SentenceRecord]:
        return [r for r in self.records if r.origin == "log"]

    def embedding_of(self, record_id: str) -> np.ndarray:
        rec = self.get(record_id)
        if self.embeddings is None or rec.embedding_ref is None:
            raise ValueError(f"record {record_id!r} has no embedding attached")
        return self.embeddings[rec.embedding_ref]


def parse_timestamp(value: str) -> datetime:
    """Parse an RFC 3339 timestamp and normalize to UTC."""
    text = value.strip()
    if text.endswith(("Z", "z")):
        text = text[:-1] + "+00:00"
    try:
        dt = datetime.fromisoformat(text)
    except ValueError as exc:
        raise IngestError(f"invalid timestamp {value!r}: {exc}") from None
    if dt.tzinfo is None:
        raise IngestError(f"timestamp {value!r} has no UTC offset")
    return dt.astimezone(timezone.utc)


def format_timestamp(dt: Optional[datetime]) -> Optional[str]:
    if dt is None:
        return None
    return dt.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def _parse_line(raw: str, lineno: int, path: Path) -> dict:
    try:
        obj = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise IngestError(f"{path}:{lineno}: malformed JSON line: {exc}") from None
    if not isinstance(obj, dict):
        raise IngestError(f"{path}:{lineno}: expected a JSON object")
    return obj


def _record_from_obj(obj: dict, origin: str, lineno: int, path: Path) -> SentenceRecord:
    required = _TRAIN_REQUIRED if origin == "train" else _LOG_REQUIRED
    for key in required:
        if obj.get(key) is None:
            raise IngestError(f"{path}:{lineno}: {origin} record missing field {key!r}")
    # Cross-partition fields are forbidden, not silently dropped; an explicit
    # null is treated as absent so exported files re-ingest cleanly.
    if origin == "log" and obj.get("reference") is not None:
        raise IngestError(
            f"{path}:{lineno}: log record {obj['id']!r} carries reference_text"
        )
    if origin == "train" and obj.get("timestamp") is not None:
        raise IngestError(
            f"{path}:{lineno}: train record {obj['id']!r} carries a timestamp"
        )
    for key in ("id", "source", "translation", "provenance"):
        if not isinstance(obj[key], str):
            raise IngestError(f"{path}:{lineno}: field {key!r} must be a string")
    return SentenceRecord(
        id=obj["id"],
        origin=origin,
        source_text=obj["source"],
        translation_text=obj["translation"],
        reference_text=obj["reference"] if origin == "train" else None,
        timestamp=parse_timestamp(obj["timestamp"]) if origin == "log" else None,
        provenance=obj["provenance"],
    )


def _read_records(path: Path, origin: str) -> tuple[list[SentenceRecord], int]:
    records: list[SentenceRecord] = []
    dropped = 0
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            raw = raw.strip()
            if not raw:
                continue
            obj = _parse_line(raw, lineno, path)
            rec = _record_from_obj(obj, origin, lineno, path)
            if not rec.source_text.strip():
                dropped += 1
                continue
            records.append(rec)
    return records, dropped


def ingest(train_file, log_file, language_pair: tuple[str, str]) -> Corpus:
    """Load train and log JSONL files into a validated corpus.

    Records with empty source text are dropped and counted; duplicate ids,
    malformed lines, and cross-partition schema violations raise IngestError.
    """
    train_path, log_path = Path(train_file), Path(log_file)
    for p in (train_path, log_path):
        if not p.exists():
            raise IngestError(f"input file not found: {p}")
    train_records, dropped_t = _read_records(train_path, "train")
    log_records, dropped_l = _read_records(log_path, "log")
    records = train_records + log_records
    seen: set[str] = set()
    for rec in records:
        if rec.id in seen:
            raise IngestError(f"duplicate record id {rec.id!r}")
        seen.add(rec.id)
    return Corpus(
        records=records,
        language_pair=(language_pair[0], language_pair[1]),
        dropped_empty=dropped_t + dropped_l,
    )


def _read_embeddings_jsonl(path: Path) -> dict[str, np.ndarray]:
    vectors: dict[str, np.ndarray] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            raw = raw.strip()
            if not raw:
                continue
            obj = _parse_line(raw, lineno, path)
            if "id" not in obj or "vector" not in obj:
                raise IngestError(f"{path}:{lineno}: embedding row needs id and vector")
            vectors[obj["id"]] = np.asarray(obj["vector"], dtype=np.float32)
    return vectors


def _read_embeddings_binary(path: Path) -> dict[str, np.ndarray]:
    vectors: dict[str, np.ndarray] = {}
    data = path.read_bytes()
    if data[:4] != EMBEDDING_MAGIC:
        raise IngestError(f"{path}: bad magic bytes, expected {EMBEDDING_MAGIC!r}")
    (dim,) = struct.unpack_from("<I", data, 4)
    offset = 8
    while offset < len(data):
        (id_len,) = struct.unpack_from("<I", data, offset)
        offset += 4
        rec_id = data[offset : offset + id_len].decode("utf-8")
        offset += id_len
        vec = np.frombuffer(data, dtype="<f4", count=dim, offset=offset).copy()
        offset += 4 * dim
        vectors[rec_id] = vec
    return vectors


def read_embedding_file(path) -> dict[str, np.ndarray]:
    """Read either the JSONL or the AEMB binary embedding layout."""
    path = Path(path)
    with open(path, "rb") as fh:
        magic = fh.read(4)
    if magic == EMBEDDING_MAGIC:
        return _read_embeddings_binary(path)
    return _read_embeddings_jsonl(path)


def write_embedding_file(path, vectors: dict[str, np.ndarray], binary: bool = False):
    """Write embeddings, losslessly at float32, in either supported layout."""
    path = Path(path)
    if not vectors:
        raise ValueError("no vectors to write")
    dims = {len(v) for v in vectors.values()}
    if len(dims) != 1:
        raise ValueError(f"vectors have mixed dimensions: {sorted(dims)}")
    if binary:
        dim = dims.pop()
        with open(path, "wb") as fh:
            fh.write(EMBEDDING_MAGIC)
            fh.write(struct.pack("<I", dim))
            for rec_id, vec in vectors.items():
                raw = rec_id.encode("utf-8")
                fh.write(struct.pack("<I", len(raw)))
                fh.write(raw)
                fh.write(np.asarray(vec, dtype="<f4").tobytes())
    else:
        with open(path, "w", encoding="utf-8") as fh:
            for rec_id, vec in vectors.items():
                row = {"id": rec_id, "vector": [float(x) for x in np.asarray(vec, dtype=np.float32)]}
                fh.write(json.dumps(row, ensure_ascii=False) + "\n")


def attach_embeddings(corpus: Corpus, embedding_file, normalize: bool = True) -> Corpus:
    """Attach one fixed-dimension vector per record, optionally unit-normalized.

    Every record id must appear in the file; extra ids are ignored.
    """
    vectors = read_embedding_file(embedding_file)
    dims = {len(v) for v in vectors.values()}
    if len(dims) > 1:
        raise IngestError(f"embedding dimensions differ across rows: {sorted(dims)}")
    rows = []
    for i, rec in enumerate(corpus.records):
        vec = vectors.get(rec.id)
        if vec is None:
            raise IngestError(f"embedding file missing record id {rec.id!r}")
        if not np.all(np.isfinite(vec)):
            raise IngestError(f"embedding for {rec.id!r} has non-finite components")
        vec = np.asarray(vec, dtype=np.float32)
        if normalize:
            norm = float(np.linalg.norm(vec.astype(np.float64)))
            if norm == 0.0:
                raise IngestError(f"cannot normalize zero vector for {rec.id!r}")
            vec = (vec.astype(np.float64) / norm).astype(np.float32)
        rows.append(vec)
        rec.embedding_ref = i
    corpus.embeddings = np.stack(rows) if rows else np.zeros((0, 0), dtype=np.float32)
    return corpus


def serialize_corpus(corpus: Corpus, path):
    """Write all records (with any computed fields) as deterministic JSONL."""
    with open(path, "w", encoding="utf-8") as fh:
        for rec in corpus.records:
            fh.write(json.dumps(rec.to_json_dict(), ensure_ascii=False, sort_keys=True) + "\n")


def load_corpus(path, language_pair: tuple[str, str]) -> Corpus:
    """Read back a corpus serialized by serialize_corpus."""
    records: list[SentenceRecord] = []
    path = Path(path)
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            raw = raw.strip()
            if not raw:
                continue
            obj = _parse_line(raw, lineno, path)
            rec = SentenceRecord(
                id=obj["id"],
                origin=obj["origin"],
                source_text=obj["source"],
                translation_text=obj["translation"],
                reference_text=obj.get("reference"),
                timestamp=parse_timestamp(obj["timestamp"]) if obj.get("timestamp") else None,
                provenance=obj.get("provenance", ""),
                projection=tuple(obj["projection"]) if obj.get("projection") else None,
                chrf=obj.get("chrf"),
                familiarity=obj.get("familiarity"),
                failed_rules=set(obj.get("failed_rules") or ()),
                topic_id=obj.get("topic_id"),
            )
            records.append(rec)
    return Corpus(records=records, language_pair=language_pair)
