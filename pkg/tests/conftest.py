"""Shared builders for synthetic corpora and input files."""

from __future__ import annotations

import json
from datetime import datetime, timedelta, timezone

import numpy as np
import pytest

from mtriage.corpus import Corpus, SentenceRecord

BASE_TS = datetime(2021, 7, 1, tzinfo=timezone.utc)


def make_record(
    rec_id: str,
    origin: str = "train",
    source: str = "hello world",
    translation: str = "hola mundo",
    reference: str | None = None,
    day: int = 0,
    provenance: str = "demo",
    **kwargs,
) -> SentenceRecord:
    if origin == "train" and reference is None:
        reference = translation
    return SentenceRecord(
        id=rec_id,
        origin=origin,
        source_text=source,
        translation_text=translation,
        reference_text=reference if origin == "train" else None,
        timestamp=BASE_TS + timedelta(days=day) if origin == "log" else None,
        provenance=provenance,
        **kwargs,
    )


def make_corpus(records, pair=("en", "es")) -> Corpus:
    return Corpus(records=list(records), language_pair=pair)


def write_jsonl(path, rows):
    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row, ensure_ascii=False) + "\n")
    return path


@pytest.fixture
def tiny_inputs(tmp_path):
    """Three train rows, two log rows, plus a matching embedding file."""
    train = write_jsonl(
        tmp_path / "train.jsonl",
        [
            {"id": "t-1", "source": "good morning", "translation": "buenos días",
             "reference": "buenos días", "provenance": "tatoeba"},
            {"id": "t-2", "source": "see you later", "translation": "hasta luego",
             "reference": "hasta luego", "provenance": "tatoeba"},
            {"id": "t-3", "source": "thank you", "translation": "gracias",
             "reference": "gracias", "provenance": "news"},
        ],
    )
    log = write_jsonl(
        tmp_path / "log.jsonl",
        [
            {"id": "l-1", "source": "where is the bank", "translation": "dónde está el banco",
             "timestamp": "2021-07-02T10:00:00Z", "provenance": "chat-app"},
            {"id": "l-2", "source": "my head hurts", "translation": "me duele la cabeza",
             "timestamp": "2021-08-03T11:30:00Z", "provenance": "browser-ext"},
        ],
    )
    rng = np.random.default_rng(5)
    emb = write_jsonl(
        tmp_path / "emb.jsonl",
        [{"id": rid, "vector": [float(x) for x in rng.normal(size=8)]}
         for rid in ("t-1", "t-2", "t-3", "l-1", "l-2")],
    )
    return train, log, emb
