"""On-disk layout for pipeline artifacts plus the append-only edits journal.

A store directory holds the corpus, embeddings, projection file, the two
familiarity grids, per-set JSON files, a manifest with content hashes, and a
config snapshot. Every writer here is deterministic: the same config and
inputs produce byte-identical stores.
"""

from __future__ import annotations

import hashlib
import json
import os
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional

from . import familiarity
from .corpus import Corpus, load_corpus, serialize_corpus
from .sets import ChallengeSet

CONFIG_FILE = "config.json"
CORPUS_FILE = "corpus.jsonl"
EMBEDDINGS_FILE = "embeddings.aemb"
PROJECTION_FILE = "projection.jsonl"
TRAIN_GRID_FILE = "kde_train.afgr"
LOG_GRID_FILE = "kde_log.afgr"
TOPICS_FILE = "topics.json"
MANIFEST_FILE = "manifest.json"
JOURNAL_FILE = "journal.jsonl"
SETS_DIR = "sets"
LOCK_FILE = ".lock"


class StoreError(ValueError):
    """Raised when a store directory is missing pieces or fails validation."""


def _sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 16), b""):
            digest.update(block)
    return digest.hexdigest()


def _dump_json(obj, path: Path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, ensure_ascii=False, sort_keys=True, indent=2)
        fh.write("\n")


class ArtifactStore:
    """Filesystem-backed pipeline artifacts rooted at one directory."""

    def __init__(self, root):
        self.root = Path(root)

    # -- paths -------------------------------------------------------------
    def path(self, name: str) -> Path:
        return self.root / name

    def set_path(self, set_id: str) -> Path:
        return self.root / SETS_DIR / f"{set_id}.json"

    # -- creation ----------------------------------------------------------
    def initialize(self, config_snapshot: dict):
        self.root.mkdir(parents=True, exist_ok=True)
        (self.root / SETS_DIR).mkdir(exist_ok=True)
        _dump_json(config_snapshot, self.path(CONFIG_FILE))
        journal = self.path(JOURNAL_FILE)
        if not journal.exists():
            journal.touch()

    def write_corpus(self, corpus: Corpus):
        serialize_corpus(corpus, self.path(CORPUS_FILE))

    def write_projection_file(self, corpus: Corpus):
        with open(self.path(PROJECTION_FILE), "w", encoding="utf-8") as fh:
            for rec in corpus.records:
                if rec.projection is None:
                    raise StoreError(f"record {rec.id!r} has no projection to persist")
                row = {"id": rec.id, "x": rec.projection[0], "y": rec.projection[1]}
                fh.write(json.dumps(row, ensure_ascii=False, sort_keys=True) + "\n")

    def write_grid(self, grid, name: str):
        familiarity.save_grid(grid, self.path(name))

    def write_topics(self, topics):
        payload = [
            {
                "topic_id": t.topic_id,
                "member_ids": t.member_ids,
                "keywords": [[term, score] for term, score in t.keywords],
            }
            for t in topics
        ]
        _dump_json(payload, self.path(TOPICS_FILE))

    def write_set(self, cset: ChallengeSet):
        _dump_json(cset.to_json_dict(), self.set_path(cset.set_id))

    def write_manifest(self, sets: list[ChallengeSet], extra: Optional[dict] = None):
        entries = []
        for cset in sorted(sets, key=lambda s: s.set_id):
            file_name = f"{SETS_DIR}/{cset.set_id}.json"
            entries.append(
                {
                    "set_id": cset.set_id,
                    "name": cset.name,
                    "kind": cset.kind,
                    "file": file_name,
                    "sha256": _sha256(self.root / file_name),
                }
            )
        manifest = {"sets": entries}
        if extra:
            manifest.update(extra)
        _dump_json(manifest, self.path(MANIFEST_FILE))

    # -- loading -----------------------------------------------------------
    def load_config(self) -> dict:
        path = self.path(CONFIG_FILE)
        if not path.exists():
            raise StoreError(f"store {self.root} is missing its config snapshot")
        return json.loads(path.read_text(encoding="utf-8"))

    def load_manifest(self) -> dict:
        path = self.path(MANIFEST_FILE)
        if not path.exists():
            raise StoreError(f"store {self.root} has no manifest; run the pipeline first")
        return json.loads(path.read_text(encoding="utf-8"))

    def load_corpus(self) -> Corpus:
        config = self.load_config()
        pair = tuple(config.get("language_pair", ("en", "es")))
        return load_corpus(self.path(CORPUS_FILE), pair)

    def load_grid(self, name: str):
        return familiarity.load_grid(self.path(name))

    def load_topics(self):
        from .topics import Topic

        payload = json.loads(self.path(TOPICS_FILE).read_text(encoding="utf-8"))
        return [
            Topic(
                topic_id=t["topic_id"],
                member_ids=list(t["member_ids"]),
                keywords=[(term, score) for term, score in t["keywords"]],
            )
            for t in payload
        ]

    def load_sets(self) -> list[ChallengeSet]:
        manifest = self.load_manifest()
        sets = []
        for entry in manifest["sets"]:
            path = self.root / entry["file"]
            if not path.exists():
                raise StoreError(f"manifest lists missing set file {entry['file']}")
            sets.append(ChallengeSet.from_json_dict(json.loads(path.read_text("utf-8"))))
        return sets

    def validate(self):
        """Reject stores with a missing config snapshot or corrupted set files."""
        self.load_config()
        manifest = self.load_manifest()
        for entry in manifest["sets"]:
            path = self.root / entry["file"]
            if not path.exists():
                raise StoreError(f"manifest lists missing set file {entry['file']}")
            actual = _sha256(path)
            if actual != entry["sha256"]:
                raise StoreError(
                    f"content hash mismatch for {entry['file']}: "
                    f"manifest {entry['sha256'][:12]}.., file {actual[:12]}.."
                )

    # -- edits journal -----------------------------------------------------
    def append_journal(self, set_id: str, op: str, payload: dict, version: int):
        entry = {
            "set_id": set_id,
            "op": op,
            "payload": payload,
            "version": version,
            "timestamp": datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%S.%fZ"),
        }
        with open(self.path(JOURNAL_FILE), "a", encoding="utf-8") as fh:
            fh.write(json.dumps(entry, ensure_ascii=False, sort_keys=True) + "\n")
            fh.flush()
            os.fsync(fh.fileno())

    def refresh_set(self, cset: ChallengeSet, all_sets: list[ChallengeSet]):
        """Rewrite one set file and its manifest entry after an edit."""
        self.write_set(cset)
        manifest = self.load_manifest()
        extra = {k: v for k, v in manifest.items() if k != "sets"}
        self.write_manifest(all_sets, extra)
