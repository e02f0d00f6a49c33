"""End-to-end pipeline orchestration over an artifact store.

Every stage reads whatever it needs from the store and writes its outputs
back, so composing the stage subcommands by hand produces a store that is
byte-identical to one full run with the same config. A single global seed
derives all stage seeds.
"""

from __future__ import annotations

import hashlib
import json
import os
import shutil
from dataclasses import dataclass, field
from pathlib import Path

from . import chrf as chrf_mod
from . import familiarity as fam_mod
from . import geometry, rules, sets, topics
from .corpus import Corpus, attach_embeddings, ingest, write_embedding_file
from .store import (
    ArtifactStore,
    CORPUS_FILE,
    EMBEDDINGS_FILE,
    LOCK_FILE,
    LOG_GRID_FILE,
    TRAIN_GRID_FILE,
)

STAGES = ("ingest", "project", "familiarity", "rules", "chrf", "topics", "build-sets")


class PipelineError(RuntimeError):
    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"stage {stage!r} failed: {cause}")
        self.stage = stage
        self.cause = cause


def stage_seed(seed: int, stage: str) -> int:
    digest = hashlib.sha256(f"{seed}:{stage}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


@dataclass
class PipelineConfig:
    train_file: str = ""
    log_file: str = ""
    embedding_file: str = ""
    coords_file: str | None = None  # None: linear-fallback projection
    language_pair: tuple[str, str] = ("en", "es")
    normalize_embeddings: bool = True
    seed: int = 0
    chrf: chrf_mod.ChrfConfig = field(default_factory=chrf_mod.ChrfConfig)
    kde: fam_mod.KdeConfig = field(default_factory=fam_mod.KdeConfig)
    topics: topics.TopicConfig = field(default_factory=topics.TopicConfig)
    seeds_per_topic: int = 15
    expansion_radius: float = 0.6
    rule_pack_dir: str | None = None
    emoji_multiset: bool = False

    @classmethod
    def from_dict(cls, obj: dict) -> "PipelineConfig":
        chrf_cfg = chrf_mod.ChrfConfig(**obj.get("chrf", {}))
        kde_cfg = fam_mod.KdeConfig(**obj.get("kde", {}))
        topic_kwargs = dict(obj.get("topics", {}))
        topic_kwargs.setdefault("rng_seed", stage_seed(obj.get("seed", 0), "topics"))
        topic_cfg = topics.TopicConfig(**topic_kwargs)
        expansion = obj.get("expansion", {})
        return cls(
            train_file=obj.get("train_file", ""),
            log_file=obj.get("log_file", ""),
            embedding_file=obj.get("embedding_file", ""),
            coords_file=obj.get("coords_file"),
            language_pair=tuple(obj.get("language_pair", ("en", "es"))),
            normalize_embeddings=obj.get("normalize_embeddings", True),
            seed=obj.get("seed", 0),
            chrf=chrf_cfg,
            kde=kde_cfg,
            topics=topic_cfg,
            seeds_per_topic=expansion.get("seeds_per_topic", 15),
            expansion_radius=expansion.get("radius", 0.6),
            rule_pack_dir=obj.get("rule_pack_dir"),
            emoji_multiset=obj.get("emoji_multiset", False),
        )

    @classmethod
    def from_file(cls, path) -> "PipelineConfig":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))

    def to_dict(self) -> dict:
        return {
            "train_file": self.train_file,
            "log_file": self.log_file,
            "embedding_file": self.embedding_file,
            "coords_file": self.coords_file,
            "language_pair": list(self.language_pair),
            "normalize_embeddings": self.normalize_embeddings,
            "seed": self.seed,
            "chrf": {
                "max_order": self.chrf.max_order,
                "beta": self.chrf.beta,
                "remove_whitespace": self.chrf.remove_whitespace,
            },
            "kde": {
                "grid_density": self.kde.grid_density,
                "acceleration": self.kde.acceleration,
                "rel_tolerance": self.kde.rel_tolerance,
            },
            "topics": {
                "sample_size": self.topics.sample_size,
                "top_k_topics": self.topics.top_k_topics,
                "min_cluster_size": self.topics.min_cluster_size,
                "cluster_radius": self.topics.cluster_radius,
                "rng_seed": self.topics.rng_seed,
                "stopword_list": self.topics.stopword_list,
                "keyword_count": self.topics.keyword_count,
                "keyword_score_threshold": self.topics.keyword_score_threshold,
            },
            "expansion": {"seeds_per_topic": self.seeds_per_topic, "radius": self.expansion_radius},
            "rule_pack_dir": self.rule_pack_dir,
            "emoji_multiset": self.emoji_multiset,
        }


class StoreLock:
    """One pipeline run per store directory."""

    def __init__(self, root: Path):
        self.path = Path(root) / LOCK_FILE

    def __enter__(self):
        self.path.parent.mkdir(parents=True, exist_ok=True)
        try:
            fd = os.open(self.path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
        except FileExistsError:
            raise RuntimeError(
                f"store {self.path.parent} is locked by another run "
                f"(remove {self.path} if that run is dead)"
            ) from None
        os.write(fd, str(os.getpid()).encode())
        os.close(fd)
        return self

    def __exit__(self, *exc):
        self.path.unlink(missing_ok=True)


def _load_state(store: ArtifactStore, with_embeddings: bool = True) -> Corpus:
    corpus = store.load_corpus()
    if with_embeddings and store.path(EMBEDDINGS_FILE).exists():
        # already normalized at ingest; re-attach verbatim
        corpus = attach_embeddings(corpus, store.path(EMBEDDINGS_FILE), normalize=False)
    return corpus


def stage_ingest(config: PipelineConfig, store: ArtifactStore):
    store.initialize(config.to_dict())
    corpus = ingest(config.train_file, config.log_file, config.language_pair)
    corpus = attach_embeddings(corpus, config.embedding_file, config.normalize_embeddings)
    vectors = {rec.id: corpus.embeddings[rec.embedding_ref] for rec in corpus.records}
    write_embedding_file(store.path(EMBEDDINGS_FILE), vectors, binary=True)
    store.write_corpus(corpus)
    return corpus


def stage_project(config: PipelineConfig, store: ArtifactStore):
    corpus = _load_state(store)
    if config.coords_file:
        model = geometry.import_projection(corpus, config.coords_file)
    else:
        model = geometry.fallback_project(corpus, seed=stage_seed(config.seed, "project"))
    store.write_corpus(corpus)
    store.write_projection_file(corpus)
    return model


def stage_familiarity(config: PipelineConfig, store: ArtifactStore):
    corpus = _load_state(store, with_embeddings=False)
    train_pts = [r.projection for r in corpus.train_records()]
    log_pts = [r.projection for r in corpus.log_records()]
    if any(p is None for p in train_pts) or any(p is None for p in log_pts):
        raise ValueError("projection stage must run before familiarity")
    model = fam_mod.fit_kde(train_pts)
    grid = fam_mod.build_grid(model, config.kde)
    store.write_grid(grid, TRAIN_GRID_FILE)
    log_model = fam_mod.fit_kde(log_pts)
    store.write_grid(fam_mod.build_grid(log_model, config.kde), LOG_GRID_FILE)
    fam_mod.score_logs(corpus, grid)
    store.write_corpus(corpus)
    return grid


def stage_rules(config: PipelineConfig, store: ArtifactStore):
    corpus = _load_state(store, with_embeddings=False)
    rule_list = rules.builtin_rules(
        corpus.language_pair, pack_dir=config.rule_pack_dir,
        emoji_multiset=config.emoji_multiset,
    )
    outcomes = rules.run_rules(corpus, rule_list)
    store.write_corpus(corpus)
    return outcomes


def stage_chrf(config: PipelineConfig, store: ArtifactStore):
    corpus = _load_state(store, with_embeddings=False)
    chrf_mod.score_training(corpus, config.chrf)
    store.write_corpus(corpus)
    return corpus


def stage_topics(config: PipelineConfig, store: ArtifactStore):
    corpus = _load_state(store, with_embeddings=False)
    selected = topics.select_unfamiliar(corpus, config.topics)
    topic_list = topics.cluster(selected, corpus, config.topics)
    topics.ctfidf_keywords(topic_list, corpus, config.topics)
    store.write_topics(topic_list)
    store.write_corpus(corpus)
    return topic_list


def stage_build_sets(config: PipelineConfig, store: ArtifactStore):
    corpus = _load_state(store)
    topic_list = store.load_topics()
    all_sets = sets.build_unit_test_sets(corpus)
    all_sets += sets.expand_topic_sets(
        topic_list, corpus,
        seeds_per_topic=config.seeds_per_topic,
        radius=config.expansion_radius,
        rng_seed=stage_seed(config.seed, "expansion"),
    )
    sets.attach_set_keywords(all_sets, corpus, config.topics)
    sets.assign_previews(all_sets, rng_seed=stage_seed(config.seed, "preview"))
    sets.refresh_all_metrics(all_sets, corpus)
    for cset in all_sets:
        store.write_set(cset)
    store.write_manifest(
        all_sets,
        extra={
            "language_pair": list(corpus.language_pair),
            "seed": config.seed,
            "familiarity_range": list(sets.global_familiarity_range(corpus)),
            "counts": {"n_train": corpus.n_train, "n_log": corpus.n_log},
        },
    )
    return all_sets


_STAGE_FUNCS = {
    "ingest": stage_ingest,
    "project": stage_project,
    "familiarity": stage_familiarity,
    "rules": stage_rules,
    "chrf": stage_chrf,
    "topics": stage_topics,
    "build-sets": stage_build_sets,
}


def run_stage(name: str, config: PipelineConfig, store: ArtifactStore):
    func = _STAGE_FUNCS[name]
    try:
        return func(config, store)
    except Exception as exc:
        raise PipelineError(name, exc) from exc


def run_pipeline(config: PipelineConfig, store_root) -> ArtifactStore:
    """Execute every stage into a fresh store; partial output is removed on error.

    The store is built in a sibling temp directory and atomically moved into
    place only when every stage has finished.
    """
    root = Path(store_root)
    if root.exists() and any(root.iterdir()):
        raise FileExistsError(f"store directory {root} already exists and is not empty")
    tmp_root = root.with_name(root.name + ".partial")
    if tmp_root.exists():
        shutil.rmtree(tmp_root)
    store = ArtifactStore(tmp_root)
    try:
        with StoreLock(tmp_root):
            for name in STAGES:
                run_stage(name, config, store)
    except BaseException:
        shutil.rmtree(tmp_root, ignore_errors=True)
        raise
    if root.exists():
        root.rmdir()
    os.replace(tmp_root, root)
    return ArtifactStore(root)


def summarize(store: ArtifactStore) -> list[dict]:
    """Per-set summary rows for the CLI table and --json output."""
    rows = []
    for cset in store.load_sets():
        m = cset.metrics
        rows.append(
            {
                "set_id": cset.set_id,
                "name": cset.name,
                "kind": cset.kind,
                "log_count": m.log_count if m else 0,
                "train_count": m.train_count if m else 0,
                "mean_chrf": m.mean_chrf if m else None,
                "mean_familiarity": m.mean_familiarity if m else None,
                "train_ratio": m.train_ratio if m else None,
            }
        )
    return rows
