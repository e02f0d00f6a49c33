"""2D projection of embeddings and high-dimensional neighbor search.

The 2D coordinates are normally computed upstream (a nonlinear projection
tuned offline) and imported from a file; a deterministic linear fallback onto
the top-2 principal directions keeps the pipeline self-contained for demos.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.spatial import cKDTree

from .corpus import Corpus


@dataclass
class ProjectionModel:
    kind: str  # "imported" | "linear-fallback"
    bounds: tuple[float, float, float, float]  # min_x, max_x, min_y, max_y
    basis: np.ndarray | None = None  # 2 x D, fallback only

    def __post_init__(self):
        min_x, max_x, min_y, max_y = self.bounds
        if not (max_x > min_x and max_y > min_y):
            raise ValueError(f"degenerate projection bounds {self.bounds}")


def _train_bounds(corpus: Corpus) -> tuple[float, float, float, float]:
    pts = np.array([r.projection for r in corpus.train_records()], dtype=float)
    if pts.size == 0:
        raise ValueError("no train projections to derive bounds from")
    return (
        float(pts[:, 0].min()),
        float(pts[:, 0].max()),
        float(pts[:, 1].min()),
        float(pts[:, 1].max()),
    )


def import_projection(corpus: Corpus, coords_file) -> ProjectionModel:
    """Attach externally computed 2D coordinates; bounds come from train points."""
    coords: dict[str, tuple[float, float]] = {}
    path = Path(coords_file)
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            raw = raw.strip()
            if not raw:
                continue
            obj = json.loads(raw)
            x, y = float(obj["x"]), float(obj["y"])
            if not (math.isfinite(x) and math.isfinite(y)):
                raise ValueError(f"{path}:{lineno}: non-finite coordinate for {obj['id']!r}")
            coords[obj["id"]] = (x, y)
    for rec in corpus.records:
        if rec.id not in coords:
            raise ValueError(f"coordinates file missing record id {rec.id!r}")
        rec.projection = coords[rec.id]
    return ProjectionModel(kind="imported", bounds=_train_bounds(corpus))


def fallback_project(corpus: Corpus, seed: int = 0) -> ProjectionModel:
    """Project embeddings onto the top-2 principal directions of the train set.

    Deterministic given the seed; each output axis is scaled to unit variance
    over the train records. Sign of each direction is fixed by its largest
    component so results do not depend on the SVD implementation.
    """
    if corpus.embeddings is None:
        raise ValueError("embeddings must be attached before projecting")
    train = corpus.train_records()
    if len(train) < 3:
        raise ValueError(f"fallback projection needs >=3 train records, got {len(train)}")
    train_vecs = np.stack([corpus.embeddings[r.embedding_ref] for r in train]).astype(np.float64)
    mean = train_vecs.mean(axis=0)
    _, _, vt = np.linalg.svd(train_vecs - mean, full_matrices=False)
    basis = vt[:2].copy()
    for i in range(2):
        j = int(np.argmax(np.abs(basis[i])))
        if basis[i, j] < 0:
            basis[i] = -basis[i]
    all_vecs = corpus.embeddings.astype(np.float64)
    projected = (all_vecs - mean) @ basis.T
    train_proj = train_vecs @ basis.T - mean @ basis.T
    scale = train_proj.std(axis=0, ddof=1)
    if np.any(scale == 0):
        raise ValueError("train embeddings are degenerate along a principal axis")
    projected /= scale
    for rec in corpus.records:
        x, y = projected[rec.embedding_ref]
        rec.projection = (float(x), float(y))
    return ProjectionModel(kind="linear-fallback", bounds=_train_bounds(corpus), basis=basis)


def neighbors_within(corpus: Corpus, seed_ids: list[str], radius: float) -> set[str]:
    """Train record ids whose min Euclidean distance to any seed is < radius.

    The threshold is strict; a tree prunes candidates but membership is decided
    by exact distances, so results equal a brute-force scan.
    """
    if radius <= 0:
        raise ValueError("radius must be positive")
    if corpus.embeddings is None:
        raise ValueError("embeddings must be attached")
    seeds = np.stack([corpus.embedding_of(sid) for sid in seed_ids]).astype(np.float64)
    train = corpus.train_records()
    if not train:
        return set()
    train_vecs = np.stack([corpus.embeddings[r.embedding_ref] for r in train]).astype(np.float64)
    tree = cKDTree(train_vecs)
    candidates: set[int] = set()
    for hits in tree.query_ball_point(seeds, r=radius):
        candidates.update(hits)
    result: set[str] = set()
    for idx in candidates:
        dists = np.linalg.norm(seeds - train_vecs[idx], axis=1)
        if float(dists.min()) < radius:
            result.add(train[idx].id)
    return result
