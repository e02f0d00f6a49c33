"""Gaussian-KDE familiarity scoring of usage logs against the training cloud.

A diagonal-bandwidth Gaussian KDE is fit to the training records' 2D
projections. The familiarity of a log sentence is the log-likelihood of its
projection under that density, in nats. Scoring goes through a precomputed
d x d grid of log-likelihoods so cost per sentence is one lookup instead of a
sum over all n training points.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.spatial import cKDTree
from scipy.special import logsumexp

from .corpus import Corpus

GRID_MAGIC = b"AFGR"

EXACT_SUM = "exact-sum"
TREE = "tree"


@dataclass(frozen=True)
class KdeConfig:
    grid_density: int = 200
    projection_dim: int = 2  # fixed; kept for the complexity contract
    acceleration: str = EXACT_SUM
    rel_tolerance: float = 1e-6

    def __post_init__(self):
        if self.grid_density < 2:
            raise ValueError("grid_density must be >= 2")
        if self.acceleration not in (EXACT_SUM, TREE):
            raise ValueError(f"unknown acceleration {self.acceleration!r}")


@dataclass
class KdeModel:
    """Training coordinates plus a diagonal positive-definite bandwidth matrix."""

    train_points: np.ndarray  # (n, 2) float64
    bandwidth: np.ndarray  # 2x2 diagonal

    def __post_init__(self):
        self.train_points = np.asarray(self.train_points, dtype=np.float64)
        self.bandwidth = np.asarray(self.bandwidth, dtype=np.float64)
        if self.train_points.ndim != 2 or self.train_points.shape[1] != 2:
            raise ValueError("train_points must have shape (n, 2)")
        if self.n < 2:
            raise ValueError("need at least 2 training points")
        diag = np.diag(self.bandwidth)
        if self.bandwidth.shape != (2, 2) or np.any(diag <= 0):
            raise ValueError("bandwidth must be a 2x2 diagonal matrix with positive diagonal")

    @property
    def n(self) -> int:
        return self.train_points.shape[0]

    @property
    def h(self) -> tuple[float, float]:
        d = np.diag(self.bandwidth)
        return (math.sqrt(d[0]), math.sqrt(d[1]))


def fit_kde(train_points) -> KdeModel:
    """Fit with the 2D rule-of-thumb bandwidth h_j = std_j * n^(-1/6)."""
    pts = np.asarray(train_points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError("train_points must have shape (n, 2)")
    n = pts.shape[0]
    if n < 2:
        raise ValueError("need at least 2 training points")
    std = pts.std(axis=0, ddof=1)
    if np.any(std == 0):
        axis = "x" if std[0] == 0 else "y"
        raise ValueError(
            f"zero variance on {axis} axis; jitter the points or set a manual bandwidth"
        )
    h = std * n ** (-1.0 / 6.0)
    return KdeModel(train_points=pts, bandwidth=np.diag(h * h))


def _log_norm(model: KdeModel) -> float:
    h1, h2 = model.h
    return math.log(model.n) + math.log(2.0 * math.pi * h1 * h2)


def fa_batch(
    model: KdeModel,
    points,
    acceleration: str = EXACT_SUM,
    rel_tolerance: float = 1e-6,
    chunk_elems: int = 12_000_000,
) -> np.ndarray:
    """Log-likelihoods for an array of 2D query points.

    exact-sum evaluates the full kernel sum in log space; tree mode truncates
    kernels whose total contribution is provably below rel_tolerance of the sum.
    The sum runs over all n points per query, so the exponents are computed in
    inner-product form (one matrix product per chunk) instead of per-pair
    differences; the log-sum-exp shift still makes every term <= 1.
    """
    q = np.atleast_2d(np.asarray(points, dtype=np.float64))
    if acceleration == TREE:
        return _fa_batch_tree(model, q, rel_tolerance)
    h = np.asarray(model.h)
    # -|qs - s|^2 / 2 == qs.s - |s|^2/2 - |qs|^2/2 in bandwidth-scaled coords
    scaled = model.train_points / h
    s_aug = np.empty((model.n, 3))
    s_aug[:, :2] = scaled
    s_aug[:, 2] = -0.5 * np.einsum("ij,ij->i", scaled, scaled)
    out = np.empty(q.shape[0], dtype=np.float64)
    chunk = max(1, chunk_elems // max(1, model.n))
    log_norm = _log_norm(model)
    for start in range(0, q.shape[0], chunk):
        qs = q[start : start + chunk] / h
        q2 = np.einsum("ij,ij->i", qs, qs)
        q_aug = np.column_stack([qs, np.ones(qs.shape[0])])
        g = q_aug @ s_aug.T
        rowmax = g.max(axis=1)
        g -= rowmax[:, None]
        np.exp(g, out=g)
        out[start : start + chunk] = (
            np.log(g.sum(axis=1)) + rowmax - 0.5 * q2 - log_norm
        )
    return out


def _fa_batch_tree(model: KdeModel, q: np.ndarray, rel_tolerance: float) -> np.ndarray:
    h = np.array(model.h)
    scaled_train = model.train_points / h
    scaled_q = q / h
    tree = cKDTree(scaled_train)
    d0, _ = tree.query(scaled_q, k=1)
    # Keeping everything within sqrt(d0^2 + 2 ln(n/tol)) bounds the dropped
    # mass by rel_tolerance * exp(-d0^2/2) <= rel_tolerance * sum.
    radius = np.sqrt(d0 * d0 + 2.0 * math.log(model.n / rel_tolerance))
    neighborhoods = tree.query_ball_point(scaled_q, r=radius)
    log_norm = _log_norm(model)
    out = np.empty(q.shape[0], dtype=np.float64)
    for i, idx in enumerate(neighborhoods):
        diff = scaled_q[i] - scaled_train[idx]
        exponents = -0.5 * np.einsum("ij,ij->i", diff, diff)
        out[i] = logsumexp(exponents) - log_norm
    return out


def fa_exact(model: KdeModel, point) -> float:
    """Exact familiarity at one 2D point via full log-space summation."""
    return float(fa_batch(model, [point], acceleration=EXACT_SUM)[0])


@dataclass
class FamiliarityGrid:
    """d x d log-likelihoods at cell centers over the training bounding box."""

    density: int
    bounds: tuple[float, float, float, float]  # min_x, max_x, min_y, max_y
    values: np.ndarray = field(repr=False)  # (d, d), indexed [ix, iy]

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.shape != (self.density, self.density):
            raise ValueError("values must be a density x density matrix")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("grid values must all be finite")

    def cell_centers(self) -> tuple[np.ndarray, np.ndarray]:
        min_x, max_x, min_y, max_y = self.bounds
        d = self.density
        xs = min_x + (np.arange(d) + 0.5) * (max_x - min_x) / d
        ys = min_y + (np.arange(d) + 0.5) * (max_y - min_y) / d
        return xs, ys


def _grid_values_exact(model: KdeModel, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Full kernel sums at every (xs[i], ys[j]) via the separable kernel.

    exp(-(dx^2 + dy^2)/2) factors per axis, so the d x d sums reduce to one
    matrix product of per-axis kernel tables. Per-row max shifts keep every
    term <= 1; cells where the product still underflows to zero are recomputed
    with a plain log-sum-exp.
    """
    h1, h2 = model.h
    ax = -0.5 * ((xs[:, None] - model.train_points[None, :, 0]) / h1) ** 2
    by = -0.5 * ((ys[:, None] - model.train_points[None, :, 1]) / h2) ** 2
    amax = ax.max(axis=1)
    bmax = by.max(axis=1)
    ea = np.exp(ax - amax[:, None])
    eb = np.exp(by - bmax[:, None])
    sums = ea @ eb.T
    log_norm = _log_norm(model)
    with np.errstate(divide="ignore"):
        values = np.log(sums) + amax[:, None] + bmax[None, :] - log_norm
    for i, j in np.argwhere(sums == 0.0):
        values[i, j] = logsumexp(ax[i] + by[j]) - log_norm
    return values


def build_grid(model: KdeModel, config: KdeConfig = KdeConfig()) -> FamiliarityGrid:
    """Evaluate the density at every cell center of a uniform grid.

    The grid is constrained to the training points' bounding box, so it uses
    the same bounds as the projection model.
    """
    d = config.grid_density
    min_x = float(model.train_points[:, 0].min())
    max_x = float(model.train_points[:, 0].max())
    min_y = float(model.train_points[:, 1].min())
    max_y = float(model.train_points[:, 1].max())
    if not (max_x > min_x and max_y > min_y):
        raise ValueError("degenerate training bounds")
    xs = min_x + (np.arange(d) + 0.5) * (max_x - min_x) / d
    ys = min_y + (np.arange(d) + 0.5) * (max_y - min_y) / d
    if config.acceleration == TREE:
        gx, gy = np.meshgrid(xs, ys, indexing="ij")
        centers = np.column_stack([gx.ravel(), gy.ravel()])
        values = fa_batch(
            model, centers, acceleration=TREE, rel_tolerance=config.rel_tolerance
        ).reshape(d, d)
    else:
        values = _grid_values_exact(model, xs, ys)
    return FamiliarityGrid(density=d, bounds=(min_x, max_x, min_y, max_y), values=values)


def lookup_indices(grid: FamiliarityGrid, points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Floor-index points into cells, clamping out-of-bounds coordinates per axis."""
    min_x, max_x, min_y, max_y = grid.bounds
    d = grid.density
    ix = np.floor((points[:, 0] - min_x) / (max_x - min_x) * d).astype(np.int64)
    iy = np.floor((points[:, 1] - min_y) / (max_y - min_y) * d).astype(np.int64)
    return np.clip(ix, 0, d - 1), np.clip(iy, 0, d - 1)


def fa_lookup_batch(grid: FamiliarityGrid, points) -> np.ndarray:
    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    ix, iy = lookup_indices(grid, pts)
    return grid.values[ix, iy]


def fa_lookup(grid: FamiliarityGrid, point) -> float:
    """Grid-binned familiarity: the precomputed value of the cell the point falls in."""
    return float(fa_lookup_batch(grid, [point])[0])


def score_logs(corpus: Corpus, grid: FamiliarityGrid, include_train: bool = False) -> Corpus:
    """Fill familiarity for every log record from its projected coordinate."""
    targets = corpus.records if include_train else corpus.log_records()
    for rec in targets:
        if rec.projection is None:
            raise ValueError(f"record {rec.id!r} has no projection")
    for rec in targets:
        rec.familiarity = fa_lookup(grid, rec.projection)
    return corpus


def save_grid(grid: FamiliarityGrid, path):
    """Persist as magic, u32 density, 4 f64 bounds, then row-major f64 values."""
    with open(path, "wb") as fh:
        fh.write(GRID_MAGIC)
        fh.write(struct.pack("<I", grid.density))
        fh.write(struct.pack("<4d", *grid.bounds))
        fh.write(np.ascontiguousarray(grid.values, dtype="<f8").tobytes())


def load_grid(path) -> FamiliarityGrid:
    data = Path(path).read_bytes()
    if data[:4] != GRID_MAGIC:
        raise ValueError(f"{path}: bad magic bytes, expected {GRID_MAGIC!r}")
    (d,) = struct.unpack_from("<I", data, 4)
    bounds = struct.unpack_from("<4d", data, 8)
    values = np.frombuffer(data, dtype="<f8", count=d * d, offset=40).reshape(d, d).copy()
    return FamiliarityGrid(density=d, bounds=tuple(bounds), values=values)
