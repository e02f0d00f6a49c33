"""Iso-contour extraction from a scalar grid via marching squares.

Used to draw train/log density outlines behind the embedding scatter plot.
Segments from adjacent lattice cells share bit-identical crossing points, so
polylines stitch exactly and are either closed or end on the grid boundary.
"""

from __future__ import annotations

import numpy as np

Point = tuple[float, float]


def _interp(level, p1: Point, v1: float, p2: Point, v2: float) -> Point:
    t = 0.0 if v2 == v1 else (level - v1) / (v2 - v1)
    return (p1[0] + t * (p2[0] - p1[0]), p1[1] + t * (p2[1] - p1[1]))


def _cell_segments(level, xa, xb, ya, yb, va, vb, vc, vd):
    """Segments for one lattice cell.

    Corners: a=(xa,ya) b=(xb,ya) c=(xb,yb) d=(xa,yb); bit set = value >= level.
    """
    case = (va >= level) | ((vb >= level) << 1) | ((vc >= level) << 2) | ((vd >= level) << 3)
    if case in (0, 15):
        return []
    s = lambda: _interp(level, (xa, ya), va, (xb, ya), vb)
    e = lambda: _interp(level, (xb, ya), vb, (xb, yb), vc)
    n = lambda: _interp(level, (xa, yb), vd, (xb, yb), vc)
    w = lambda: _interp(level, (xa, ya), va, (xa, yb), vd)
    if case == 1 or case == 14:
        return [(w(), s())]
    if case == 2 or case == 13:
        return [(s(), e())]
    if case == 3 or case == 12:
        return [(w(), e())]
    if case == 4 or case == 11:
        return [(e(), n())]
    if case == 6 or case == 9:
        return [(s(), n())]
    if case == 7 or case == 8:
        return [(w(), n())]
    center = (va + vb + vc + vd) / 4.0
    if case == 5:  # a and c inside
        if center >= level:
            return [(s(), e()), (n(), w())]
        return [(w(), s()), (e(), n())]
    # case 10: b and d inside
    if center >= level:
        return [(w(), s()), (e(), n())]
    return [(s(), e()), (n(), w())]


def _stitch(segments: list[tuple[Point, Point]]) -> list[list[Point]]:
    by_endpoint: dict[Point, list[int]] = {}
    for idx, (p, q) in enumerate(segments):
        by_endpoint.setdefault(p, []).append(idx)
        by_endpoint.setdefault(q, []).append(idx)
    used = [False] * len(segments)

    def take_next(point: Point) -> int | None:
        for idx in by_endpoint.get(point, ()):
            if not used[idx]:
                return idx
        return None

    polylines = []
    for start in range(len(segments)):
        if used[start]:
            continue
        used[start] = True
        p, q = segments[start]
        chain = [p, q]
        # grow forward from q, then backward from p
        for grow_end in (True, False):
            while True:
                tip = chain[-1] if grow_end else chain[0]
                nxt = take_next(tip)
                if nxt is None:
                    break
                used[nxt] = True
                a, b = segments[nxt]
                new_point = b if a == tip else a
                if grow_end:
                    chain.append(new_point)
                else:
                    chain.insert(0, new_point)
                if chain[0] == chain[-1]:
                    break
            if chain[0] == chain[-1]:
                break
        polylines.append(chain)
    return polylines


def marching_squares(xs, ys, values, level: float) -> list[list[Point]]:
    """Polylines of the level set of a scalar field sampled at (xs[i], ys[j]).

    values is indexed [ix, iy]; output coordinates are in data space.
    """
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    segments: list[tuple[Point, Point]] = []
    for i in range(len(xs) - 1):
        for j in range(len(ys) - 1):
            va = values[i, j]
            vb = values[i + 1, j]
            vc = values[i + 1, j + 1]
            vd = values[i, j + 1]
            lo = min(va, vb, vc, vd)
            hi = max(va, vb, vc, vd)
            if level < lo or level > hi:
                continue
            segments.extend(
                _cell_segments(level, xs[i], xs[i + 1], ys[j], ys[j + 1], va, vb, vc, vd)
            )
    return _stitch(segments)


def contour_levels(values, percentiles=(20, 40, 60, 80, 95)) -> list[float]:
    return [float(np.percentile(np.asarray(values), p)) for p in percentiles]
