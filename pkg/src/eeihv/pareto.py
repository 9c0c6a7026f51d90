"""Pareto filtering and attained-set geometry (maximization convention).

A front is represented as an ``(k, m)`` array. For ``m = 2`` fronts are sorted
ascending in the first objective, hence strictly descending in the second.
"""

from __future__ import annotations

import numpy as np


class UnsupportedDimensionError(ValueError):
    pass


class ReferenceViolationError(ValueError):
    pass


def _as_points(points) -> np.ndarray:
    pts = np.asarray(points, dtype=float)
    if pts.size == 0:
        return pts.reshape(0, pts.shape[-1] if pts.ndim == 2 else 2)
    if pts.ndim != 2:
        raise ValueError(f"expected an (n, m) array of points, got shape {pts.shape}")
    return pts


def pareto_indices(points) -> np.ndarray:
    """Indices of the non-dominated points, one index per distinct point.

    Duplicates keep their first occurrence. The order of the returned indices
    matches the sorted front produced by :func:`pareto_filter`.
    """
    pts = _as_points(points)
    n, m = pts.shape
    if n == 0:
        return np.zeros(0, dtype=int)
    if m == 2:
        # descending y1, then descending y2; keep points that raise the running max of y2
        order = np.lexsort((np.arange(n), -pts[:, 1], -pts[:, 0]))
        keep = []
        best2 = -np.inf
        for i in order:
            if pts[i, 1] > best2:
                keep.append(i)
                best2 = pts[i, 1]
        return np.array(keep[::-1], dtype=int)
    # general m: pairwise strict-dominance test
    ge = np.all(pts[:, None, :] >= pts[None, :, :], axis=2)
    gt = np.any(pts[:, None, :] > pts[None, :, :], axis=2)
    dominated = np.any(ge & gt, axis=0)
    keep = []
    seen = set()
    for i in np.flatnonzero(~dominated):
        key = tuple(pts[i])
        if key not in seen:
            seen.add(key)
            keep.append(i)
    keep = np.array(keep, dtype=int)
    order = np.lexsort(pts[keep].T[::-1])
    return keep[order]


def pareto_filter(points) -> np.ndarray:
    """Non-dominated subset of ``points`` with duplicates collapsed, sorted."""
    pts = _as_points(points)
    return pts[pareto_indices(pts)]


def _front_above(points, r) -> np.ndarray:
    """Pareto front of the points that weakly dominate ``r``."""
    pts = _as_points(points)
    if pts.shape[0] == 0:
        return pts
    return pareto_filter(pts[np.all(pts >= r, axis=1)])


def hypervolume2d(points, r, clip: bool = False) -> float:
    """Exact area of the region in ``[r, inf)`` dominated by ``points``.

    Args:
        points: ``(k, 2)`` objective vectors; need not be pre-filtered.
        r: reference point.
        clip: if True, points that do not weakly dominate ``r`` are ignored
            (they attain nothing inside ``[r, inf)``); otherwise they raise.

    Raises:
        UnsupportedDimensionError: for ``m != 2``.
        ReferenceViolationError: a point lies below ``r`` and ``clip`` is False.
    """
    r = np.asarray(r, dtype=float)
    pts = _as_points(points)
    if r.shape != (2,) or (pts.size and pts.shape[1] != 2):
        raise UnsupportedDimensionError("exact hypervolume is implemented for two objectives only")
    if pts.shape[0] == 0:
        return 0.0
    if not clip and np.any(pts < r):
        raise ReferenceViolationError("a point does not dominate the reference point")
    front = _front_above(pts, r)
    if front.shape[0] == 0:
        return 0.0
    widths = np.diff(np.r_[r[0], front[:, 0]])
    heights = front[:, 1] - r[1]
    return float(np.sum(widths * heights))


def hypervolume_oracle(points, r, grid_resolution: int = 1000) -> float:
    """Cell-counting estimate of the dominated area, for testing.

    The bounding box ``[r, max(points)]`` is split into ``grid_resolution``
    cells per axis and a cell counts if its center is dominated. Only cells
    crossed by the staircase boundary can be misclassified, so the absolute
    error is at most ``2 * W * H / grid_resolution`` for a box of size ``W x H``.
    """
    r = np.asarray(r, dtype=float)
    front = _front_above(points, r)
    if front.shape[0] == 0:
        return 0.0
    upper = front.max(axis=0)
    if np.any(upper <= r):
        return 0.0
    w, h = upper - r
    c1 = r[0] + (np.arange(grid_resolution) + 0.5) * w / grid_resolution
    c2 = r[1] + (np.arange(grid_resolution) + 0.5) * h / grid_resolution
    heights = staircase_height(front, c1)
    count = np.sum(c2[None, :] <= heights[:, None])
    return float(count * (w / grid_resolution) * (h / grid_resolution))


def hypervolume_error_bound(points, r, grid_resolution: int) -> float:
    r = np.asarray(r, dtype=float)
    front = _front_above(points, r)
    if front.shape[0] == 0:
        return 0.0
    w, h = front.max(axis=0) - r
    return float(2.0 * w * h / grid_resolution)


def staircase_height(front, z1) -> np.ndarray:
    """Largest second objective among front points whose first objective is ``>= z1``.

    ``-inf`` where no front point reaches ``z1``. ``front`` must be sorted as
    returned by :func:`pareto_filter`.
    """
    front = _as_points(front)
    z1 = np.asarray(z1, dtype=float)
    if front.shape[0] == 0:
        return np.full(z1.shape, -np.inf)
    idx = np.searchsorted(front[:, 0], z1, side="left")
    padded = np.r_[front[:, 1], -np.inf]
    return padded[idx]


def staircase_boundary(front, r, u) -> np.ndarray:
    """Vertices of the top-right boundary of the attained set, clipped to ``[r, u]``.

    The polyline starts on the left edge ``y1 = r1`` and ends on the bottom edge
    ``y2 = r2``; the two unbounded axis-parallel rays are not included.
    An empty front yields an empty ``(0, 2)`` array.
    """
    r = np.asarray(r, dtype=float)
    u = np.asarray(u, dtype=float)
    front = _front_above(front, r)
    if front.shape[0] == 0:
        return np.zeros((0, 2))
    verts = [(r[0], front[0, 1])]
    for k in range(front.shape[0]):
        verts.append((front[k, 0], front[k, 1]))
        nxt = front[k + 1, 1] if k + 1 < front.shape[0] else r[1]
        verts.append((front[k, 0], nxt))
    return np.clip(np.array(verts), r, u)


def polyline_area(vertices, r) -> float:
    """Area enclosed between a staircase polyline and the reference corner."""
    v = np.asarray(vertices, dtype=float)
    if v.shape[0] == 0:
        return 0.0
    r = np.asarray(r, dtype=float)
    closed = np.vstack([r, v, r])
    x, y = closed[:, 0], closed[:, 1]
    return float(abs(np.dot(x[:-1], y[1:]) - np.dot(x[1:], y[:-1])) / 2.0)
