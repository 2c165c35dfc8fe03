"""Directed and symmetric Hausdorff distances between finite planar sets, and
greedy maximal separated subsets."""

from __future__ import annotations

import numpy as np
from scipy.spatial import cKDTree

from .geometry import TruncatedSet

# above this many distance pairs the KD-tree path is used
BRUTE_FORCE_LIMIT = 10**7
_CHUNK = 2048


class MetricError(ValueError):
    pass


def as_points(A) -> np.ndarray:
    if isinstance(A, TruncatedSet):
        return A.points
    return np.asarray(A, dtype=float).reshape(-1, 2)


def _nearest_brute(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """For each b in B, min over a in A of |a - b|."""
    out = np.empty(len(B))
    for s in range(0, len(B), _CHUNK):
        blk = B[s:s + _CHUNK]
        d = np.hypot(blk[:, None, 0] - A[None, :, 0], blk[:, None, 1] - A[None, :, 1])
        out[s:s + _CHUNK] = d.min(axis=1)
    return out


def _nearest_tree(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    d, _ = cKDTree(A).query(B)
    return d


def nearest_distances(A, B, method: str = "auto") -> np.ndarray:
    A, B = as_points(A), as_points(B)
    if method == "auto":
        method = "brute" if len(A) * len(B) <= BRUTE_FORCE_LIMIT else "tree"
    if method == "brute":
        return _nearest_brute(A, B)
    if method == "tree":
        return _nearest_tree(A, B)
    raise MetricError(f"unknown method {method!r}")


def d0(A, B, method: str = "auto") -> float:
    """sup over b in B of dist(A, b): how far B strays from A.  Not symmetric."""
    A, B = as_points(A), as_points(B)
    if len(B) == 0:
        return 0.0
    if len(A) == 0:
        raise MetricError("distance to an empty set is undefined")
    return float(nearest_distances(A, B, method).max())


def hausdorff(A, B, method: str = "auto") -> float:
    A, B = as_points(A), as_points(B)
    if len(A) == 0 or len(B) == 0:
        raise MetricError("Hausdorff distance needs two non-empty sets")
    return max(d0(A, B, method), d0(B, A, method))


def separated_subset(A, s: float) -> np.ndarray:
    """Greedy maximal s-separated subset, scanning A in input order.

    A point is kept when its distance to every kept point is >= s, so kept points
    are pairwise >= s apart and every discarded point lies within < s of one.
    """
    if not s > 0:
        raise MetricError("separation must be positive")
    P = as_points(A)
    if len(P) == 0:
        return P.copy()
    # bucket kept points on a grid of cell size s; only 3x3 neighbouring cells matter
    cells: dict[tuple[int, int], list[int]] = {}
    kept: list[int] = []
    keys = np.floor(P / s).astype(np.int64)
    for idx in range(len(P)):
        cx, cy = int(keys[idx, 0]), int(keys[idx, 1])
        px, py = P[idx]
        ok = True
        for dx in (-1, 0, 1):
            for dy in (-1, 0, 1):
                for j in cells.get((cx + dx, cy + dy), ()):
                    qx, qy = P[j]
                    if (px - qx) ** 2 + (py - qy) ** 2 < s * s:
                        ok = False
                        break
                if not ok:
                    break
            if not ok:
                break
        if ok:
            kept.append(idx)
            cells.setdefault((cx, cy), []).append(idx)
    return P[kept]
