"""
Incremental Bowyer–Watson Delaunay triangulation of planar point sets.
"""
from collections import OrderedDict
from logging import getLogger

import numpy as np
from scipy.spatial import ConvexHull

from .errors import InputError

__all__ = ['bowyer_watson', 'delaunay_edges']

_SUPER_SCALE = 100.


def _circumcircle(pa, pb, pc):
    ax, ay = pa
    bx, by = pb
    cx, cy = pc
    d = 2. * (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by))
    if d == 0.:
        return (np.inf, np.inf), np.inf
    a2 = ax * ax + ay * ay
    b2 = bx * bx + by * by
    c2 = cx * cx + cy * cy
    ux = (a2 * (by - cy) + b2 * (cy - ay) + c2 * (ay - by)) / d
    uy = (a2 * (cx - bx) + b2 * (ax - cx) + c2 * (bx - ax)) / d
    return (ux, uy), (ax - ux) ** 2 + (ay - uy) ** 2


class _TriangleStore(object):
    """Growable arrays of triangles with cached circumcircles."""

    def __init__(self, capacity):
        self.vertices = np.zeros((capacity, 3), dtype=np.int64)
        self.centers = np.zeros((capacity, 2), dtype=np.float64)
        self.radii2 = np.zeros(capacity, dtype=np.float64)
        self.alive = np.zeros(capacity, dtype=bool)
        self.size = 0

    def add(self, a, b, c, coords):
        if self.size == len(self.alive):
            self._grow()
        center, r2 = _circumcircle(coords[a], coords[b], coords[c])
        k = self.size
        self.vertices[k] = (a, b, c)
        self.centers[k] = center
        self.radii2[k] = r2
        self.alive[k] = True
        self.size += 1

    def _grow(self):
        cap = 2 * len(self.alive)
        self.vertices = np.resize(self.vertices, (cap, 3))
        self.centers = np.resize(self.centers, (cap, 2))
        self.radii2 = np.resize(self.radii2, cap)
        alive = np.zeros(cap, dtype=bool)
        alive[:self.size] = self.alive[:self.size]
        self.alive = alive

    def compact(self):
        keep = np.nonzero(self.alive[:self.size])[0]
        m = len(keep)
        self.vertices[:m] = self.vertices[keep]
        self.centers[:m] = self.centers[keep]
        self.radii2[:m] = self.radii2[keep]
        self.alive[:m] = True
        self.alive[m:] = False
        self.size = m

    def containing(self, p):
        """Indices of live triangles whose circumcircle strictly holds `p`."""
        s = self.size
        d2 = np.sum((self.centers[:s] - p) ** 2, axis=1)
        inside = self.alive[:s] & (d2 < self.radii2[:s] * (1. - 1e-12))
        return np.nonzero(inside)[0]


def bowyer_watson(points):
    """
    Triangulate `points` with the incremental Bowyer–Watson algorithm.

    Points are inserted in the given order into a super-triangle, so the
    result is a deterministic function of the input.

    Args:
        points (np.ndarray): Array of shape ``(n, 2)``, ``n >= 3``.

    Returns:
        np.ndarray: Array of shape ``(m, 3)`` with point indices of the
            triangles.
    """
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 3:
        raise InputError('Expected at least three 2D points: got shape {!r}'.
                         format(pts.shape))
    n = pts.shape[0]
    lo, hi = pts.min(axis=0), pts.max(axis=0)
    cx, cy = (lo + hi) / 2.
    span = max(float(np.max(hi - lo)), 1e-12) * _SUPER_SCALE
    coords = np.vstack([pts, [[cx - 2. * span, cy - span],
                              [cx, cy + 2. * span],
                              [cx + 2. * span, cy - span]]])

    store = _TriangleStore(max(16, 4 * n))
    store.add(n, n + 1, n + 2, coords)

    for k in range(n):
        p = coords[k]
        bad = store.containing(p)
        edge_count = OrderedDict()
        for t in bad:
            a, b, c = store.vertices[t]
            for e in ((a, b), (b, c), (c, a)):
                key = (min(e), max(e))
                if key in edge_count:
                    edge_count[key][1] += 1
                else:
                    edge_count[key] = [e, 1]
        store.alive[bad] = False
        for e, count in edge_count.values():
            if count == 1:
                store.add(e[0], e[1], k, coords)
        if store.size > 4 * (store.alive[:store.size].sum() + 1):
            store.compact()

    store.compact()
    tris = store.vertices[:store.size]
    tris = tris[np.all(tris < n, axis=1)]
    getLogger(__name__).debug('Triangulated %d points into %d triangles',
                              n, len(tris))
    return tris.copy()


def delaunay_edges(points):
    """
    Undirected edges of the Delaunay triangulation of `points`.

    Convex hull edges are always added, since triangles touching the
    super-triangle are discarded by the incremental algorithm.

    Args:
        points (np.ndarray): Array of shape ``(n, 2)``.

    Returns:
        np.ndarray: Array of shape ``(e, 2)`` with ``i < j``, sorted
            lexicographically.
    """
    pts = np.asarray(points, dtype=np.float64)
    tris = bowyer_watson(pts)
    edges = np.vstack([tris[:, [0, 1]], tris[:, [1, 2]], tris[:, [2, 0]],
                       ConvexHull(pts).simplices.astype(np.int64)])
    edges = np.sort(edges, axis=1)
    return np.unique(edges, axis=0)
