"""Small exact 2D geometry kernel: segment/quad clipping, containment, box index."""

from collections import defaultdict

import numpy as np

LENGTH_TOL = 1e-12


def segment_quad_clip(a, b, quad, length_tol=LENGTH_TOL):
    """Clip segment ``a -> b`` against a convex counterclockwise quadrilateral.

    Returns ``(t0, t1)`` with ``0 <= t0 < t1 <= 1`` such that
    ``a + t (b - a)`` lies inside the quad for ``t`` in ``[t0, t1]``, or
    ``None`` when the inside portion is shorter than ``length_tol``.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    quad = np.asarray(quad, dtype=float).reshape(-1, 2)
    d = b - a
    length = float(np.hypot(*d))
    if length == 0.0:
        raise ValueError("degenerate segment: zero length")
    scale = max(np.ptp(quad[:, 0]), np.ptp(quad[:, 1]), length)
    eps = 1e-12 * scale
    t0, t1 = 0.0, 1.0
    for i in range(len(quad)):
        v = quad[i]
        edge = quad[(i + 1) % len(quad)] - v
        elen = float(np.hypot(*edge))
        inward = np.array([-edge[1], edge[0]]) / elen
        num = float(inward @ (a - v))
        den = float(inward @ d)
        if abs(den) <= 1e-12 * length:
            if num < -eps:
                return None
            continue
        t = -num / den
        if den > 0:
            t0 = max(t0, t)
        else:
            t1 = min(t1, t)
        if t1 <= t0:
            return None
    if (t1 - t0) * length < length_tol:
        return None
    return t0, t1


def clip_segment_points(a, b, quad, length_tol=LENGTH_TOL):
    """Like :func:`segment_quad_clip` but returns the clipped endpoints."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    res = segment_quad_clip(a, b, quad, length_tol)
    if res is None:
        return None
    t0, t1 = res
    return a + t0 * (b - a), a + t1 * (b - a)


def point_in_convex_polygon(x, polygon, tol=0.0):
    """True where points ``x`` (..., 2) lie inside a CCW convex polygon."""
    x = np.asarray(x, dtype=float)
    poly = np.asarray(polygon, dtype=float)
    inside = np.ones(x.shape[:-1], dtype=bool)
    for i in range(len(poly)):
        v, w = poly[i], poly[(i + 1) % len(poly)]
        e = w - v
        cross = e[0] * (x[..., 1] - v[1]) - e[1] * (x[..., 0] - v[0])
        inside &= cross >= -tol * np.hypot(*e)
    return inside


class BoxIndex:
    """Uniform bucket grid over axis-aligned bounding boxes.

    Boxes are inflated by ``inflate`` times their diagonal so points lying
    exactly on element boundaries are never missed.
    """

    def __init__(self, vertices, inflate=1e-9):
        vertices = np.asarray(vertices, dtype=float)
        lo = vertices.min(axis=1)
        hi = vertices.max(axis=1)
        pad = inflate * np.linalg.norm(hi - lo, axis=1)[:, None]
        self.lo = lo - pad
        self.hi = hi + pad
        self.origin = self.lo.min(axis=0)
        extent = self.hi.max(axis=0) - self.origin
        size = np.median(self.hi - self.lo, axis=0)
        self.cell = np.maximum(size, 1e-300)
        self.shape = np.maximum(np.ceil(extent / self.cell).astype(int), 1)
        self.buckets = defaultdict(list)
        i0 = self._cell_of(self.lo)
        i1 = self._cell_of(self.hi)
        for e in range(len(vertices)):
            for ix in range(i0[e, 0], i1[e, 0] + 1):
                for iy in range(i0[e, 1], i1[e, 1] + 1):
                    self.buckets[ix, iy].append(e)

    def _cell_of(self, x):
        idx = np.floor((np.asarray(x) - self.origin) / self.cell).astype(int)
        return np.clip(idx, 0, self.shape - 1)

    def candidates(self, x):
        """Elements whose inflated box contains point ``x``."""
        x = np.asarray(x, dtype=float)
        ix, iy = self._cell_of(x)
        cand = np.array(self.buckets.get((ix, iy), []), dtype=int)
        if len(cand) == 0:
            return cand
        inside = np.all((self.lo[cand] <= x) & (x <= self.hi[cand]), axis=1)
        return cand[inside]

    def segment_candidates(self, a, b):
        """Elements whose inflated box overlaps the bounding box of a segment."""
        lo = np.minimum(a, b)
        hi = np.maximum(a, b)
        i0 = self._cell_of(lo)
        i1 = self._cell_of(hi)
        cand = set()
        for ix in range(i0[0], i1[0] + 1):
            for iy in range(i0[1], i1[1] + 1):
                cand.update(self.buckets.get((ix, iy), ()))
        cand = np.array(sorted(cand), dtype=int)
        if len(cand) == 0:
            return cand
        overlap = np.all((self.lo[cand] <= hi) & (lo <= self.hi[cand]), axis=1)
        return cand[overlap]
