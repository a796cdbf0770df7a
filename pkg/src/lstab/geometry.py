"""Containment order on refinement magnitudes, skylines and box volumes.

Magnitude vectors live in the non-negative orthant; ``a`` is contained in
``b`` when ``|a_i| <= |b_i|`` for every component.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, DomainError

try:
    import numba
except ImportError:  # pragma: no cover - numpy fallback below
    numba = None

# broadcast comparisons are done in blocks of roughly this many elements
_BLOCK_ELEMS = 1 << 22


def contains_leq(a, b) -> bool:
    """True iff ``a`` is contained in ``b`` (componentwise ``|a| <= |b|``)."""
    a = np.abs(np.asarray(a, dtype=float))
    b = np.abs(np.asarray(b, dtype=float))
    if a.shape != b.shape:
        raise DimensionError(f"cannot compare vectors of shapes {a.shape} and {b.shape}")
    return bool(np.all(a <= b))


@dataclass(frozen=True)
class ReasonableChanges:
    """The box ``{eps : |eps_i| <= eps_max_i}``."""

    eps_max: np.ndarray

    def __post_init__(self):
        e = np.array(self.eps_max, dtype=float).ravel()
        if not np.all(np.isfinite(e)) or np.any(e < 0):
            raise DomainError(f"eps_max must be finite and non-negative, got {e}")
        e.setflags(write=False)
        object.__setattr__(self, "eps_max", e)

    @property
    def n(self) -> int:
        return self.eps_max.shape[0]

    def to_list(self) -> list[float]:
        return [float(x) for x in self.eps_max]

    def __eq__(self, other):
        return isinstance(other, ReasonableChanges) and np.array_equal(self.eps_max, other.eps_max)

    def __hash__(self):
        return hash(tuple(self.eps_max))


def box_volume(rc: ReasonableChanges) -> float:
    """Volume of the box, taken over dimensions with positive width only."""
    e = rc.eps_max if isinstance(rc, ReasonableChanges) else ReasonableChanges(rc).eps_max
    widths = e[e > 0]
    return float(np.prod(2.0 * widths))


def _as_points(points, n=None) -> np.ndarray:
    pts = np.abs(np.asarray(points, dtype=float))
    if pts.size == 0:
        return np.empty((0, n if n is not None else (pts.shape[-1] if pts.ndim == 2 else 0)))
    if pts.ndim == 1:
        pts = pts[None, :]
    if n is not None and pts.shape[1] != n:
        raise DimensionError(f"expected {n}-dimensional points, got {pts.shape[1]}")
    return pts


def _skyline_2d(pts: np.ndarray) -> np.ndarray:
    order = np.lexsort((pts[:, 1], pts[:, 0]))
    pts = pts[order]
    # keep a point iff its y is strictly below every y seen so far
    prev_min = np.minimum.accumulate(np.concatenate([[np.inf], pts[:-1, 1]]))
    return pts[pts[:, 1] < prev_min]


def _skyline_nd(pts: np.ndarray) -> np.ndarray:
    pts = np.unique(pts, axis=0)
    # a strict dominator always has a strictly smaller coordinate sum
    pts = pts[np.argsort(pts.sum(axis=1), kind="stable")]
    n = pts.shape[1]
    sky = np.empty((0, n))
    block = 1024
    for start in range(0, len(pts), block):
        cand = pts[start : start + block]
        if len(sky):
            cand = cand[~contained_any(sky, cand)]
        if len(cand) > 1:
            # pairwise within the block; unique points so <= everywhere means strict
            le = np.all(cand[:, None, :] <= cand[None, :, :], axis=2)
            np.fill_diagonal(le, False)
            cand = cand[~le.any(axis=0)]
        sky = np.vstack([sky, cand])
    return sky


def min_skyline(points) -> "Boundary":
    """Minimal elements of a point set under strict containment.

    Duplicates collapse to a single point; the result is an antichain.
    """
    pts = _as_points(points)
    if len(pts) == 0:
        return Boundary(pts)
    if pts.shape[1] == 2:
        sky = _skyline_2d(pts)
    elif pts.shape[1] == 1:
        sky = pts[[np.argmin(pts[:, 0])]]
    else:
        sky = _skyline_nd(pts)
    return Boundary(sky)


def contained_any(boundary_pts: np.ndarray, queries: np.ndarray) -> np.ndarray:
    """For each query row, whether some boundary row is ``<=`` it everywhere."""
    m, n = queries.shape
    out = np.zeros(m, dtype=bool)
    b = len(boundary_pts)
    if b == 0 or m == 0:
        return out
    if n == 2:
        # antichain sorted by x has strictly decreasing y: only the last
        # boundary point with x <= qx can be contained in q
        order = np.argsort(boundary_pts[:, 0], kind="stable")
        bx, by = boundary_pts[order, 0], boundary_pts[order, 1]
        if np.all(np.diff(by) < 0):
            idx = np.searchsorted(bx, queries[:, 0], side="right") - 1
            ok = idx >= 0
            out[ok] = by[idx[ok]] <= queries[ok, 1]
            return out
    if numba is not None:
        order = np.argsort(boundary_pts[:, 0], kind="stable")
        return _contained_any_sorted(np.ascontiguousarray(boundary_pts[order]), np.ascontiguousarray(queries))
    chunk = max(1, _BLOCK_ELEMS // (b * n))
    for s in range(0, m, chunk):
        q = queries[s : s + chunk]
        out[s : s + chunk] = np.any(np.all(boundary_pts[None, :, :] <= q[:, None, :], axis=2), axis=1)
    return out


def _contained_any_sorted_py(b, q):
    m, n = q.shape
    out = np.zeros(m, dtype=np.bool_)
    for i in range(m):
        # only boundary rows with a first coordinate <= q's can be contained in q
        hi = np.searchsorted(b[:, 0], q[i, 0], side="right")
        for j in range(hi):
            hit = True
            for c in range(1, n):
                if b[j, c] > q[i, c]:
                    hit = False
                    break
            if hit:
                out[i] = True
                break
    return out


_contained_any_sorted = (
    numba.njit(cache=True, nogil=True)(_contained_any_sorted_py) if numba is not None else _contained_any_sorted_py
)


@dataclass(frozen=True)
class Boundary:
    """Antichain of magnitude vectors (rows of ``points``)."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        if pts.size == 0:
            pts = pts.reshape(0, pts.shape[-1] if pts.ndim == 2 else 0)
        elif pts.ndim == 1:
            pts = pts[None, :]
        if np.any(pts < 0) or not np.all(np.isfinite(pts)):
            raise DomainError("boundary points must be finite magnitudes")
        # canonical row order so equal boundaries serialise identically
        if len(pts):
            pts = pts[np.lexsort(pts.T[::-1])]
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @classmethod
    def empty(cls, n: int) -> "Boundary":
        return cls(np.empty((0, n)))

    def __len__(self):
        return len(self.points)

    def __eq__(self, other):
        return isinstance(other, Boundary) and np.array_equal(self.points, other.points)

    def __hash__(self):
        return hash(self.points.tobytes())

    def is_antichain(self) -> bool:
        p = self.points
        if len(p) < 2:
            return True
        le = np.all(p[:, None, :] <= p[None, :, :], axis=2)
        np.fill_diagonal(le, False)
        return not le.any()

    def stable_mask(self, magnitudes) -> np.ndarray:
        """Vectorised ``in_stable_zone`` over rows of ``magnitudes``."""
        q = _as_points(magnitudes)
        if len(self.points) and q.shape[1] != self.points.shape[1]:
            raise DimensionError(
                f"boundary is {self.points.shape[1]}-dimensional, queries are {q.shape[1]}-dimensional"
            )
        return ~contained_any(self.points, q)

    def merged(self, *more) -> "Boundary":
        parts = [self.points] + [_as_points(m, self.points.shape[1]) for m in more if np.size(m)]
        return min_skyline(np.vstack(parts))

    def to_list(self) -> list[list[float]]:
        return self.points.tolist()

    def to_json(self) -> str:
        return json.dumps(self.to_list())

    @classmethod
    def from_json(cls, text: str) -> "Boundary":
        return cls(np.asarray(json.loads(text), dtype=float))


def in_stable_zone(m, sb: Boundary) -> bool:
    """True iff no boundary point is contained in ``m`` (boundary points are unstable)."""
    m = np.abs(np.asarray(m, dtype=float)).ravel()
    if len(sb.points) and sb.points.shape[1] != m.shape[0]:
        raise DimensionError(f"boundary is {sb.points.shape[1]}-dimensional, point is {m.shape[0]}-dimensional")
    return bool(sb.stable_mask(m[None, :])[0])
