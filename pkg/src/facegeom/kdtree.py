"""2D KD-tree with exact nearest-neighbor queries.

Backed by a compiled kernel when the extension built, with a pure-Python
fallback selected at import time. Set FACEGEOM_KDTREE_BACKEND=python (or
=compiled) to force a backend; `BACKEND` reports which one is active.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from . import _kdtree_py
from .errors import EmptyPointSet

_requested = os.environ.get("FACEGEOM_KDTREE_BACKEND", "")
if _requested == "python":
    _impl = _kdtree_py
elif _requested == "compiled":
    from . import _kdtree_c as _impl  # noqa: F401  (raises if the extension is absent)
else:
    try:
        from . import _kdtree_c as _impl
    except ImportError:
        _impl = _kdtree_py

BACKEND: str = _impl.BACKEND_NAME


@dataclass(frozen=True)
class NearestHit:
    point: tuple[float, float]
    payload: int
    distance: float


class KdTree2:
    """Balanced median-split KD-tree over 2D points with integer payloads.

    Nearest queries return the exact closest stored point; distance ties are
    broken deterministically toward the smallest payload.
    """

    def __init__(self, points: np.ndarray, payloads: np.ndarray | None = None) -> None:
        pts = np.asarray(points, dtype=np.float64)
        if pts.size == 0:
            raise EmptyPointSet("cannot build a KD-tree from zero points")
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise ValueError(f"expected an (n, 2) point array, got shape {pts.shape}")
        if not np.isfinite(pts).all():
            raise ValueError("KD-tree points must be finite")
        self._xs = np.ascontiguousarray(pts[:, 0])
        self._ys = np.ascontiguousarray(pts[:, 1])
        if payloads is None:
            payloads = np.arange(len(pts), dtype=np.int64)
        self._payloads = np.ascontiguousarray(payloads, dtype=np.int64)
        if len(self._payloads) != len(pts):
            raise ValueError("payloads must match points in length")
        self._tree = _impl.build(self._xs, self._ys, self._payloads)

    @property
    def size(self) -> int:
        return len(self._xs)

    def nearest(self, query: tuple[float, float]) -> NearestHit:
        qx, qy = float(query[0]), float(query[1])
        if not (np.isfinite(qx) and np.isfinite(qy)):
            raise ValueError("query point must be finite")
        pos, d2 = _impl.nearest(self._tree, qx, qy)
        return NearestHit(
            point=(float(self._xs[pos]), float(self._ys[pos])),
            payload=int(self._payloads[pos]),
            distance=float(np.sqrt(d2)),
        )

    def nearest_batch(self, queries: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Vector form: returns (payloads, distances) for each query row."""
        q = np.ascontiguousarray(np.asarray(queries, dtype=np.float64))
        if q.ndim != 2 or q.shape[1] != 2:
            raise ValueError(f"expected an (m, 2) query array, got shape {q.shape}")
        if not np.isfinite(q).all():
            raise ValueError("query points must be finite")
        positions, d2s = _impl.nearest_batch(
            self._tree, np.ascontiguousarray(q[:, 0]), np.ascontiguousarray(q[:, 1])
        )
        return self._payloads[positions], np.sqrt(d2s)

    def nearest_positions(self, queries: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Like nearest_batch but returns raw positions into the input arrays."""
        q = np.ascontiguousarray(np.asarray(queries, dtype=np.float64))
        return _impl.nearest_batch(
            self._tree, np.ascontiguousarray(q[:, 0]), np.ascontiguousarray(q[:, 1])
        )
