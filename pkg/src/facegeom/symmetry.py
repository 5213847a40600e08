"""Reflection-matching bilateral symmetry score over aligned landmarks.

Left-side landmarks are reflected across the vertical midline, matched to
their nearest right-side neighbor, and the matched point is reflected back;
the score is the mean Euclidean distance of those round trips. Zero means
every left landmark has an exact mirrored twin on the right.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .align import AlignedFace
from .errors import EmptySide
from .kdtree import KdTree2


@dataclass(frozen=True)
class SymmetryResult:
    score: float
    n_left: int
    n_right: int
    per_landmark: tuple[tuple[int, int, float], ...]


@dataclass(frozen=True)
class SymmetryDelta:
    delta: float
    improved: bool


def symmetry_score(aligned: AlignedFace) -> SymmetryResult:
    """Mean distance between left landmarks and their reflected right matches.

    Landmarks exactly on the midline belong to neither side. Matching is
    one-directional (left to right) and independent per landmark, so two left
    points may share a right match.
    """
    pts = aligned.points
    x = pts[:, 0]
    mid = aligned.midline_x

    left_idx = np.flatnonzero(x < mid)
    right_idx = np.flatnonzero(x > mid)
    if len(left_idx) == 0:
        raise EmptySide("no landmarks strictly left of the midline")
    if len(right_idx) == 0:
        raise EmptySide("no landmarks strictly right of the midline")

    tree = KdTree2(pts[right_idx], payloads=right_idx.astype(np.int64))
    reflected = np.column_stack([2.0 * mid - pts[left_idx, 0], pts[left_idx, 1]])
    matched, distances = tree.nearest_batch(reflected)

    per_landmark = tuple(
        (int(li), int(ri), float(d)) for li, ri, d in zip(left_idx, matched, distances)
    )
    return SymmetryResult(
        score=float(np.mean(distances)),
        n_left=int(len(left_idx)),
        n_right=int(len(right_idx)),
        per_landmark=per_landmark,
    )


def symmetry_delta(pre: SymmetryResult, post: SymmetryResult) -> SymmetryDelta:
    """Post-minus-pre score change; improvement requires a strict decrease."""
    delta = post.score - pre.score
    return SymmetryDelta(delta=delta, improved=delta < 0.0)
