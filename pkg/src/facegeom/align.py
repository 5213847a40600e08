"""Pose and scale normalization into a fixed 512x512 canonical frame.

Two aligners are provided. `align_outer_eyes` maps the outer eye corners onto
fixed canonical positions with a similarity transform (rotation + uniform
scale + translation, no shear) and feeds the symmetry score. `align_inner_eyes`
levels the inner eye corners and fits the landmark bounding box into the
canvas with a fixed margin; it feeds the nasal measurements.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateEyeDistance
from .records import LANDMARKS, LandmarkIndex, LandmarkSet

CANVAS = 512
EYE_L_TARGET = (156.0, 256.0)
EYE_R_TARGET = (356.0, 256.0)
INTEROCULAR_PX = 200.0
PAD_MARGIN = 16.0

_MIN_EYE_DISTANCE = 1e-6


@dataclass(frozen=True)
class AlignedFace:
    """Landmarks in the canonical pixel frame.

    midline_x is the horizontal midpoint of the eye pair the aligner used;
    interocular_px is the distance between those two landmarks after alignment.
    """

    points: np.ndarray
    canvas: int
    interocular_px: float
    midline_x: float

    def __post_init__(self) -> None:
        pts = np.ascontiguousarray(self.points, dtype=np.float64)
        pts.flags.writeable = False
        object.__setattr__(self, "points", pts)


def _as_points(face: LandmarkSet | np.ndarray) -> np.ndarray:
    pts = face.points if isinstance(face, LandmarkSet) else np.asarray(face, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError(f"expected an (n, 2) point array, got shape {pts.shape}")
    return pts


def align_outer_eyes(
    face: LandmarkSet | np.ndarray, index: LandmarkIndex = LANDMARKS
) -> AlignedFace:
    """Similarity-align so the outer eye corners land on the canonical targets."""
    pts = _as_points(face)
    z = pts[:, 0] + 1j * pts[:, 1]
    a = z[index.OUTER_EYE_L]
    b = z[index.OUTER_EYE_R]
    if abs(b - a) < _MIN_EYE_DISTANCE:
        raise DegenerateEyeDistance(
            f"outer eye corners are {abs(b - a):.3g} px apart; cannot derive alignment"
        )
    ta = complex(*EYE_L_TARGET)
    tb = complex(*EYE_R_TARGET)
    alpha = (tb - ta) / (b - a)
    beta = ta - alpha * a
    w = alpha * z + beta
    out = np.column_stack([w.real, w.imag])
    el = out[index.OUTER_EYE_L]
    er = out[index.OUTER_EYE_R]
    return AlignedFace(
        points=out,
        canvas=CANVAS,
        interocular_px=float(np.hypot(*(er - el))),
        midline_x=float((el[0] + er[0]) / 2.0),
    )


def align_inner_eyes(
    face: LandmarkSet | np.ndarray, index: LandmarkIndex = LANDMARKS
) -> AlignedFace:
    """Level the inner eye corners, then scale and pad the landmark box into the canvas."""
    pts = _as_points(face)
    el = pts[index.INNER_EYE_L]
    er = pts[index.INNER_EYE_R]
    if float(np.hypot(*(er - el))) < _MIN_EYE_DISTANCE:
        raise DegenerateEyeDistance(
            f"inner eye corners are {float(np.hypot(*(er - el))):.3g} px apart; cannot derive alignment"
        )
    theta = np.arctan2(er[1] - el[1], er[0] - el[0])
    c, s = np.cos(-theta), np.sin(-theta)
    rot = np.array([[c, -s], [s, c]])
    center = (pts.min(axis=0) + pts.max(axis=0)) / 2.0
    rotated = (pts - center) @ rot.T + center

    lo = rotated.min(axis=0)
    hi = rotated.max(axis=0)
    extent = float(max(hi[0] - lo[0], hi[1] - lo[1]))
    scale = (CANVAS - 2.0 * PAD_MARGIN) / extent
    box_center = (lo + hi) / 2.0
    out = (rotated - box_center) * scale + CANVAS / 2.0

    el2 = out[index.INNER_EYE_L]
    er2 = out[index.INNER_EYE_R]
    return AlignedFace(
        points=out,
        canvas=CANVAS,
        interocular_px=float(np.hypot(*(er2 - el2))),
        midline_x=float((el2[0] + er2[0]) / 2.0),
    )


def midline(aligned: AlignedFace) -> float:
    """Vertical midline: the horizontal midpoint of the alignment eye pair."""
    return aligned.midline_x


def serialize_aligned(aligned: AlignedFace, image_id: str, subject_id: str, role: str) -> dict:
    """Debug dump of an aligned face in the record JSON schema (pixel mode, 512x512)."""
    return {
        "schema_version": 1,
        "image_id": image_id,
        "subject_id": subject_id,
        "role": role,
        "width": aligned.canvas,
        "height": aligned.canvas,
        "coord_mode": "pixel",
        "landmarks": [[float(x), float(y)] for x, y in aligned.points],
        "apparent_age": None,
        "embedding": None,
    }
