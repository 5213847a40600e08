"""Nasal morphometry: five frontal-view measurements and ideal-proximity improvement.

Measurements are taken on a face aligned via `align_inner_eyes`. The three
ratio features are scale-free; tip deviation and nostril asymmetry are in
canonical pixels. A feature "improves" between two measurements when it moves
strictly closer to its configured ideal value.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .align import AlignedFace
from .errors import DegenerateDenominator
from .records import LANDMARKS, LandmarkIndex

RATIO_FEATURES = ("aw_ic", "aw_fw", "nl_fh")
ALL_FEATURES = ("aw_ic", "aw_fw", "nl_fh", "tip_dev", "nostril_asym")

_MIN_DENOMINATOR = 1e-6


@dataclass(frozen=True)
class NasalFeatureVector:
    aw_ic: float
    aw_fw: float
    nl_fh: float
    tip_dev: float
    nostril_asym: float

    def get(self, feature: str) -> float:
        return getattr(self, feature)


@dataclass(frozen=True)
class IdealProfile:
    """Target values each feature is scored against."""

    aw_ic: float = 1.0
    aw_fw: float = 0.20
    nl_fh: float = 1.0 / 3.0
    tip_dev: float = 0.0
    nostril_asym: float = 0.0

    def get(self, feature: str) -> float:
        return getattr(self, feature)

    def with_nl_fh(self, value: float) -> "IdealProfile":
        return replace(self, nl_fh=value)


@dataclass(frozen=True)
class FeatureImprovement:
    improved: bool
    dist_before: float
    dist_after: float


@dataclass(frozen=True)
class NasalImprovement:
    per_feature: dict[str, FeatureImprovement]
    significant_improved_count: int
    improved_any: bool


def _dist(points: np.ndarray, i: int, j: int) -> float:
    return float(np.hypot(points[i, 0] - points[j, 0], points[i, 1] - points[j, 1]))


def nasal_features(
    aligned: AlignedFace,
    index: LandmarkIndex = LANDMARKS,
    nose_length_endpoints: tuple[int, int] | None = None,
) -> NasalFeatureVector:
    """Measure the five nasal features on an inner-eye-aligned face.

    nose_length_endpoints overrides the dorsum segment, which defaults to
    glabella-to-nose-tip.
    """
    pts = aligned.points
    top, bottom = nose_length_endpoints or (index.GLABELLA, index.NOSE_TIP)

    alar_width = _dist(pts, index.NOSTRIL_L, index.NOSTRIL_R)
    intercanthal = _dist(pts, index.INNER_EYE_L, index.INNER_EYE_R)
    face_width = _dist(pts, index.CHEEK_L, index.CHEEK_R)
    nose_length = _dist(pts, top, bottom)
    face_height = _dist(pts, index.FOREHEAD, index.CHIN)

    for name, value in (
        ("intercanthal distance", intercanthal),
        ("face width", face_width),
        ("face height", face_height),
    ):
        if value < _MIN_DENOMINATOR:
            raise DegenerateDenominator(f"{name} is {value:.3g} px; ratios undefined")

    return NasalFeatureVector(
        aw_ic=alar_width / intercanthal,
        aw_fw=alar_width / face_width,
        nl_fh=nose_length / face_height,
        tip_dev=abs(float(pts[index.NOSE_TIP, 0]) - aligned.midline_x),
        nostril_asym=abs(float(pts[index.NOSTRIL_L, 1]) - float(pts[index.NOSTRIL_R, 1])),
    )


def improvement(
    before: NasalFeatureVector,
    after: NasalFeatureVector,
    ideals: IdealProfile = IdealProfile(),
) -> NasalImprovement:
    """Per-feature ideal-proximity improvement flags.

    significant_improved_count counts only the three ratio features; a tie in
    distance-to-ideal is not an improvement.
    """
    per_feature: dict[str, FeatureImprovement] = {}
    for feature in ALL_FEATURES:
        ideal = ideals.get(feature)
        dist_before = abs(before.get(feature) - ideal)
        dist_after = abs(after.get(feature) - ideal)
        per_feature[feature] = FeatureImprovement(
            improved=dist_after < dist_before,
            dist_before=dist_before,
            dist_after=dist_after,
        )
    count = sum(per_feature[f].improved for f in RATIO_FEATURES)
    return NasalImprovement(
        per_feature=per_feature,
        significant_improved_count=count,
        improved_any=count >= 1,
    )
