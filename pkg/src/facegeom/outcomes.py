"""Four-way outcome categorization from symmetry and apparent-age changes.

A dimension improves only on a strict decrease; zero deltas are not
improvements, so the four categories partition every finite input.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .errors import MissingAge
from .records import FaceRecord


class OutcomeCategory(Enum):
    BOTH = "Both"
    ONLY_SYMMETRIC = "OnlySymmetric"
    ONLY_YOUNGER = "OnlyYounger"
    NEITHER = "Neither"


@dataclass(frozen=True)
class AgeDelta:
    pre_age: float
    post_age: float

    @property
    def delta(self) -> float:
        return self.post_age - self.pre_age


def age_delta(pre: FaceRecord, post: FaceRecord) -> AgeDelta:
    """Apparent-age change for a pair; raises MissingAge if either side lacks one."""
    for rec in (pre, post):
        if rec.apparent_age is None:
            raise MissingAge(f"record {rec.image_id!r} has no apparent_age")
    return AgeDelta(pre_age=pre.apparent_age, post_age=post.apparent_age)


def categorize(delta_s: float, delta_age: float) -> OutcomeCategory:
    """Map (symmetry delta, age delta) to one of the four outcome categories."""
    if not (math.isfinite(delta_s) and math.isfinite(delta_age)):
        raise ValueError(f"deltas must be finite, got ({delta_s}, {delta_age})")
    sym_improved = delta_s < 0.0
    age_improved = delta_age < 0.0
    if sym_improved and age_improved:
        return OutcomeCategory.BOTH
    if sym_improved:
        return OutcomeCategory.ONLY_SYMMETRIC
    if age_improved:
        return OutcomeCategory.ONLY_YOUNGER
    return OutcomeCategory.NEITHER
