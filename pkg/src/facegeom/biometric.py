"""Identity-preservation evaluation: cosine scoring, ROC, and TMR at a target FMR.

Genuine scores compare each subject's pre and post embeddings; imposter scores
compare records across subjects. Thresholding is conservative: the operating
threshold is the smallest observed score whose false-match fraction does not
exceed the target.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatch,
    EmptyGenuineSet,
    EmptyImposterSet,
    MissingEmbedding,
    ZeroNorm,
)
from .records import Cohort

IMPOSTER_MODES = ("pre-post", "all")


@dataclass(frozen=True, eq=False)
class ScoreSet:
    genuine: np.ndarray
    imposter: np.ndarray

    def __post_init__(self) -> None:
        for name in ("genuine", "imposter"):
            arr = np.ascontiguousarray(getattr(self, name), dtype=np.float64)
            if arr.ndim != 1:
                raise ValueError(f"{name} scores must be a 1-d array")
            if arr.size and (not np.isfinite(arr).all() or (np.abs(arr) > 1).any()):
                raise ValueError(f"{name} scores must be finite and within [-1, 1]")
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)


@dataclass(frozen=True)
class RocCurve:
    """Operating points swept over every observed score, highest threshold first."""

    thresholds: np.ndarray
    fmr: np.ndarray
    tmr: np.ndarray

    def rows(self) -> list[tuple[float, float, float]]:
        return [
            (float(t), float(f), float(m))
            for t, f, m in zip(self.thresholds, self.fmr, self.tmr)
        ]


@dataclass(frozen=True)
class TmrAtFmr:
    tmr: float
    threshold: float
    fmr_target: float
    achieved_fmr: float
    n_genuine: int
    n_imposter: int
    degenerate_fmr: bool

    def summary(self) -> dict:
        return {
            "tmr": self.tmr,
            "fmr_target": self.fmr_target,
            "threshold": None if math.isinf(self.threshold) else self.threshold,
            "n_genuine": self.n_genuine,
            "n_imposter": self.n_imposter,
            "degenerate_fmr": self.degenerate_fmr,
        }


def cosine_similarity(a: np.ndarray, b: np.ndarray) -> float:
    """Cosine of the angle between two embeddings, clamped to [-1, 1].

    The denominator is sqrt((a.a)(b.b)), which makes cos(a, a) exactly 1.0."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise DimensionMismatch(f"embedding shapes differ: {a.shape} vs {b.shape}")
    na2 = float(np.dot(a, a))
    nb2 = float(np.dot(b, b))
    if na2 == 0.0 or nb2 == 0.0:
        raise ZeroNorm("cosine similarity undefined for a zero-norm embedding")
    return float(np.clip(np.dot(a, b) / math.sqrt(na2 * nb2), -1.0, 1.0))


def build_scores(cohort: Cohort, imposter_mode: str = "pre-post") -> ScoreSet:
    """Genuine scores pair each subject with itself; imposters cross subjects.

    "pre-post" compares pre_i against post_j for every ordered i != j,
    mirroring the structure of the genuine protocol. "all" additionally
    includes pre-pre and post-post cross-subject pairs (unordered).
    """
    if imposter_mode not in IMPOSTER_MODES:
        raise ValueError(f"imposter_mode must be one of {IMPOSTER_MODES}")
    for pair in cohort.pairs:
        for rec in (pair.pre, pair.post):
            if rec.embedding is None:
                raise MissingEmbedding(
                    f"subject {pair.subject_id}: record {rec.image_id!r} has no embedding"
                )
    pres = [p.pre.embedding for p in cohort.pairs]
    posts = [p.post.embedding for p in cohort.pairs]
    n = len(cohort.pairs)

    genuine = [cosine_similarity(pres[i], posts[i]) for i in range(n)]
    imposter: list[float] = []
    if imposter_mode == "pre-post":
        for i in range(n):
            for j in range(n):
                if i != j:
                    imposter.append(cosine_similarity(pres[i], posts[j]))
    else:
        for i in range(n):
            for j in range(i + 1, n):
                imposter.append(cosine_similarity(pres[i], pres[j]))
                imposter.append(cosine_similarity(pres[i], posts[j]))
                imposter.append(cosine_similarity(posts[i], pres[j]))
                imposter.append(cosine_similarity(posts[i], posts[j]))
    return ScoreSet(genuine=np.array(genuine), imposter=np.array(imposter))


def _require_nonempty(scores: ScoreSet) -> None:
    if scores.imposter.size == 0:
        raise EmptyImposterSet("no imposter scores")
    if scores.genuine.size == 0:
        raise EmptyGenuineSet("no genuine scores")


def tmr_at_fmr(scores: ScoreSet, target_fmr: float) -> TmrAtFmr:
    """True-match rate at the smallest threshold whose FMR stays within target.

    The threshold is chosen from the observed scores; when even the highest
    score admits too many imposters the operating point degenerates to an
    infinite threshold with TMR 0.
    """
    if not 0.0 <= target_fmr < 1.0:
        raise ValueError(f"target_fmr must be in [0, 1), got {target_fmr}")
    _require_nonempty(scores)
    genuine_sorted = np.sort(scores.genuine)
    imposter_sorted = np.sort(scores.imposter)
    m = imposter_sorted.size
    g = genuine_sorted.size

    threshold = math.inf
    for t in np.unique(np.concatenate([scores.genuine, scores.imposter])):
        n_imp_accepted = m - int(np.searchsorted(imposter_sorted, t, side="left"))
        if n_imp_accepted / m <= target_fmr:
            threshold = float(t)
            break

    if math.isinf(threshold):
        tmr = 0.0
        achieved = 0.0
    else:
        tmr = (g - int(np.searchsorted(genuine_sorted, threshold, side="left"))) / g
        achieved = (m - int(np.searchsorted(imposter_sorted, threshold, side="left"))) / m
    return TmrAtFmr(
        tmr=tmr,
        threshold=threshold,
        fmr_target=target_fmr,
        achieved_fmr=achieved,
        n_genuine=g,
        n_imposter=m,
        degenerate_fmr=m * target_fmr < 1.0,
    )


def roc(scores: ScoreSet) -> RocCurve:
    """Full sweep over every observed score plus an infinite sentinel."""
    _require_nonempty(scores)
    genuine_sorted = np.sort(scores.genuine)
    imposter_sorted = np.sort(scores.imposter)
    g = genuine_sorted.size
    m = imposter_sorted.size

    sweep = np.concatenate([[math.inf], np.unique(np.concatenate([scores.genuine, scores.imposter]))[::-1]])
    fmr = np.empty(sweep.size)
    tmr = np.empty(sweep.size)
    for k, t in enumerate(sweep):
        fmr[k] = (m - np.searchsorted(imposter_sorted, t, side="left")) / m
        tmr[k] = (g - np.searchsorted(genuine_sorted, t, side="left")) / g
    return RocCurve(thresholds=sweep, fmr=fmr, tmr=tmr)
