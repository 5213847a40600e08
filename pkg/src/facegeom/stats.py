"""Cohort-level aggregation and paired significance tests.

The Wilcoxon signed-rank test is implemented from scratch: its exact null
distribution (all sign assignments over the observed, possibly tied, ranks)
is needed for small cohorts, which library routines do not provide once ties
appear. The paired t-test p-value uses the standard t distribution tail.

Improvement rates are exact count fractions; distributions over categories are
computed in rational arithmetic before conversion to float, so they always sum
to one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np
from scipy.stats import t as t_dist

from .biometric import ScoreSet, TmrAtFmr, tmr_at_fmr
from .errors import (
    AllZeroDifferences,
    InconsistentCoverage,
    TooFewPairs,
    ZeroVariance,
)
from .nasal import ALL_FEATURES, RATIO_FEATURES, NasalImprovement
from .outcomes import OutcomeCategory
from .records import Cohort, SubjectPair

EXACT_WILCOXON_MAX_N = 25
_MIN_WILCOXON_N = 5


def _differences(before: Sequence[float], after: Sequence[float]) -> np.ndarray:
    b = np.asarray(before, dtype=np.float64)
    a = np.asarray(after, dtype=np.float64)
    if b.shape != a.shape or b.ndim != 1:
        raise ValueError(f"before/after must be equal-length 1-d sequences, got {b.shape} vs {a.shape}")
    if not (np.isfinite(a).all() and np.isfinite(b).all()):
        raise ValueError("before/after values must be finite")
    return a - b


def _midranks(values: np.ndarray) -> np.ndarray:
    """Average ranks (1-based) with ties sharing their group mean."""
    order = np.argsort(values, kind="stable")
    ranks = np.empty(len(values), dtype=np.float64)
    i = 0
    while i < len(values):
        j = i
        while j + 1 < len(values) and values[order[j + 1]] == values[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = (i + 1 + j + 1) / 2.0
        i = j + 1
    return ranks


def wilcoxon_signed_rank(before: Sequence[float], after: Sequence[float]) -> float:
    """Two-sided Wilcoxon signed-rank p-value for paired samples.

    Zero differences are dropped before ranking. Up to n=25 the p-value is
    exact over all 2^n sign assignments of the observed ranks (ties included);
    beyond that a normal approximation with tie and continuity corrections is
    used.
    """
    diffs = _differences(before, after)
    diffs = diffs[diffs != 0.0]
    if diffs.size == 0:
        raise AllZeroDifferences("every paired difference is zero")
    n = int(diffs.size)
    if n < _MIN_WILCOXON_N:
        raise TooFewPairs(f"need at least {_MIN_WILCOXON_N} nonzero differences, got {n}")

    ranks = _midranks(np.abs(diffs))
    ranks2 = np.rint(2.0 * ranks).astype(np.int64)  # midranks are exact halves
    w2 = int(ranks2[diffs > 0].sum())

    if n <= EXACT_WILCOXON_MAX_N:
        total = int(ranks2.sum())
        counts = [0] * (total + 1)
        counts[0] = 1
        for r in ranks2:
            r = int(r)
            for s in range(total, r - 1, -1):
                if counts[s - r]:
                    counts[s] += counts[s - r]
        denom = 1 << n
        p_low = Fraction(sum(counts[: w2 + 1]), denom)
        p_high = Fraction(sum(counts[w2:]), denom)
        return float(min(Fraction(1), 2 * min(p_low, p_high)))

    mu = n * (n + 1) / 4.0
    _, tie_counts = np.unique(np.abs(diffs), return_counts=True)
    tie_term = float(((tie_counts**3 - tie_counts) / 48.0).sum())
    sigma = math.sqrt(n * (n + 1) * (2 * n + 1) / 24.0 - tie_term)
    w = w2 / 2.0
    if w > mu:
        z = (w - mu - 0.5) / sigma
    elif w < mu:
        z = (w - mu + 0.5) / sigma
    else:
        z = 0.0
    return math.erfc(abs(z) / math.sqrt(2.0))


def paired_t_test(before: Sequence[float], after: Sequence[float]) -> float:
    """Two-sided paired t-test p-value."""
    diffs = _differences(before, after)
    n = int(diffs.size)
    if n < 2:
        raise TooFewPairs(f"need at least 2 pairs, got {n}")
    sd = float(np.std(diffs, ddof=1))
    if sd == 0.0:
        raise ZeroVariance("paired differences have zero variance")
    t_stat = float(np.mean(diffs)) / (sd / math.sqrt(n))
    return min(1.0, 2.0 * float(t_dist.sf(abs(t_stat), n - 1)))


@dataclass(frozen=True)
class FeatureGroupResult:
    feature: str
    n: int
    n_zero_dropped: int
    improved_rate: float
    wilcoxon_p: float | None
    t_test_p: float | None
    significant: bool

    def to_dict(self) -> dict:
        return {
            "feature": self.feature,
            "n": self.n,
            "n_zero_dropped": self.n_zero_dropped,
            "improved_rate": self.improved_rate,
            "wilcoxon_p": self.wilcoxon_p,
            "t_test_p": self.t_test_p,
            "significant": self.significant,
        }


@dataclass(frozen=True)
class GroupSummary:
    """Improvement and outcome accounting for one set of subjects."""

    n: int
    per_feature: tuple[FeatureGroupResult, ...] | None
    count_distribution: dict[int, float] | None
    outcome_distribution: dict[str, float] | None
    improved_any_rate: float | None
    non_improved_subjects: tuple[str, ...] | None

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "per_feature": None
            if self.per_feature is None
            else [f.to_dict() for f in self.per_feature],
            "count_distribution": None
            if self.count_distribution is None
            else {str(k): v for k, v in self.count_distribution.items()},
            "outcome_distribution": self.outcome_distribution,
            "improved_any_rate": self.improved_any_rate,
            "non_improved_subjects": None
            if self.non_improved_subjects is None
            else list(self.non_improved_subjects),
        }


@dataclass(frozen=True)
class CohortReport:
    name: str
    alpha: float
    overall: GroupSummary
    per_surgeon: dict[str, GroupSummary]
    biometric: TmrAtFmr | None

    def to_dict(self) -> dict:
        out = {
            "name": self.name,
            "alpha": self.alpha,
            "biometric": None if self.biometric is None else self.biometric.summary(),
            "per_surgeon": {k: v.to_dict() for k, v in sorted(self.per_surgeon.items())},
        }
        out.update(self.overall.to_dict())
        return out


def _fraction_map(counts: Mapping, total: int) -> dict:
    fracs = {key: Fraction(count, total) for key, count in counts.items()}
    assert sum(fracs.values()) == 1
    return {key: float(v) for key, v in fracs.items()}


def _summarize(
    pairs: Sequence[SubjectPair],
    nasal: Mapping[str, NasalImprovement] | None,
    outcomes: Mapping[str, OutcomeCategory] | None,
    alpha: float,
) -> GroupSummary:
    n = len(pairs)
    ids = [p.subject_id for p in pairs]

    per_feature = None
    count_distribution = None
    improved_any_rate = None
    non_improved = None
    if nasal is not None:
        per_feature = []
        for feature in ALL_FEATURES:
            dist_before = [nasal[s].per_feature[feature].dist_before for s in ids]
            dist_after = [nasal[s].per_feature[feature].dist_after for s in ids]
            n_zero = sum(1 for b, a in zip(dist_before, dist_after) if a == b)
            try:
                wp = wilcoxon_signed_rank(dist_before, dist_after)
            except (TooFewPairs, AllZeroDifferences):
                wp = None
            try:
                tp = paired_t_test(dist_before, dist_after)
            except (TooFewPairs, ZeroVariance):
                tp = None
            improved = sum(nasal[s].per_feature[feature].improved for s in ids)
            per_feature.append(
                FeatureGroupResult(
                    feature=feature,
                    n=n,
                    n_zero_dropped=n_zero,
                    improved_rate=float(Fraction(improved, n)),
                    wilcoxon_p=wp,
                    t_test_p=tp,
                    significant=wp is not None and wp < alpha,
                )
            )
        per_feature = tuple(per_feature)

        count_counts = {k: 0 for k in range(len(RATIO_FEATURES) + 1)}
        for s in ids:
            count_counts[nasal[s].significant_improved_count] += 1
        count_distribution = _fraction_map(count_counts, n)
        improved_any_rate = float(Fraction(sum(nasal[s].improved_any for s in ids), n))
        non_improved = tuple(s for s in ids if nasal[s].significant_improved_count == 0)

    outcome_distribution = None
    if outcomes is not None:
        cat_counts = {cat.value: 0 for cat in OutcomeCategory}
        for s in ids:
            cat_counts[outcomes[s].value] += 1
        outcome_distribution = _fraction_map(cat_counts, n)

    return GroupSummary(
        n=n,
        per_feature=per_feature,
        count_distribution=count_distribution,
        outcome_distribution=outcome_distribution,
        improved_any_rate=improved_any_rate,
        non_improved_subjects=non_improved,
    )


def aggregate(
    cohort: Cohort,
    nasal: Mapping[str, NasalImprovement] | None,
    outcomes: Mapping[str, OutcomeCategory] | None = None,
    scores: ScoreSet | None = None,
    alpha: float = 0.001,
    fmr_target: float = 1e-4,
) -> CohortReport:
    """Assemble the full cohort report.

    Each supplied result map must cover every subject in the cohort; sections
    whose map is None are omitted from the report.
    """
    ids = cohort.subject_ids()
    for coverage_name, mapping in (("nasal", nasal), ("outcome", outcomes)):
        if mapping is None:
            continue
        missing = [s for s in ids if s not in mapping]
        if missing:
            raise InconsistentCoverage(
                f"{coverage_name} results missing for subjects: {', '.join(missing[:5])}"
            )

    overall = _summarize(cohort.pairs, nasal, outcomes, alpha)
    grouped: dict[str, list[SubjectPair]] = {}
    for pair in cohort.pairs:
        grouped.setdefault(pair.surgeon_id, []).append(pair)
    summaries = {
        surgeon: _summarize(members, nasal, outcomes, alpha)
        for surgeon, members in grouped.items()
    }

    biometric = tmr_at_fmr(scores, fmr_target) if scores is not None else None
    return CohortReport(
        name=cohort.name,
        alpha=alpha,
        overall=overall,
        per_surgeon=summaries,
        biometric=biometric,
    )
