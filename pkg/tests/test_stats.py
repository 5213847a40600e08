import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from facegeom.biometric import ScoreSet
from facegeom.errors import (
    AllZeroDifferences,
    InconsistentCoverage,
    TooFewPairs,
    ZeroVariance,
)
from facegeom.nasal import ALL_FEATURES, FeatureImprovement, NasalImprovement
from facegeom.outcomes import OutcomeCategory
from facegeom.stats import aggregate, paired_t_test, wilcoxon_signed_rank
from facegeom.synth import SynthSpec, generate


def test_constant_shift_gives_smallest_exact_p():
    before = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0]
    after = [v + 10.0 for v in before]
    assert wilcoxon_signed_rank(before, after) == 0.03125  # 2 / 2**6


def test_all_zero_differences_raises():
    values = [1.0, 2.0, 3.0, 4.0, 5.0]
    with pytest.raises(AllZeroDifferences):
        wilcoxon_signed_rank(values, values)


def test_too_few_pairs_after_dropping_zeros():
    before = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0]
    after = [1.0, 2.0, 3.5, 4.5, 5.5, 6.5]  # only 4 nonzero diffs
    with pytest.raises(TooFewPairs):
        wilcoxon_signed_rank(before, after)


def test_balanced_antisymmetric_differences_give_p_one():
    before = [0.0] * 6
    after = [1.0, -1.0, 2.0, -2.0, 3.0, -3.0]
    assert wilcoxon_signed_rank(before, after) == 1.0


def test_exact_p_matches_enumeration_on_fixed_cases():
    rng = np.random.default_rng(0)
    for n in range(5, 13):
        for _ in range(12):
            before = rng.normal(size=n)
            after = before + rng.normal(size=n)
            if np.any(after == before):
                continue
            got = wilcoxon_signed_rank(before, after)
            want = oracles.wilcoxon_enum(before, after)
            assert got == pytest.approx(want, abs=1e-15)


def test_exact_p_matches_enumeration_with_ties():
    before = [0.0] * 8
    after = [1.0, 1.0, -1.0, 2.0, 2.0, 2.0, -3.0, 3.0]
    got = wilcoxon_signed_rank(before, after)
    want = oracles.wilcoxon_enum(before, after)
    assert got == pytest.approx(want, abs=1e-15)


@given(
    diffs=st.lists(
        st.integers(min_value=-9, max_value=9).filter(lambda v: v != 0),
        min_size=5,
        max_size=12,
    )
)
@settings(max_examples=120, deadline=None)
def test_exact_p_matches_enumeration_property(diffs):
    before = [0.0] * len(diffs)
    after = [float(d) for d in diffs]
    got = wilcoxon_signed_rank(before, after)
    want = oracles.wilcoxon_enum(before, after)
    assert got == pytest.approx(want, abs=1e-15)


def test_normal_approximation_close_to_exact_at_boundary():
    rng = np.random.default_rng(1)
    diffs = rng.normal(0.3, 1.0, size=26)  # n=26 switches to the approximation

    before = np.zeros(26)
    approx = wilcoxon_signed_rank(before, diffs)

    # exact reference computed with the same convolution the implementation
    # uses for n<=25, extended to 26 entries
    from facegeom import stats as stats_mod

    old = stats_mod.EXACT_WILCOXON_MAX_N
    stats_mod.EXACT_WILCOXON_MAX_N = 26
    try:
        exact = wilcoxon_signed_rank(before, diffs)
    finally:
        stats_mod.EXACT_WILCOXON_MAX_N = old
    assert approx == pytest.approx(exact, abs=0.02)


def test_paired_t_zero_variance():
    with pytest.raises(ZeroVariance):
        paired_t_test([1.0, 2.0, 3.0], [2.0, 3.0, 4.0])


def test_paired_t_too_few_pairs():
    with pytest.raises(TooFewPairs):
        paired_t_test([1.0], [2.0])


def test_paired_t_symmetric_differences_give_p_one():
    before = [0.0, 0.0, 0.0, 0.0]
    after = [1.0, -1.0, 2.0, -2.0]
    assert paired_t_test(before, after) == 1.0


def test_paired_t_matches_quadrature_oracle():
    cases = [
        ([1.0, 2.0, 3.0, 4.0, 5.0], [1.4, 2.1, 3.8, 4.2, 5.9]),
        ([10.0, 12.0, 9.0, 11.0], [9.1, 12.5, 8.2, 10.4]),
        ([0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0], [0.2, 0.4, 1.3, 1.4, 2.4, 2.5, 3.3]),
    ]
    for before, after in cases:
        got = paired_t_test(before, after)
        want = oracles.paired_t_p_quadrature(before, after)
        assert got == pytest.approx(want, abs=1e-6)


def _improvement(count: int, dist_step: float = 0.1) -> NasalImprovement:
    per = {}
    for k, feature in enumerate(ALL_FEATURES):
        improved = feature in ("aw_ic", "aw_fw", "nl_fh")[:count]
        before = 0.5 + 0.01 * k
        after = before - dist_step if improved else before + dist_step
        per[feature] = FeatureImprovement(improved=improved, dist_before=before, dist_after=after)
    return NasalImprovement(
        per_feature=per, significant_improved_count=count, improved_any=count >= 1
    )


def _toy_cohort(counts, surgeons=None):
    cohort, _ = generate(SynthSpec(seed=2, n_subjects=len(counts),
                                   n_surgeons=len(set(surgeons)) if surgeons else 1))
    if surgeons:
        pairs = tuple(
            p.__class__(subject_id=p.subject_id, surgeon_id=s, procedure_tags=p.procedure_tags,
                        pre=p.pre, post=p.post)
            for p, s in zip(cohort.pairs, surgeons)
        )
        cohort = cohort.__class__(pairs=pairs, name=cohort.name)
    nasal = {p.subject_id: _improvement(c) for p, c in zip(cohort.pairs, counts)}
    return cohort, nasal


def test_count_distribution_from_hand_assigned_flags():
    cohort, nasal = _toy_cohort([1, 1, 2, 3])
    report = aggregate(cohort, nasal)
    assert report.overall.count_distribution == {0: 0.0, 1: 0.5, 2: 0.25, 3: 0.25}
    assert report.overall.improved_any_rate == 1.0
    assert report.overall.non_improved_subjects == ()


def test_non_improved_subjects_listed():
    cohort, nasal = _toy_cohort([0, 2, 0, 1])
    report = aggregate(cohort, nasal)
    assert report.overall.count_distribution == {0: 0.5, 1: 0.25, 2: 0.25, 3: 0.0}
    assert report.overall.non_improved_subjects == ("subj0000", "subj0002")
    assert report.overall.improved_any_rate == 0.5


def test_single_surgeon_summary_equals_global():
    cohort, nasal = _toy_cohort([1, 2, 3, 0])
    report = aggregate(cohort, nasal)
    assert set(report.per_surgeon) == {"S1"}
    assert report.per_surgeon["S1"] == report.overall


def test_per_surgeon_counts_sum_to_global():
    rng = np.random.default_rng(3)
    counts = list(rng.integers(0, 4, size=24))
    surgeons = [f"S{1 + int(v)}" for v in rng.integers(0, 3, size=24)]
    cohort, nasal = _toy_cohort(counts, surgeons)
    report = aggregate(cohort, nasal)
    for bucket in range(4):
        total = sum(
            s.count_distribution[bucket] * s.n for s in report.per_surgeon.values()
        )
        assert total == pytest.approx(report.overall.count_distribution[bucket] * 24, abs=1e-9)
    assert sum(s.n for s in report.per_surgeon.values()) == 24


def test_improved_rate_equals_mean_of_flags():
    counts = [0, 1, 2, 3, 3, 1]
    cohort, nasal = _toy_cohort(counts)
    report = aggregate(cohort, nasal)
    by_name = {f.feature: f for f in report.overall.per_feature}
    ids = cohort.subject_ids()
    for feature in ALL_FEATURES:
        expected = np.mean([nasal[s].per_feature[feature].improved for s in ids])
        assert by_name[feature].improved_rate == expected


def test_outcome_distribution_sums_to_one():
    cohort, nasal = _toy_cohort([1, 2, 0, 3])
    cats = [OutcomeCategory.BOTH, OutcomeCategory.NEITHER,
            OutcomeCategory.ONLY_YOUNGER, OutcomeCategory.ONLY_SYMMETRIC]
    outcomes = {p.subject_id: c for p, c in zip(cohort.pairs, cats)}
    report = aggregate(cohort, nasal, outcomes=outcomes)
    dist = report.overall.outcome_distribution
    assert sum(dist.values()) == 1.0
    assert dist == {"Both": 0.25, "Neither": 0.25, "OnlyYounger": 0.25, "OnlySymmetric": 0.25}


def test_inconsistent_coverage_raises():
    cohort, nasal = _toy_cohort([1, 2, 0, 3])
    del nasal["subj0002"]
    with pytest.raises(InconsistentCoverage) as err:
        aggregate(cohort, nasal)
    assert "subj0002" in str(err.value)


def test_biometric_summary_included():
    cohort, nasal = _toy_cohort([1, 1, 1, 1])
    scores = ScoreSet(genuine=np.array([0.9, 0.95]), imposter=np.array([0.1, 0.2, 0.3]))
    report = aggregate(cohort, nasal, scores=scores, fmr_target=0.0)
    assert report.biometric.tmr == 1.0
    assert report.biometric.n_imposter == 3


def test_significance_flag_uses_alpha():
    rng = np.random.default_rng(4)
    cohort, _ = generate(SynthSpec(seed=6, n_subjects=40, n_surgeons=1))
    nasal = {}
    for pair in cohort.pairs:
        per = {}
        for feature in ALL_FEATURES:
            before = 0.5 + rng.uniform(0, 0.01)
            per[feature] = FeatureImprovement(improved=True, dist_before=before, dist_after=before - 0.2)
        nasal[pair.subject_id] = NasalImprovement(per_feature=per, significant_improved_count=3,
                                                  improved_any=True)
    strict = aggregate(cohort, nasal, alpha=1e-12)
    loose = aggregate(cohort, nasal, alpha=0.05)
    assert all(not f.significant for f in strict.overall.per_feature)
    assert all(f.significant for f in loose.overall.per_feature)
    assert all(f.wilcoxon_p is not None and f.wilcoxon_p < 1e-6 for f in loose.overall.per_feature)
