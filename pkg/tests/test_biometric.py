import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from facegeom.biometric import (
    ScoreSet,
    build_scores,
    cosine_similarity,
    roc,
    tmr_at_fmr,
)
from facegeom.errors import (
    DimensionMismatch,
    EmptyImposterSet,
    MissingEmbedding,
    ZeroNorm,
)
from facegeom.synth import SynthSpec, generate


def scoreset(genuine, imposter):
    return ScoreSet(genuine=np.asarray(genuine, dtype=float), imposter=np.asarray(imposter, dtype=float))


def test_cosine_identity():
    v = np.array([0.3, -0.2, 0.9])
    assert cosine_similarity(v, v) == 1.0


def test_cosine_orthogonal():
    assert cosine_similarity(np.array([1.0, 0.0]), np.array([0.0, 1.0])) == 0.0


def test_cosine_hand_value():
    got = cosine_similarity(np.array([1.0, 0.0]), np.array([1.0, 1.0]))
    assert got == pytest.approx(1.0 / math.sqrt(2.0), abs=1e-15)


def test_cosine_errors():
    with pytest.raises(DimensionMismatch):
        cosine_similarity(np.array([1.0, 0.0]), np.array([1.0, 0.0, 0.0]))
    with pytest.raises(ZeroNorm):
        cosine_similarity(np.array([0.0, 0.0]), np.array([1.0, 0.0]))


_vectors = st.lists(
    st.floats(-5, 5, allow_nan=False), min_size=3, max_size=3
).filter(lambda v: math.hypot(*v) > 1e-3)


@given(a=_vectors, b=_vectors, scale=st.floats(0.01, 100.0))
@settings(max_examples=150, deadline=None)
def test_cosine_symmetry_and_scale_invariance(a, b, scale):
    a = np.array(a)
    b = np.array(b)
    assert cosine_similarity(a, b) == cosine_similarity(b, a)
    assert cosine_similarity(a * scale, b) == pytest.approx(cosine_similarity(a, b), abs=1e-12)


def _cohort(n, genuine_noise=0.05, seed=3):
    cohort, _ = generate(SynthSpec(seed=seed, n_subjects=n, genuine_noise=genuine_noise))
    return cohort


def test_build_scores_counts():
    scores = build_scores(_cohort(3))
    assert scores.genuine.size == 3
    assert scores.imposter.size == 6


def test_build_scores_all_mode_counts():
    scores = build_scores(_cohort(3), imposter_mode="all")
    assert scores.imposter.size == 12  # 4 cross pairs per subject pair


def test_single_subject_has_no_imposters():
    scores = build_scores(_cohort(1))
    assert scores.genuine.size == 1
    assert scores.imposter.size == 0
    with pytest.raises(EmptyImposterSet):
        roc(scores)
    with pytest.raises(EmptyImposterSet):
        tmr_at_fmr(scores, 0.0)


def test_identical_embeddings_score_one():
    cohort = _cohort(2, genuine_noise=0.0)
    fixed = cohort.pairs[0].pre.embedding
    pairs = []
    for pair in cohort.pairs:
        pre = pair.pre.__class__(
            image_id=pair.pre.image_id, landmarks=pair.pre.landmarks, role="pre",
            apparent_age=pair.pre.apparent_age, embedding=fixed,
        )
        post = pair.post.__class__(
            image_id=pair.post.image_id, landmarks=pair.post.landmarks, role="post",
            apparent_age=pair.post.apparent_age, embedding=fixed,
        )
        pairs.append(pair.__class__(subject_id=pair.subject_id, surgeon_id=pair.surgeon_id,
                                    procedure_tags=pair.procedure_tags, pre=pre, post=post))
    scores = build_scores(cohort.__class__(pairs=tuple(pairs), name="same"))
    assert np.all(scores.genuine == 1.0)
    assert np.all(scores.imposter == 1.0)


def test_missing_embedding_names_subject():
    cohort, _ = generate(SynthSpec(seed=5, n_subjects=2))
    pair = cohort.pairs[0]
    stripped = pair.pre.__class__(
        image_id=pair.pre.image_id, landmarks=pair.pre.landmarks, role="pre",
        apparent_age=pair.pre.apparent_age, embedding=None,
    )
    broken = cohort.__class__(
        pairs=(pair.__class__(subject_id=pair.subject_id, surgeon_id=pair.surgeon_id,
                              procedure_tags=pair.procedure_tags, pre=stripped, post=pair.post),
               cohort.pairs[1]),
        name="broken",
    )
    with pytest.raises(MissingEmbedding) as err:
        build_scores(broken)
    assert pair.subject_id in str(err.value)


def test_tmr_at_fmr_separated_example():
    scores = scoreset([0.9, 0.8, 0.85], [0.1, 0.2, 0.3])
    result = tmr_at_fmr(scores, 0.0)
    assert result.threshold == 0.8  # smallest observed score satisfying the rule
    assert result.tmr == 1.0
    assert result.achieved_fmr == 0.0
    othr, otmr = oracles.brute_tmr_at_fmr(scores.genuine, scores.imposter, 0.0)
    assert result.threshold == othr and result.tmr == otmr


def test_tmr_zero_when_reversed():
    scores = scoreset([0.1, 0.2], [0.5, 0.6, 0.7])
    result = tmr_at_fmr(scores, 0.0)
    assert result.tmr == 0.0
    assert math.isinf(result.threshold)
    assert result.summary()["threshold"] is None


def test_identical_multisets_against_oracle():
    values = [0.11, 0.25, 0.25, 0.4, 0.62, 0.8]
    scores = scoreset(values, values)
    result = tmr_at_fmr(scores, 0.5)
    othr, otmr = oracles.brute_tmr_at_fmr(values, values, 0.5)
    assert result.threshold == othr
    assert result.tmr == otmr


def test_degenerate_flag_set_when_imposters_scarce():
    scores = scoreset([0.9], [0.1] * 10)
    assert tmr_at_fmr(scores, 1e-4).degenerate_fmr is True
    scores = scoreset([0.9], [0.1] * 20000)
    assert tmr_at_fmr(scores, 1e-4).degenerate_fmr is False


def test_roc_perfect_separation_passes_through_corner():
    curve = roc(scoreset([0.8, 0.9], [0.1, 0.2]))
    assert any(f == 0.0 and t == 1.0 for f, t in zip(curve.fmr, curve.tmr))


def test_roc_identical_distributions_on_diagonal():
    values = list(np.linspace(-0.5, 0.5, 40))
    curve = roc(scoreset(values, values))
    assert np.max(np.abs(curve.fmr - curve.tmr)) <= 1.0 / 40.0


def test_roc_matches_recount_and_is_monotone():
    rng = np.random.default_rng(8)
    for _ in range(10):
        genuine = rng.uniform(-1, 1, size=rng.integers(5, 60))
        imposter = rng.uniform(-1, 1, size=rng.integers(5, 60))
        curve = roc(scoreset(genuine, imposter))
        for t, f, m in curve.rows():
            of, om = oracles.recount_rates(genuine, imposter, t)
            assert f == of and m == om
        assert np.all(np.diff(curve.fmr) >= 0)
        assert np.all(np.diff(curve.tmr) >= 0)
        assert curve.fmr[-1] == 1.0 and curve.tmr[-1] == 1.0


def test_tmr_operating_point_lies_on_curve():
    rng = np.random.default_rng(12)
    genuine = rng.uniform(-1, 1, size=30)
    imposter = rng.uniform(-1, 1, size=50)
    scores = scoreset(genuine, imposter)
    result = tmr_at_fmr(scores, 0.1)
    curve = roc(scores)
    assert any(
        f <= 0.1 and m == result.tmr and t == result.threshold
        for t, f, m in curve.rows()
    )


def test_synth_cohort_fully_separated_at_strict_fmr():
    scores = build_scores(_cohort(40, genuine_noise=0.01, seed=9))
    result = tmr_at_fmr(scores, 1e-4)
    assert result.tmr == 1.0
