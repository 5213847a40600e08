import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from facegeom.align import AlignedFace, align_inner_eyes
from facegeom.errors import DegenerateDenominator
from facegeom.nasal import (
    ALL_FEATURES,
    RATIO_FEATURES,
    IdealProfile,
    NasalFeatureVector,
    improvement,
    nasal_features,
)
from facegeom.records import LANDMARKS


def as_aligned(points, midline_x):
    return AlignedFace(points=np.asarray(points, dtype=np.float64), canvas=512,
                       interocular_px=200.0, midline_x=midline_x)


def vector(**overrides):
    values = {"aw_ic": 0.9, "aw_fw": 0.21, "nl_fh": 0.3, "tip_dev": 1.0, "nostril_asym": 0.5}
    values.update(overrides)
    return NasalFeatureVector(**values)


def test_symmetric_face_has_zero_deviation_features(template_points):
    fv = nasal_features(align_inner_eyes(template_points))
    assert fv.tip_dev == pytest.approx(0.0, abs=1e-9)
    assert fv.nostril_asym == pytest.approx(0.0, abs=1e-9)


def test_hand_constructed_coordinates(template_points):
    pts = template_points.copy()
    pts[LANDMARKS.NOSTRIL_L] = (206.0, 300.0)
    pts[LANDMARKS.NOSTRIL_R] = (306.0, 300.0)
    pts[LANDMARKS.INNER_EYE_L] = (206.0, 256.0)
    pts[LANDMARKS.INNER_EYE_R] = (306.0, 256.0)
    fv = nasal_features(as_aligned(pts, midline_x=256.0))
    assert fv.aw_ic == pytest.approx(1.0, abs=1e-12)


def test_ratios_invariant_to_prealignment_scale(template_points, make_noisy_face):
    rng = np.random.default_rng(3)
    face = make_noisy_face(rng).points
    base = nasal_features(align_inner_eyes(face))
    scaled = nasal_features(align_inner_eyes(face * 2.0))
    for feature in RATIO_FEATURES:
        assert scaled.get(feature) == pytest.approx(base.get(feature), abs=1e-9)


def test_degenerate_face_width(template_points):
    pts = template_points.copy()
    pts[LANDMARKS.CHEEK_R] = pts[LANDMARKS.CHEEK_L]
    with pytest.raises(DegenerateDenominator):
        nasal_features(as_aligned(pts, midline_x=256.0))


def test_nose_length_endpoints_override(template_points):
    aligned = align_inner_eyes(template_points)
    default = nasal_features(aligned)
    overridden = nasal_features(aligned, nose_length_endpoints=(LANDMARKS.FOREHEAD, LANDMARKS.NOSE_TIP))
    assert overridden.nl_fh > default.nl_fh  # forehead is farther from the tip


def test_mirror_invariance_of_deviation_features(make_noisy_face):
    rng = np.random.default_rng(9)
    aligned = align_inner_eyes(make_noisy_face(rng))
    mirrored_pts = aligned.points.copy()
    mirrored_pts[:, 0] = 2.0 * aligned.midline_x - mirrored_pts[:, 0]
    mirrored = as_aligned(mirrored_pts, aligned.midline_x)
    a = nasal_features(aligned)
    b = nasal_features(mirrored)
    assert b.tip_dev == pytest.approx(a.tip_dev, abs=1e-9)
    assert b.nostril_asym == pytest.approx(a.nostril_asym, abs=1e-9)


def test_improvement_moving_toward_ideal():
    result = improvement(vector(aw_ic=0.85), vector(aw_ic=0.90))
    assert result.per_feature["aw_ic"].improved
    assert result.per_feature["aw_ic"].dist_before == pytest.approx(0.15)
    assert result.per_feature["aw_ic"].dist_after == pytest.approx(0.10)


def test_narrowing_discrepancy_between_alar_ideals():
    # the same narrowing moves aw_ic away from 1.0 but aw_fw toward 0.20
    before = vector(aw_ic=0.95, aw_fw=0.24)
    after = vector(aw_ic=0.90, aw_fw=0.22)
    result = improvement(before, after)
    assert not result.per_feature["aw_ic"].improved
    assert result.per_feature["aw_fw"].improved


def test_unchanged_features_do_not_improve():
    v = vector()
    result = improvement(v, v)
    assert not any(result.per_feature[f].improved for f in ALL_FEATURES)
    assert result.significant_improved_count == 0
    assert result.improved_any is False


def test_exact_ideal_after_counts_as_improved():
    ideals = IdealProfile()
    result = improvement(vector(nl_fh=0.25), vector(nl_fh=ideals.nl_fh), ideals)
    assert result.per_feature["nl_fh"].improved


def test_significant_count_ignores_deviation_features():
    before = vector(tip_dev=5.0, nostril_asym=5.0)
    after = vector(tip_dev=0.0, nostril_asym=0.0)
    result = improvement(before, after)
    assert result.per_feature["tip_dev"].improved
    assert result.per_feature["nostril_asym"].improved
    assert result.significant_improved_count == 0
    assert result.improved_any is False


def test_improved_any_matches_count():
    result = improvement(vector(aw_ic=0.8), vector(aw_ic=0.95))
    assert result.significant_improved_count == 1
    assert result.improved_any is True


@given(
    before=st.floats(0.01, 2.0),
    after=st.floats(0.01, 2.0),
    ideal=st.floats(0.0, 2.0),
)
@settings(max_examples=200, deadline=None)
def test_exactly_one_of_improved_worsened_unchanged(before, after, ideal):
    ideals = IdealProfile(aw_ic=ideal)
    result = improvement(vector(aw_ic=before), vector(aw_ic=after), ideals)
    entry = result.per_feature["aw_ic"]
    improved = entry.improved
    worsened = entry.dist_after > entry.dist_before
    unchanged = entry.dist_after == entry.dist_before
    assert sum([improved, worsened, unchanged]) == 1


def test_improvement_grid_matches_inequality():
    grid = [round(0.1 + 0.05 * k, 10) for k in range(29)]
    for ideal in grid:
        ideals = IdealProfile(aw_ic=ideal)
        for b in grid:
            for a in grid:
                got = improvement(vector(aw_ic=b), vector(aw_ic=a), ideals)
                assert got.per_feature["aw_ic"].improved == (abs(a - ideal) < abs(b - ideal))
