import math

import numpy as np
import pytest

from facegeom.align import (
    CANVAS,
    EYE_L_TARGET,
    EYE_R_TARGET,
    PAD_MARGIN,
    align_inner_eyes,
    align_outer_eyes,
    midline,
)
from facegeom.errors import DegenerateEyeDistance
from facegeom.records import LANDMARKS, LandmarkSet


def test_canonical_face_is_fixed_point(template_points):
    pts = template_points.copy()
    pts[LANDMARKS.OUTER_EYE_L] = EYE_L_TARGET
    pts[LANDMARKS.OUTER_EYE_R] = EYE_R_TARGET
    aligned = align_outer_eyes(pts)
    assert np.array_equal(aligned.points, pts)
    assert aligned.midline_x == 256.0
    assert aligned.interocular_px == 200.0


def test_rotated_face_matches_hand_composed_transform(template_points):
    theta = math.radians(30.0)
    rot = np.array([[math.cos(theta), -math.sin(theta)], [math.sin(theta), math.cos(theta)]])
    base = template_points.copy()
    # shrink so the raw interocular distance is 100 px, then rotate in place
    base[LANDMARKS.OUTER_EYE_L] = (100.0, 300.0)
    base[LANDMARKS.OUTER_EYE_R] = (200.0, 300.0)
    pts = base @ rot.T

    aligned = align_outer_eyes(pts)
    np.testing.assert_allclose(aligned.points[LANDMARKS.OUTER_EYE_L], EYE_L_TARGET, atol=1e-9)
    np.testing.assert_allclose(aligned.points[LANDMARKS.OUTER_EYE_R], EYE_R_TARGET, atol=1e-9)

    # independent composition: undo the rotation, scale by 2, translate eye L onto target
    scale = 200.0 / 100.0
    undo = np.array(
        [[math.cos(-theta), -math.sin(-theta)], [math.sin(-theta), math.cos(-theta)]]
    )
    expected_linear = scale * undo
    offset = np.array(EYE_L_TARGET) - expected_linear @ pts[LANDMARKS.OUTER_EYE_L]
    for probe in (LANDMARKS.NOSE_TIP, LANDMARKS.CHIN, 200, 400):
        expected = expected_linear @ pts[probe] + offset
        np.testing.assert_allclose(aligned.points[probe], expected, atol=1e-9)


def test_coincident_outer_eyes_degenerate(template_points):
    pts = template_points.copy()
    pts[LANDMARKS.OUTER_EYE_R] = pts[LANDMARKS.OUTER_EYE_L]
    with pytest.raises(DegenerateEyeDistance):
        align_outer_eyes(pts)


def test_inner_alignment_levels_eyes_and_fits_margin(template_points):
    theta = math.radians(10.0)
    rot = np.array([[math.cos(theta), -math.sin(theta)], [math.sin(theta), math.cos(theta)]])
    aligned = align_inner_eyes(template_points @ rot.T)
    el = aligned.points[LANDMARKS.INNER_EYE_L]
    er = aligned.points[LANDMARKS.INNER_EYE_R]
    assert abs(el[1] - er[1]) < 1e-9
    lo = aligned.points.min(axis=0)
    hi = aligned.points.max(axis=0)
    assert max(hi[0] - lo[0], hi[1] - lo[1]) == pytest.approx(CANVAS - 2 * PAD_MARGIN)
    np.testing.assert_allclose((lo + hi) / 2.0, [CANVAS / 2.0, CANVAS / 2.0], atol=1e-9)


def test_inner_alignment_level_box_is_pure_rescale():
    # level inner eyes, landmark box exactly 480x480 centered on the canvas
    pts = np.zeros((468, 2))
    pts[LANDMARKS.INNER_EYE_L] = (200.0, 220.0)
    pts[LANDMARKS.INNER_EYE_R] = (312.0, 220.0)
    filler = [i for i in range(468) if i not in (LANDMARKS.INNER_EYE_L, LANDMARKS.INNER_EYE_R)]
    pts[filler[0]] = (16.0, 16.0)
    pts[filler[1]] = (496.0, 496.0)
    for k, i in enumerate(filler[2:]):
        pts[i] = (40.0 + (k % 20) * 20.0, 60.0 + (k % 13) * 30.0)
    aligned = align_inner_eyes(pts)
    np.testing.assert_allclose(aligned.points, pts, atol=1e-9)


def test_coincident_inner_eyes_degenerate(template_points):
    pts = template_points.copy()
    pts[LANDMARKS.INNER_EYE_R] = pts[LANDMARKS.INNER_EYE_L]
    with pytest.raises(DegenerateEyeDistance):
        align_inner_eyes(pts)


def test_midline_is_eye_corner_midpoint(template_points):
    aligned = align_outer_eyes(template_points)
    assert midline(aligned) == (
        aligned.points[LANDMARKS.OUTER_EYE_L, 0] + aligned.points[LANDMARKS.OUTER_EYE_R, 0]
    ) / 2.0
    assert midline(aligned) == pytest.approx(256.0, abs=1e-9)
    assert midline(align_outer_eyes(template_points * 0.7)) == pytest.approx(256.0, abs=1e-9)


def test_midline_matches_mirror_axis(template_points):
    # the template is mirrored about x=256 by construction; after alignment the
    # midline must be that same axis mapped into the canonical frame
    aligned = align_outer_eyes(template_points)
    reflected = aligned.points.copy()
    reflected[:, 0] = 2.0 * midline(aligned) - reflected[:, 0]
    for row in reflected:
        assert np.min(np.linalg.norm(aligned.points - row, axis=1)) < 1e-9


@pytest.mark.parametrize("aligner", [align_outer_eyes, align_inner_eyes])
def test_scale_and_rotation_invariance(aligner, make_noisy_face):
    rng = np.random.default_rng(5)
    for _ in range(10):
        face = make_noisy_face(rng).points
        scale = rng.uniform(0.1, 10.0)
        theta = rng.uniform(-math.pi / 4, math.pi / 4)
        rot = np.array([[math.cos(theta), -math.sin(theta)], [math.sin(theta), math.cos(theta)]])
        transformed = (face @ rot.T) * scale + rng.uniform(-40, 40, size=2)
        np.testing.assert_allclose(
            aligner(transformed).points, aligner(face).points, atol=1e-6
        )


@pytest.mark.parametrize("aligner", [align_outer_eyes, align_inner_eyes])
def test_alignment_is_idempotent(aligner, make_noisy_face):
    rng = np.random.default_rng(6)
    face = make_noisy_face(rng)
    once = aligner(face)
    twice = aligner(once.points)
    np.testing.assert_allclose(twice.points, once.points, atol=1e-9)


def test_accepts_landmark_set_and_raw_array(template_points):
    ls = LandmarkSet(template_points, 512, 512)
    a = align_outer_eyes(ls)
    b = align_outer_eyes(template_points)
    assert np.array_equal(a.points, b.points)
