"""Deterministic synthetic cohorts with known ground truth.

The base face is an exactly mirror-symmetric 468-point template in a 512x512
frame. Pre-operative faces add jitter to the left-side landmarks only; post
faces move each ratio feature strictly toward or away from its ideal according
to planted per-subject flags, independently per feature. Ground truth records
every planted flag, the sign of the symmetry change, and the age shift.

Randomness comes from SplitMix64, a named 64-bit PRNG with published test
vectors, so fixtures are identical across platforms for a given seed.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import EmptyCohort
from .nasal import RATIO_FEATURES, IdealProfile
from .records import (
    LANDMARKS,
    N_LANDMARKS,
    Cohort,
    FaceRecord,
    LandmarkSet,
    SubjectPair,
    serialize_record,
)

_MASK64 = (1 << 64) - 1
CANVAS = 512


class SplitMix64:
    """SplitMix64 PRNG (Steele, Lea & Flood's mixing constants)."""

    def __init__(self, seed: int) -> None:
        self._state = seed & _MASK64
        self._spare_normal: float | None = None

    def next_u64(self) -> int:
        self._state = (self._state + 0x9E3779B97F4A7C15) & _MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def uniform(self) -> float:
        """Uniform in (0, 1]."""
        return ((self.next_u64() >> 11) + 1) * 2.0**-53

    def normal(self) -> float:
        if self._spare_normal is not None:
            value = self._spare_normal
            self._spare_normal = None
            return value
        u1 = self.uniform()
        u2 = self.uniform()
        radius = math.sqrt(-2.0 * math.log(u1))
        self._spare_normal = radius * math.sin(2.0 * math.pi * u2)
        return radius * math.cos(2.0 * math.pi * u2)

    def bernoulli(self, p: float) -> bool:
        return self.uniform() <= p


@dataclass(frozen=True)
class SynthSpec:
    seed: int
    n_subjects: int
    asymmetry_noise_px: float = 0.0
    planted_improve_probs: dict[str, float] = field(
        default_factory=lambda: {"aw_ic": 0.5, "aw_fw": 0.5, "nl_fh": 0.5}
    )
    age_shift_mean: float = -2.0
    age_shift_sigma: float = 0.0
    embedding_dim: int = 64
    genuine_noise: float = 0.0
    n_surgeons: int = 6

    def __post_init__(self) -> None:
        if self.n_subjects < 1:
            raise EmptyCohort(f"n_subjects must be >= 1, got {self.n_subjects}")
        for feature in RATIO_FEATURES:
            p = self.planted_improve_probs.get(feature)
            if p is None or not 0.0 <= p <= 1.0:
                raise ValueError(f"planted_improve_probs[{feature!r}] must be in [0, 1], got {p}")
        if self.asymmetry_noise_px < 0 or self.genuine_noise < 0 or self.age_shift_sigma < 0:
            raise ValueError("noise scales must be >= 0")
        if self.embedding_dim < 2:
            raise ValueError(f"embedding_dim must be >= 2, got {self.embedding_dim}")
        if self.n_surgeons < 1:
            raise ValueError(f"n_surgeons must be >= 1, got {self.n_surgeons}")


_NAMED_POSITIONS = {
    LANDMARKS.OUTER_EYE_L: (156.0, 216.0),
    LANDMARKS.OUTER_EYE_R: (356.0, 216.0),
    LANDMARKS.INNER_EYE_L: (216.0, 218.0),
    LANDMARKS.INNER_EYE_R: (296.0, 218.0),
    LANDMARKS.NOSE_TIP: (256.0, 300.0),
    LANDMARKS.NOSTRIL_L: (219.0, 308.0),
    LANDMARKS.NOSTRIL_R: (293.0, 308.0),
    LANDMARKS.CHEEK_L: (76.0, 260.0),
    LANDMARKS.CHEEK_R: (436.0, 260.0),
    LANDMARKS.FOREHEAD: (256.0, 60.0),
    LANDMARKS.CHIN: (256.0, 460.0),
    LANDMARKS.GLABELLA: (256.0, 210.0),
}

_MID_X = 256.0
_TIP_Y = 300.0
_FACE_HEIGHT = 400.0
_INTERCANTHAL = 80.0


def template_face() -> np.ndarray:
    """Exactly mirror-symmetric 468-point template (about x = 256)."""
    pts = np.zeros((N_LANDMARKS, 2), dtype=np.float64)
    for idx, (x, y) in _NAMED_POSITIONS.items():
        pts[idx] = (x, y)
    unused = sorted(set(range(N_LANDMARKS)) - set(_NAMED_POSITIONS))
    # R2 low-discrepancy sequence spreads the filler pairs without collisions.
    # Right x is derived as 512 - left_x, the exact float op the symmetry
    # reflection performs, so twin pairs mirror bit-exactly.
    g = 1.32471795724474602596
    a1, a2 = 1.0 / g, 1.0 / (g * g)
    for k in range(len(unused) // 2):
        u = (0.5 + a1 * (k + 1)) % 1.0
        v = (0.5 + a2 * (k + 1)) % 1.0
        xl = _MID_X - (20.0 + 216.0 * u)
        y = 40.0 + 432.0 * v
        pts[unused[2 * k]] = (xl, y)
        pts[unused[2 * k + 1]] = (2.0 * _MID_X - xl, y)
    return pts


def template_ratios() -> dict[str, float]:
    pts = template_face()
    alar = float(np.linalg.norm(pts[LANDMARKS.NOSTRIL_L] - pts[LANDMARKS.NOSTRIL_R]))
    ic = float(np.linalg.norm(pts[LANDMARKS.INNER_EYE_L] - pts[LANDMARKS.INNER_EYE_R]))
    fw = float(np.linalg.norm(pts[LANDMARKS.CHEEK_L] - pts[LANDMARKS.CHEEK_R]))
    nl = float(np.linalg.norm(pts[LANDMARKS.GLABELLA] - pts[LANDMARKS.NOSE_TIP]))
    fh = float(np.linalg.norm(pts[LANDMARKS.FOREHEAD] - pts[LANDMARKS.CHIN]))
    return {"aw_ic": alar / ic, "aw_fw": alar / fw, "nl_fh": nl / fh}


_IMPROVE_SHRINK = 0.5
_WORSEN_GROW = 1.5


def _post_ratio(pre: float, ideal: float, improved: bool) -> float:
    side = 1.0 if pre >= ideal else -1.0
    factor = _IMPROVE_SHRINK if improved else _WORSEN_GROW
    return ideal + side * abs(pre - ideal) * factor


def _apply_ratios(pts: np.ndarray, ratios: dict[str, float]) -> None:
    alar = ratios["aw_ic"] * _INTERCANTHAL
    nostril_lx = _MID_X - alar / 2.0
    pts[LANDMARKS.NOSTRIL_L, 0] = nostril_lx
    pts[LANDMARKS.NOSTRIL_R, 0] = 2.0 * _MID_X - nostril_lx
    face_width = alar / ratios["aw_fw"]
    cheek_lx = _MID_X - face_width / 2.0
    pts[LANDMARKS.CHEEK_L, 0] = cheek_lx
    pts[LANDMARKS.CHEEK_R, 0] = 2.0 * _MID_X - cheek_lx
    pts[LANDMARKS.GLABELLA, 1] = _TIP_Y - ratios["nl_fh"] * _FACE_HEIGHT


def _unit_vector(rng: SplitMix64, dim: int) -> np.ndarray:
    v = np.array([rng.normal() for _ in range(dim)])
    norm = float(np.linalg.norm(v))
    if norm == 0.0:
        v[0] = 1.0
        norm = 1.0
    return v / norm


def generate(spec: SynthSpec, ideals: IdealProfile = IdealProfile()) -> tuple[Cohort, dict]:
    """Build the cohort and its ground-truth description for one spec."""
    rng = SplitMix64(spec.seed)
    base = template_face()
    left_indices = np.flatnonzero(base[:, 0] < _MID_X)
    pre_ratios = template_ratios()

    pairs = []
    subjects_truth: dict[str, dict] = {}
    for i in range(spec.n_subjects):
        sid = f"subj{i:04d}"
        planted = {f: rng.bernoulli(spec.planted_improve_probs[f]) for f in RATIO_FEATURES}
        post_ratios = {
            f: _post_ratio(pre_ratios[f], ideals.get(f), planted[f]) for f in RATIO_FEATURES
        }

        pre_pts = base.copy()
        sigma = spec.asymmetry_noise_px
        if sigma > 0:
            for idx in left_indices:
                pre_pts[idx, 0] += sigma * rng.normal()
                pre_pts[idx, 1] += sigma * rng.normal()
            np.clip(pre_pts, 0.0, CANVAS, out=pre_pts)

        post_pts = base.copy()
        _apply_ratios(post_pts, post_ratios)

        pre_age = 35.0 + 10.0 * rng.uniform()
        age_shift = spec.age_shift_mean + spec.age_shift_sigma * rng.normal()
        post_age = max(0.0, pre_age + age_shift)

        identity = _unit_vector(rng, spec.embedding_dim)
        pre_emb = identity
        if spec.genuine_noise > 0:
            noisy = identity + spec.genuine_noise * np.array(
                [rng.normal() for _ in range(spec.embedding_dim)]
            )
            post_emb = noisy / float(np.linalg.norm(noisy))
        else:
            post_emb = identity.copy()

        pre = FaceRecord(
            image_id=f"{sid}_pre",
            landmarks=LandmarkSet(pre_pts, CANVAS, CANVAS),
            role="pre",
            apparent_age=pre_age,
            embedding=pre_emb,
        )
        post = FaceRecord(
            image_id=f"{sid}_post",
            landmarks=LandmarkSet(post_pts, CANVAS, CANVAS),
            role="post",
            apparent_age=post_age,
            embedding=post_emb,
        )
        pairs.append(
            SubjectPair(
                subject_id=sid,
                surgeon_id=f"S{(i % spec.n_surgeons) + 1}",
                procedure_tags=frozenset({"rhinoplasty"}),
                pre=pre,
                post=post,
            )
        )
        planted_count = sum(planted.values())
        subjects_truth[sid] = {
            "planted": planted,
            "planted_count": planted_count,
            "improved_any": planted_count >= 1,
            "delta_s_sign": -1 if sigma > 0 else 0,
            "delta_age": post_age - pre_age,
            "pre_ratios": pre_ratios,
            "post_ratios": post_ratios,
        }

    truth = {
        "seed": spec.seed,
        "n_subjects": spec.n_subjects,
        "asymmetry_noise_px": spec.asymmetry_noise_px,
        "planted_improve_probs": dict(spec.planted_improve_probs),
        "planted_rates": {
            f: sum(subjects_truth[s]["planted"][f] for s in subjects_truth) / spec.n_subjects
            for f in RATIO_FEATURES
        },
        "subjects": subjects_truth,
    }
    return Cohort(pairs=tuple(pairs), name=f"synth-{spec.seed}"), truth


def write_cohort(cohort: Cohort, truth: dict, out_dir: str | Path) -> None:
    """Write record JSONs, the manifest CSV, and ground_truth.json."""
    out_dir = Path(out_dir)
    records_dir = out_dir / "records"
    records_dir.mkdir(parents=True, exist_ok=True)
    rows = ["subject_id,surgeon_id,procedure_tags,pre_record,post_record"]
    for pair in cohort.pairs:
        for rec in (pair.pre, pair.post):
            doc = serialize_record(rec, pair.subject_id)
            with open(records_dir / f"{rec.image_id}.json", "w", encoding="utf-8") as fh:
                json.dump(doc, fh)
        tags = ";".join(sorted(pair.procedure_tags))
        rows.append(
            f"{pair.subject_id},{pair.surgeon_id},{tags},"
            f"{pair.pre.image_id}.json,{pair.post.image_id}.json"
        )
    (out_dir / "manifest.csv").write_text("\n".join(rows) + "\n", encoding="utf-8")
    with open(out_dir / "ground_truth.json", "w", encoding="utf-8") as fh:
        json.dump(truth, fh, indent=2, sort_keys=True)
