"""facegeom: landmark morphometry for paired pre/post facial photographs."""

from .align import AlignedFace, align_inner_eyes, align_outer_eyes, midline
from .biometric import (
    RocCurve,
    ScoreSet,
    TmrAtFmr,
    build_scores,
    cosine_similarity,
    roc,
    tmr_at_fmr,
)
from .errors import FaceGeomError
from .kdtree import BACKEND as KDTREE_BACKEND
from .kdtree import KdTree2
from .nasal import (
    IdealProfile,
    NasalFeatureVector,
    NasalImprovement,
    improvement,
    nasal_features,
)
from .outcomes import AgeDelta, OutcomeCategory, age_delta, categorize
from .records import (
    LANDMARKS,
    Cohort,
    FaceRecord,
    LandmarkIndex,
    LandmarkSet,
    SubjectPair,
    load_cohort,
    parse_face_record,
    serialize_record,
)
from .stats import (
    CohortReport,
    FeatureGroupResult,
    aggregate,
    paired_t_test,
    wilcoxon_signed_rank,
)
from .symmetry import SymmetryDelta, SymmetryResult, symmetry_delta, symmetry_score
from .synth import SplitMix64, SynthSpec, generate, template_face, write_cohort

__version__ = "0.1.0"

__all__ = [
    "AgeDelta",
    "AlignedFace",
    "Cohort",
    "CohortReport",
    "FaceGeomError",
    "FaceRecord",
    "FeatureGroupResult",
    "IdealProfile",
    "KDTREE_BACKEND",
    "KdTree2",
    "LANDMARKS",
    "LandmarkIndex",
    "LandmarkSet",
    "NasalFeatureVector",
    "NasalImprovement",
    "OutcomeCategory",
    "RocCurve",
    "ScoreSet",
    "SplitMix64",
    "SubjectPair",
    "SymmetryDelta",
    "SymmetryResult",
    "SynthSpec",
    "TmrAtFmr",
    "aggregate",
    "age_delta",
    "align_inner_eyes",
    "align_outer_eyes",
    "build_scores",
    "categorize",
    "cosine_similarity",
    "generate",
    "improvement",
    "load_cohort",
    "midline",
    "nasal_features",
    "paired_t_test",
    "parse_face_record",
    "roc",
    "serialize_record",
    "symmetry_delta",
    "symmetry_score",
    "template_face",
    "tmr_at_fmr",
    "wilcoxon_signed_rank",
    "write_cohort",
]
