"""Canonical data types for landmark records and cohorts, plus JSON/CSV ingestion.

The record JSON schema accepted here::

    {
      "image_id": str, "subject_id": str, "role": "pre"|"post",
      "width": int, "height": int, "coord_mode": "pixel"|"normalized",
      "landmarks": [[x, y] * 468],
      "apparent_age": number|null, "embedding": [number * d]|null,
      "schema_version": 1            # optional; rejected if != 1
    }

Normalized coordinates are rescaled to pixels at parse time, so every stored
LandmarkSet is in pixel units regardless of how the source file encoded it.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    DuplicateSubjectId,
    EmptyCohort,
    MissingField,
    MissingRecordFile,
    NegativeAge,
    OutOfRangeCoordinate,
    RolePairingError,
    SchemaError,
    WrongLandmarkCount,
    ZeroNormEmbedding,
)

N_LANDMARKS = 468
SCHEMA_VERSION = 1

MANIFEST_COLUMNS = ("subject_id", "surgeon_id", "procedure_tags", "pre_record", "post_record")


@dataclass(frozen=True)
class LandmarkIndex:
    """Named landmark positions in the 468-point face-mesh convention.

    The defaults are the single source of truth for every geometric operation;
    pass an alternate instance to retarget the toolkit at a different mesh.
    """

    OUTER_EYE_L: int = 33
    OUTER_EYE_R: int = 263
    NOSE_TIP: int = 1
    NOSTRIL_L: int = 98
    NOSTRIL_R: int = 327
    INNER_EYE_L: int = 133
    INNER_EYE_R: int = 362
    CHEEK_L: int = 234
    CHEEK_R: int = 454
    CHIN: int = 152
    FOREHEAD: int = 10
    GLABELLA: int = 168

    def __post_init__(self) -> None:
        for name, value in vars(self).items():
            if not 0 <= value < N_LANDMARKS:
                raise ValueError(f"landmark index {name}={value} outside [0, {N_LANDMARKS - 1}]")
        for left, right in (
            ("OUTER_EYE_L", "OUTER_EYE_R"),
            ("NOSTRIL_L", "NOSTRIL_R"),
            ("INNER_EYE_L", "INNER_EYE_R"),
            ("CHEEK_L", "CHEEK_R"),
        ):
            if getattr(self, left) == getattr(self, right):
                raise ValueError(f"{left} and {right} must be distinct")


LANDMARKS = LandmarkIndex()


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=np.float64)
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class LandmarkSet:
    """468 2D keypoints for one face image, in pixel units (y grows downward)."""

    points: np.ndarray
    image_width: int
    image_height: int
    coord_mode: str = "pixel"

    def __post_init__(self) -> None:
        object.__setattr__(self, "points", _readonly(self.points))
        if self.points.shape != (N_LANDMARKS, 2):
            raise WrongLandmarkCount(
                f"expected {N_LANDMARKS} landmark points, got shape {self.points.shape}"
            )
        if self.image_width <= 0 or self.image_height <= 0:
            raise OutOfRangeCoordinate(
                f"image dimensions must be positive, got {self.image_width}x{self.image_height}"
            )
        if self.coord_mode != "pixel":
            raise SchemaError(f"stored landmark sets are always pixel-mode, got {self.coord_mode!r}")
        x, y = self.points[:, 0], self.points[:, 1]
        if not np.isfinite(self.points).all():
            raise OutOfRangeCoordinate("landmark coordinates must be finite")
        if (x < 0).any() or (x > self.image_width).any() or (y < 0).any() or (y > self.image_height).any():
            bad = int(np.argmax((x < 0) | (x > self.image_width) | (y < 0) | (y > self.image_height)))
            raise OutOfRangeCoordinate(
                f"landmark {bad} at ({x[bad]}, {y[bad]}) outside "
                f"[0, {self.image_width}] x [0, {self.image_height}]"
            )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, LandmarkSet):
            return NotImplemented
        return (
            self.image_width == other.image_width
            and self.image_height == other.image_height
            and np.array_equal(self.points, other.points)
        )


@dataclass(frozen=True, eq=False)
class FaceRecord:
    """One image's landmarks plus optional apparent age and identity embedding."""

    image_id: str
    landmarks: LandmarkSet
    role: str
    apparent_age: float | None = None
    embedding: np.ndarray | None = None

    def __post_init__(self) -> None:
        if self.role not in ("pre", "post"):
            raise SchemaError(f"role must be 'pre' or 'post', got {self.role!r} ({self.image_id})")
        if self.apparent_age is not None:
            age = float(self.apparent_age)
            if not math.isfinite(age) or age < 0:
                raise NegativeAge(f"apparent_age must be finite and >= 0, got {age} ({self.image_id})")
            object.__setattr__(self, "apparent_age", age)
        if self.embedding is not None:
            emb = _readonly(np.asarray(self.embedding, dtype=np.float64))
            if emb.ndim != 1 or emb.size < 1:
                raise SchemaError(f"embedding must be a 1-d vector ({self.image_id})")
            if not np.isfinite(emb).all():
                raise SchemaError(f"embedding contains non-finite values ({self.image_id})")
            if float(np.linalg.norm(emb)) == 0.0:
                raise ZeroNormEmbedding(f"embedding has zero norm ({self.image_id})")
            object.__setattr__(self, "embedding", emb)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FaceRecord):
            return NotImplemented
        if self.embedding is None or other.embedding is None:
            emb_equal = self.embedding is None and other.embedding is None
        else:
            emb_equal = np.array_equal(self.embedding, other.embedding)
        return (
            self.image_id == other.image_id
            and self.role == other.role
            and self.apparent_age == other.apparent_age
            and self.landmarks == other.landmarks
            and emb_equal
        )


@dataclass(frozen=True)
class SubjectPair:
    """Pre- and post-operative records for one subject."""

    subject_id: str
    surgeon_id: str
    procedure_tags: frozenset[str]
    pre: FaceRecord
    post: FaceRecord

    def __post_init__(self) -> None:
        if self.pre.role != "pre" or self.post.role != "post":
            raise RolePairingError(
                f"subject {self.subject_id}: pre/post roles are "
                f"{self.pre.role!r}/{self.post.role!r}"
            )
        object.__setattr__(self, "procedure_tags", frozenset(self.procedure_tags))


@dataclass(frozen=True)
class Cohort:
    pairs: tuple[SubjectPair, ...]
    name: str = "cohort"

    def __post_init__(self) -> None:
        object.__setattr__(self, "pairs", tuple(self.pairs))
        if not self.pairs:
            raise EmptyCohort(f"cohort {self.name!r} has no subject pairs")
        seen: set[str] = set()
        for pair in self.pairs:
            if pair.subject_id in seen:
                raise DuplicateSubjectId(pair.subject_id)
            seen.add(pair.subject_id)

    def __len__(self) -> int:
        return len(self.pairs)

    def subject_ids(self) -> list[str]:
        return [p.subject_id for p in self.pairs]


def _require(doc: dict, key: str, image_id: str) -> object:
    if key not in doc or doc[key] is None:
        raise MissingField(f"missing field {key!r} in record {image_id!r}")
    return doc[key]


def _as_float(value: object, what: str, image_id: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SchemaError(f"{what} must be a number, got {type(value).__name__} ({image_id})")
    return float(value)


def parse_face_record(doc: dict) -> FaceRecord:
    """Validate a record document and return a FaceRecord in pixel units."""
    if not isinstance(doc, dict):
        raise SchemaError(f"record document must be a JSON object, got {type(doc).__name__}")
    image_id = doc.get("image_id")
    if not isinstance(image_id, str) or not image_id:
        raise MissingField("missing field 'image_id' in record")

    version = doc.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise SchemaError(f"unsupported schema_version {version!r} ({image_id})")

    _require(doc, "subject_id", image_id)
    role = _require(doc, "role", image_id)
    width = _require(doc, "width", image_id)
    height = _require(doc, "height", image_id)
    coord_mode = _require(doc, "coord_mode", image_id)
    raw_points = _require(doc, "landmarks", image_id)

    if coord_mode not in ("pixel", "normalized"):
        raise SchemaError(f"coord_mode must be 'pixel' or 'normalized', got {coord_mode!r} ({image_id})")
    if isinstance(width, bool) or isinstance(height, bool) or not isinstance(width, int) or not isinstance(height, int):
        raise SchemaError(f"width/height must be integers ({image_id})")
    if width <= 0 or height <= 0:
        raise OutOfRangeCoordinate(f"width/height must be positive, got {width}x{height} ({image_id})")

    if not isinstance(raw_points, list):
        raise SchemaError(f"landmarks must be a list ({image_id})")
    if len(raw_points) != N_LANDMARKS:
        raise WrongLandmarkCount(f"expected {N_LANDMARKS} landmarks, got {len(raw_points)} ({image_id})")
    points = np.empty((N_LANDMARKS, 2), dtype=np.float64)
    for i, entry in enumerate(raw_points):
        if not isinstance(entry, (list, tuple)) or len(entry) != 2:
            raise SchemaError(f"landmark {i} must be an [x, y] pair ({image_id})")
        points[i, 0] = _as_float(entry[0], f"landmark {i} x", image_id)
        points[i, 1] = _as_float(entry[1], f"landmark {i} y", image_id)
    if coord_mode == "normalized":
        points[:, 0] *= width
        points[:, 1] *= height

    try:
        landmarks = LandmarkSet(points=points, image_width=width, image_height=height)
    except (WrongLandmarkCount, OutOfRangeCoordinate) as err:
        raise type(err)(f"{err} ({image_id})") from None

    age = doc.get("apparent_age")
    if age is not None:
        age = _as_float(age, "apparent_age", image_id)
    embedding = doc.get("embedding")
    if embedding is not None:
        if not isinstance(embedding, list) or not embedding:
            raise SchemaError(f"embedding must be a nonempty list ({image_id})")
        embedding = np.array(
            [_as_float(v, f"embedding[{i}]", image_id) for i, v in enumerate(embedding)],
            dtype=np.float64,
        )

    return FaceRecord(
        image_id=image_id,
        landmarks=landmarks,
        role=str(role),
        apparent_age=age,
        embedding=embedding,
    )


def serialize_record(record: FaceRecord, subject_id: str) -> dict:
    """Emit the record JSON document; always pixel-mode so round-trips are bit-exact."""
    return {
        "schema_version": SCHEMA_VERSION,
        "image_id": record.image_id,
        "subject_id": subject_id,
        "role": record.role,
        "width": record.landmarks.image_width,
        "height": record.landmarks.image_height,
        "coord_mode": "pixel",
        "landmarks": [[float(x), float(y)] for x, y in record.landmarks.points],
        "apparent_age": record.apparent_age,
        "embedding": None if record.embedding is None else [float(v) for v in record.embedding],
    }


def _load_record_file(path: Path) -> dict:
    if not path.is_file():
        raise MissingRecordFile(str(path))
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as err:
        raise SchemaError(f"invalid JSON in {path}: {err}") from None


def iter_manifest_rows(manifest: str | Path) -> list[dict]:
    """Read the cohort manifest CSV and return its rows in file order."""
    manifest = Path(manifest)
    if not manifest.is_file():
        raise MissingRecordFile(str(manifest))
    with open(manifest, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [c for c in MANIFEST_COLUMNS if c not in header]
        if missing:
            raise SchemaError(f"manifest {manifest} missing columns: {', '.join(missing)}")
        return list(reader)


def _pair_from_row(row: dict, record_dir: Path) -> SubjectPair:
    subject_id = row["subject_id"]
    records = {}
    for role, column in (("pre", "pre_record"), ("post", "post_record")):
        path = record_dir / row[column]
        doc = _load_record_file(path)
        rec = parse_face_record(doc)
        if rec.role != role:
            raise RolePairingError(
                f"subject {subject_id}: {column} file {path.name} has role {rec.role!r}"
            )
        if doc.get("subject_id") != subject_id:
            raise SchemaError(
                f"subject {subject_id}: record {path.name} declares subject_id "
                f"{doc.get('subject_id')!r}"
            )
        records[role] = rec
    tags = frozenset(t for t in row["procedure_tags"].split(";") if t)
    return SubjectPair(
        subject_id=subject_id,
        surgeon_id=row["surgeon_id"],
        procedure_tags=tags,
        pre=records["pre"],
        post=records["post"],
    )


def load_cohort(manifest: str | Path, record_dir: str | Path, name: str = "cohort") -> Cohort:
    """Load and validate a full cohort; fails on the first invalid row."""
    record_dir = Path(record_dir)
    rows = iter_manifest_rows(manifest)
    if not rows:
        raise EmptyCohort(f"manifest {manifest} has no rows")
    seen: set[str] = set()
    pairs = []
    for row in rows:
        if row["subject_id"] in seen:
            raise DuplicateSubjectId(row["subject_id"])
        seen.add(row["subject_id"])
        pairs.append(_pair_from_row(row, record_dir))
    return Cohort(pairs=tuple(pairs), name=name)
