"""Batch command line: validate, analyze, synth.

Exit codes: 0 success, 2 configuration/usage error, 3 validation failure,
4 analysis failure. Outputs are written atomically and are byte-identical for
identical inputs and configuration. Log level comes from FACEGEOM_LOG_LEVEL.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import align, biometric, nasal, outcomes, stats, symmetry, synth
from .errors import (
    EmptyCohort,
    FaceGeomError,
    MissingEmbedding,
    MissingRecordFile,
    SchemaError,
)
from .records import (
    LANDMARKS,
    Cohort,
    SubjectPair,
    iter_manifest_rows,
    load_cohort,
    parse_face_record,
    _load_record_file,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_VALIDATION = 3
EXIT_ANALYSIS = 4

log = logging.getLogger("facegeom")

HIST_BINS = 30


class ConfigError(Exception):
    pass


@dataclass
class RunConfig:
    manifest: Path
    records: Path
    out: Path | None = None
    procedure: str | None = None
    alpha: float = 0.001
    fmr: float = 1e-4
    ideal_nlfh: float | None = None
    nose_length_endpoints: tuple[int, int] | None = None
    keep_going: bool = False
    symmetry: bool = True
    nasal: bool = True
    outcomes: bool = True
    biometric: bool = True
    imposter_mode: str = "pre-post"
    dump_aligned: bool = False
    jobs: int = 1

    def __post_init__(self) -> None:
        if not 0.0 <= self.fmr < 1.0:
            raise ConfigError(f"--fmr must be in [0, 1), got {self.fmr}")
        if not 0.0 < self.alpha < 1.0:
            raise ConfigError(f"--alpha must be in (0, 1), got {self.alpha}")
        if self.jobs < 1:
            raise ConfigError(f"--jobs must be >= 1, got {self.jobs}")
        if self.imposter_mode not in biometric.IMPOSTER_MODES:
            raise ConfigError(f"--imposter-mode must be one of {biometric.IMPOSTER_MODES}")
        if self.outcomes and not self.symmetry:
            raise ConfigError("outcome categorization needs the symmetry analysis enabled")


def read_config_file(path: str | Path) -> dict[str, str]:
    """Parse the key = value config format (# starts a comment)."""
    values: dict[str, str] = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        values[key.replace("-", "_")] = value
    return values


_CONFIG_KEYS = {
    "manifest": str,
    "records": str,
    "out": str,
    "procedure": str,
    "alpha": float,
    "fmr": float,
    "ideal_nlfh": float,
    "nose_length_endpoints": str,
    "keep_going": lambda v: v.lower() in ("1", "true", "yes"),
    "symmetry": lambda v: v.lower() in ("1", "true", "yes"),
    "nasal": lambda v: v.lower() in ("1", "true", "yes"),
    "outcomes": lambda v: v.lower() in ("1", "true", "yes"),
    "biometric": lambda v: v.lower() in ("1", "true", "yes"),
    "imposter_mode": str,
    "dump_aligned": lambda v: v.lower() in ("1", "true", "yes"),
    "jobs": int,
}


def _merge_config(args: argparse.Namespace) -> dict:
    """File values fill in whatever the command line left unset."""
    merged: dict = {}
    if getattr(args, "config", None):
        file_values = read_config_file(args.config)
        unknown = set(file_values) - set(_CONFIG_KEYS)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
        for key, raw in file_values.items():
            try:
                merged[key] = _CONFIG_KEYS[key](raw)
            except ValueError as err:
                raise ConfigError(f"config key {key}: {err}") from None
    for key in _CONFIG_KEYS:
        flag = getattr(args, key, None)
        if flag is not None:
            merged[key] = flag
    return merged


def _parse_endpoints(value: str) -> tuple[int, int]:
    parts = value.split(",")
    if len(parts) != 2:
        raise ConfigError(f"--nose-length-endpoints expects 'top,bottom', got {value!r}")
    try:
        top, bottom = int(parts[0]), int(parts[1])
    except ValueError:
        raise ConfigError(f"--nose-length-endpoints must be integers, got {value!r}") from None
    if not (0 <= top < 468 and 0 <= bottom < 468) or top == bottom:
        raise ConfigError(f"--nose-length-endpoints must be distinct indices in [0, 467], got {value!r}")
    return top, bottom


def _build_run_config(args: argparse.Namespace, need_out: bool) -> RunConfig:
    merged = _merge_config(args)
    for required in ("manifest", "records") + (("out",) if need_out else ()):
        if required not in merged:
            raise ConfigError(f"missing required option --{required.replace('_', '-')}")
    manifest = Path(merged["manifest"])
    records = Path(merged["records"])
    if not manifest.is_file():
        raise ConfigError(f"manifest not found: {manifest}")
    if not records.is_dir():
        raise ConfigError(f"record directory not found: {records}")
    endpoints = merged.get("nose_length_endpoints")
    if isinstance(endpoints, str):
        endpoints = _parse_endpoints(endpoints)
    return RunConfig(
        manifest=manifest,
        records=records,
        out=Path(merged["out"]) if "out" in merged else None,
        procedure=merged.get("procedure"),
        alpha=merged.get("alpha", 0.001),
        fmr=merged.get("fmr", 1e-4),
        ideal_nlfh=merged.get("ideal_nlfh"),
        nose_length_endpoints=endpoints,
        keep_going=merged.get("keep_going", False),
        symmetry=merged.get("symmetry", True),
        nasal=merged.get("nasal", True),
        outcomes=merged.get("outcomes", True),
        biometric=merged.get("biometric", True),
        imposter_mode=merged.get("imposter_mode", "pre-post"),
        dump_aligned=merged.get("dump_aligned", False),
        jobs=merged.get("jobs", 1),
    )


def _atomic_write(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


def _write_json(path: Path, payload: object) -> None:
    _atomic_write(path, json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _write_csv(path: Path, header: str, rows: list[str]) -> None:
    _atomic_write(path, "\n".join([header, *rows]) + "\n")


def _fmt(value: float) -> str:
    return repr(float(value))


def cmd_validate(args: argparse.Namespace) -> int:
    config = _build_run_config(args, need_out=False)
    try:
        rows = iter_manifest_rows(config.manifest)
    except (MissingRecordFile, SchemaError) as err:
        print(f"FAIL manifest: {type(err).__name__}: {err}")
        return EXIT_VALIDATION
    if not rows:
        print("FAIL manifest: EmptyCohort: manifest has no rows")
        return EXIT_VALIDATION

    failures = 0
    checked = 0
    seen: set[str] = set()
    for row in rows:
        subject = row.get("subject_id", "")
        if subject in seen:
            print(f"FAIL {subject}: DuplicateSubjectId: {subject}")
            failures += 1
            continue
        seen.add(subject)
        for role, column in (("pre", "pre_record"), ("post", "post_record")):
            rel = row[column]
            path = config.records / rel
            checked += 1
            try:
                doc = _load_record_file(path)
                rec = parse_face_record(doc)
                if rec.role != role:
                    raise SchemaError(f"expected role {role!r}, file declares {rec.role!r}")
                if doc.get("subject_id") != subject:
                    raise SchemaError(
                        f"record subject_id {doc.get('subject_id')!r} != manifest {subject!r}"
                    )
            except FaceGeomError as err:
                print(f"FAIL {rel}: {type(err).__name__}: {err}")
                failures += 1
            else:
                print(f"OK   {rel}")
    if failures:
        print(f"{failures} of {checked} records failed validation")
        return EXIT_VALIDATION
    print(f"{checked} records valid")
    return EXIT_OK


@dataclass
class SubjectResult:
    pair: SubjectPair
    pre_symmetry: symmetry.SymmetryResult | None = None
    post_symmetry: symmetry.SymmetryResult | None = None
    delta: symmetry.SymmetryDelta | None = None
    pre_features: nasal.NasalFeatureVector | None = None
    post_features: nasal.NasalFeatureVector | None = None
    improvement: nasal.NasalImprovement | None = None
    age: outcomes.AgeDelta | None = None
    category: outcomes.OutcomeCategory | None = None
    error: str | None = None


def _analyze_pair(pair: SubjectPair, config: RunConfig, ideals: nasal.IdealProfile) -> SubjectResult:
    result = SubjectResult(pair=pair)
    try:
        if config.biometric:
            for rec in (pair.pre, pair.post):
                if rec.embedding is None:
                    raise MissingEmbedding(
                        f"record {rec.image_id!r} has no embedding (required by the "
                        "biometric analysis; disable with --no-biometric)"
                    )
        if config.symmetry:
            pre_aligned = align.align_outer_eyes(pair.pre.landmarks)
            post_aligned = align.align_outer_eyes(pair.post.landmarks)
            result.pre_symmetry = symmetry.symmetry_score(pre_aligned)
            result.post_symmetry = symmetry.symmetry_score(post_aligned)
            result.delta = symmetry.symmetry_delta(result.pre_symmetry, result.post_symmetry)
        if config.nasal:
            pre_inner = align.align_inner_eyes(pair.pre.landmarks)
            post_inner = align.align_inner_eyes(pair.post.landmarks)
            result.pre_features = nasal.nasal_features(
                pre_inner, LANDMARKS, config.nose_length_endpoints
            )
            result.post_features = nasal.nasal_features(
                post_inner, LANDMARKS, config.nose_length_endpoints
            )
            result.improvement = nasal.improvement(result.pre_features, result.post_features, ideals)
        if config.outcomes:
            result.age = outcomes.age_delta(pair.pre, pair.post)
            result.category = outcomes.categorize(result.delta.delta, result.age.delta)
    except FaceGeomError as err:
        result.error = f"{type(err).__name__}: {err}"
    return result


def _histogram_rows(pre_values: list[float], post_values: list[float]) -> list[str]:
    pooled = np.array(pre_values + post_values, dtype=np.float64)
    lo = float(pooled.min())
    hi = float(pooled.max())
    if hi == lo:
        hi = lo + 1.0
    edges = np.linspace(lo, hi, HIST_BINS + 1)
    pre_counts, _ = np.histogram(pre_values, bins=edges)
    post_counts, _ = np.histogram(post_values, bins=edges)
    return [
        f"{_fmt(edges[i])},{_fmt(edges[i + 1])},{pre_counts[i]},{post_counts[i]}"
        for i in range(HIST_BINS)
    ]


def cmd_analyze(args: argparse.Namespace) -> int:
    config = _build_run_config(args, need_out=True)
    ideals = nasal.IdealProfile()
    if config.ideal_nlfh is not None:
        ideals = ideals.with_nl_fh(config.ideal_nlfh)

    try:
        cohort = load_cohort(config.manifest, config.records)
    except FaceGeomError as err:
        log.error("cohort failed validation: %s: %s", type(err).__name__, err)
        print(f"validation error: {type(err).__name__}: {err}", file=sys.stderr)
        return EXIT_VALIDATION

    if config.procedure:
        selected = [p for p in cohort.pairs if config.procedure in p.procedure_tags]
        if not selected:
            print(
                f"validation error: EmptyCohort: no subject tagged {config.procedure!r}",
                file=sys.stderr,
            )
            return EXIT_VALIDATION
        cohort = Cohort(pairs=tuple(selected), name=f"{cohort.name}:{config.procedure}")

    if config.jobs > 1:
        with ThreadPoolExecutor(max_workers=config.jobs) as pool:
            results = list(pool.map(lambda p: _analyze_pair(p, config, ideals), cohort.pairs))
    else:
        results = [_analyze_pair(pair, config, ideals) for pair in cohort.pairs]

    failures = [(r.pair.subject_id, r.error) for r in results if r.error]
    if failures and not config.keep_going:
        subject, message = failures[0]
        print(f"analysis error: subject {subject}: {message}", file=sys.stderr)
        return EXIT_ANALYSIS
    for subject, message in failures:
        log.warning("skipping subject %s: %s", subject, message)
    ok_results = [r for r in results if r.error is None]
    if not ok_results:
        print("analysis error: every subject failed", file=sys.stderr)
        return EXIT_ANALYSIS
    ok_cohort = Cohort(pairs=tuple(r.pair for r in ok_results), name=cohort.name)

    scores = None
    if config.biometric:
        try:
            scores = biometric.build_scores(ok_cohort, config.imposter_mode)
        except FaceGeomError as err:
            print(f"analysis error: {type(err).__name__}: {err}", file=sys.stderr)
            return EXIT_ANALYSIS

    nasal_map = {r.pair.subject_id: r.improvement for r in ok_results} if config.nasal else None
    outcome_map = {r.pair.subject_id: r.category for r in ok_results} if config.outcomes else None
    try:
        report = stats.aggregate(
            ok_cohort,
            nasal=nasal_map,
            outcomes=outcome_map,
            scores=scores,
            alpha=config.alpha,
            fmr_target=config.fmr,
        )
    except FaceGeomError as err:
        print(f"analysis error: {type(err).__name__}: {err}", file=sys.stderr)
        return EXIT_ANALYSIS

    out = config.out
    out.mkdir(parents=True, exist_ok=True)

    report_doc = report.to_dict()
    report_doc["config"] = {
        "procedure": config.procedure,
        "alpha": config.alpha,
        "fmr": config.fmr,
        "ideal_nlfh": ideals.nl_fh,
        "nose_length_endpoints": list(config.nose_length_endpoints)
        if config.nose_length_endpoints
        else None,
        "imposter_mode": config.imposter_mode if config.biometric else None,
        "analyses": {
            "symmetry": config.symmetry,
            "nasal": config.nasal,
            "outcomes": config.outcomes,
            "biometric": config.biometric,
        },
    }
    report_doc["failed_subjects"] = [
        {"subject_id": subject, "error": message} for subject, message in failures
    ]
    _write_json(out / "report.json", report_doc)

    if config.symmetry:
        rows = []
        for r in ok_results:
            for rec, res in ((r.pair.pre, r.pre_symmetry), (r.pair.post, r.post_symmetry)):
                rows.append(f"{rec.image_id},{_fmt(res.score)},{res.n_left},{res.n_right}")
        _write_csv(out / "symmetry.csv", "image_id,score,n_left,n_right", rows)

    if config.nasal:
        feature_cols = []
        for f in nasal.ALL_FEATURES:
            feature_cols += [f"{f}_pre", f"{f}_post", f"{f}_improved"]
        header = "subject_id," + ",".join(feature_cols) + ",significant_improved_count,improved_any"
        rows = []
        for r in ok_results:
            cells = [r.pair.subject_id]
            for f in nasal.ALL_FEATURES:
                cells.append(_fmt(r.pre_features.get(f)))
                cells.append(_fmt(r.post_features.get(f)))
                cells.append(str(r.improvement.per_feature[f].improved).lower())
            cells.append(str(r.improvement.significant_improved_count))
            cells.append(str(r.improvement.improved_any).lower())
            rows.append(",".join(cells))
        _write_csv(out / "nasal.csv", header, rows)

        rows = []
        for group in report.overall.per_feature:
            rows.append(
                ",".join(
                    [
                        group.feature,
                        str(group.n),
                        str(group.n_zero_dropped),
                        _fmt(group.improved_rate),
                        "" if group.wilcoxon_p is None else _fmt(group.wilcoxon_p),
                        "" if group.t_test_p is None else _fmt(group.t_test_p),
                        str(group.significant).lower(),
                    ]
                )
            )
        _write_csv(
            out / "per_feature.csv",
            "feature,n,n_zero_dropped,improved_rate,wilcoxon_p,t_test_p,significant",
            rows,
        )

        for f in nasal.RATIO_FEATURES:
            rows = _histogram_rows(
                [r.pre_features.get(f) for r in ok_results],
                [r.post_features.get(f) for r in ok_results],
            )
            _write_csv(out / f"hist_{f}.csv", "bin_left,bin_right,pre_count,post_count", rows)

        _write_csv(
            out / "non_improved.csv",
            "subject_id",
            list(report.overall.non_improved_subjects),
        )

    if config.outcomes:
        rows = [
            f"{r.pair.subject_id},{r.pair.surgeon_id},{_fmt(r.delta.delta)},"
            f"{_fmt(r.age.delta)},{r.category.value}"
            for r in ok_results
        ]
        _write_csv(out / "outcomes.csv", "subject_id,surgeon_id,delta_s,delta_age,category", rows)

    if config.biometric:
        curve = biometric.roc(scores)
        rows = [f"{_fmt(t)},{_fmt(f)},{_fmt(m)}" for t, f, m in curve.rows()]
        _write_csv(out / "roc.csv", "threshold,fmr,tmr", rows)
        _write_json(out / "biometric_summary.json", report.biometric.summary())

    if config.dump_aligned:
        aligned_dir = out / "aligned"
        aligned_dir.mkdir(exist_ok=True)
        for r in ok_results:
            for rec in (r.pair.pre, r.pair.post):
                doc = align.serialize_aligned(
                    align.align_outer_eyes(rec.landmarks),
                    rec.image_id,
                    r.pair.subject_id,
                    rec.role,
                )
                _write_json(aligned_dir / f"{rec.image_id}.json", doc)

    n_done = len(ok_results)
    print(f"analyzed {n_done} of {len(results)} subjects -> {out}")
    return EXIT_OK


def cmd_synth(args: argparse.Namespace) -> int:
    try:
        probs = [float(v) for v in args.improve_probs.split(",")]
        if len(probs) != 3:
            raise ValueError("expected three comma-separated probabilities")
        age_mean, age_sigma = (float(v) for v in args.age_shift.split(","))
        spec = synth.SynthSpec(
            seed=args.seed,
            n_subjects=args.n,
            asymmetry_noise_px=args.noise_px,
            planted_improve_probs=dict(zip(nasal.RATIO_FEATURES, probs)),
            age_shift_mean=age_mean,
            age_shift_sigma=age_sigma,
            embedding_dim=args.embedding_dim,
            genuine_noise=args.genuine_noise,
            n_surgeons=args.n_surgeons,
        )
    except (ValueError, EmptyCohort) as err:
        print(f"config error: {type(err).__name__}: {err}", file=sys.stderr)
        return EXIT_CONFIG
    cohort, truth = synth.generate(spec)
    out = Path(args.out)
    synth.write_cohort(cohort, truth, out)
    print(f"wrote {2 * len(cohort)} records, manifest.csv, ground_truth.json -> {out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="facegeom",
        description="Landmark morphometry for paired pre/post facial photographs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_io(p: argparse.ArgumentParser, need_out: bool) -> None:
        p.add_argument("--manifest", help="cohort manifest CSV")
        p.add_argument("--records", help="directory containing record JSON files")
        if need_out:
            p.add_argument("--out", help="output directory")
        p.add_argument("--config", help="key = value config file; flags take precedence")

    v = sub.add_parser("validate", help="validate every record referenced by the manifest")
    add_io(v, need_out=False)
    v.set_defaults(func=cmd_validate)

    a = sub.add_parser("analyze", help="run the full analysis and write the cohort report")
    add_io(a, need_out=True)
    a.add_argument("--procedure", help="restrict to subjects carrying this procedure tag")
    a.add_argument("--alpha", type=float, default=None, help="significance level (default 0.001)")
    a.add_argument("--fmr", type=float, default=None, help="target false-match rate (default 1e-4)")
    a.add_argument("--ideal-nlfh", type=float, default=None, dest="ideal_nlfh",
                   help="override the nose-length/face-height ideal (default 1/3)")
    a.add_argument("--nose-length-endpoints", default=None, dest="nose_length_endpoints",
                   metavar="TOP,BOTTOM", help="landmark indices for the nose-length segment")
    a.add_argument("--keep-going", action="store_const", const=True, default=None,
                   dest="keep_going", help="continue past per-subject failures")
    for name in ("symmetry", "nasal", "outcomes", "biometric"):
        a.add_argument(f"--no-{name}", action="store_const", const=False, default=None,
                       dest=name, help=f"disable the {name} analysis")
    a.add_argument("--imposter-mode", choices=biometric.IMPOSTER_MODES, default=None,
                   dest="imposter_mode", help="imposter pairing protocol (default pre-post)")
    a.add_argument("--dump-aligned", action="store_const", const=True, default=None,
                   dest="dump_aligned", help="write aligned landmark JSON per image")
    a.add_argument("--jobs", type=int, default=None, help="worker threads (default 1)")
    a.set_defaults(func=cmd_analyze)

    s = sub.add_parser("synth", help="generate a deterministic fixture cohort")
    s.add_argument("--out", required=True, help="output directory")
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--n", type=int, required=True, help="number of subjects")
    s.add_argument("--noise-px", type=float, default=0.0, dest="noise_px",
                   help="one-sided landmark jitter sigma in px")
    s.add_argument("--improve-probs", default="0.5,0.5,0.5", dest="improve_probs",
                   metavar="P1,P2,P3", help="planted improvement probabilities (aw_ic,aw_fw,nl_fh)")
    s.add_argument("--age-shift", default="-2.0,0.0", dest="age_shift", metavar="MEAN,SIGMA",
                   help="apparent-age shift distribution")
    s.add_argument("--embedding-dim", type=int, default=64, dest="embedding_dim")
    s.add_argument("--genuine-noise", type=float, default=0.0, dest="genuine_noise",
                   help="post-embedding perturbation sigma")
    s.add_argument("--n-surgeons", type=int, default=6, dest="n_surgeons")
    s.set_defaults(func=cmd_synth)
    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=os.environ.get("FACEGEOM_LOG_LEVEL", "WARNING").upper())
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
