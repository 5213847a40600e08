/**
 * Round trip against the primary toolkit: every record this adapter emits for
 * a 10-image set must pass `facegeom validate` with exit 0, and the output
 * directory must be analyzable as-is.
 */

import * as assert from "node:assert/strict";
import { spawnSync } from "node:child_process";
import * as fs from "node:fs";
import * as os from "node:os";
import * as path from "node:path";
import { test } from "node:test";

import { SyntheticBackend } from "../src/backends";
import { parseJobManifest, runJob } from "../src/extract";
import { singleFace } from "./helpers";

const PYTHON = process.env.FACEGEOM_PY ?? "python3";

function primaryAvailable(): boolean {
  const probe = spawnSync(PYTHON, ["-c", "import facegeom"], { encoding: "utf-8" });
  return probe.status === 0;
}

async function extractTenImages(): Promise<string> {
  const dir = fs.mkdtempSync(path.join(os.tmpdir(), "fgx-rt-"));
  const images = path.join(dir, "images");
  fs.mkdirSync(images);
  const lines = ["subject_id,surgeon_id,procedure_tags,pre_image,post_image"];
  for (let i = 0; i < 5; i++) {
    const sid = `subj${i}`;
    fs.writeFileSync(path.join(images, `${sid}_pre.png`), singleFace(40 + 2 * i));
    fs.writeFileSync(path.join(images, `${sid}_post.png`), singleFace(41 + 2 * i));
    lines.push(`${sid},doc${i % 2},rhinoplasty,${sid}_pre.png,${sid}_post.png`);
  }
  fs.writeFileSync(path.join(dir, "job.csv"), lines.join("\n") + "\n");
  const rows = parseJobManifest(fs.readFileSync(path.join(dir, "job.csv"), "utf-8"));
  const out = path.join(dir, "out");
  const result = await runJob(rows, images, out, new SyntheticBackend());
  assert.equal(result.recordsWritten, 10);
  assert.equal(result.skipped.length, 0);
  return out;
}

test("ten-image set passes primary validation with exit 0", { skip: !primaryAvailable() }, async () => {
  const out = await extractTenImages();
  const proc = spawnSync(
    PYTHON,
    ["-m", "facegeom", "validate", "--manifest", path.join(out, "manifest.csv"),
     "--records", path.join(out, "records")],
    { encoding: "utf-8" },
  );
  assert.equal(proc.status, 0, proc.stdout + proc.stderr);
  assert.match(proc.stdout, /10 records valid/);
});

test("extracted cohort is analyzable by the primary", { skip: !primaryAvailable() }, async () => {
  const out = await extractTenImages();
  const results = path.join(out, "analysis");
  const proc = spawnSync(
    PYTHON,
    ["-m", "facegeom", "analyze", "--manifest", path.join(out, "manifest.csv"),
     "--records", path.join(out, "records"), "--out", results],
    { encoding: "utf-8" },
  );
  assert.equal(proc.status, 0, proc.stdout + proc.stderr);
  const report = JSON.parse(fs.readFileSync(path.join(results, "report.json"), "utf-8"));
  assert.equal(report.n, 5);
  assert.ok(report.biometric.tmr >= 0);
});
