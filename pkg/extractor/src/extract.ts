/**
 * Batch extraction: read the image manifest, run the landmark backend on each
 * pre/post image, and write facegeom record JSON plus a cohort manifest for
 * every subject whose pair fully extracted. Per-image failures are logged and
 * skipped; the affected subject is dropped from the output manifest.
 */

import * as fs from "node:fs";
import * as path from "node:path";

import { ExtractionError, LandmarkBackend } from "./backends";
import { ManifestRow, manifestCsv, toRecord } from "./records";

export interface JobRow {
  subjectId: string;
  surgeonId: string;
  procedureTags: string[];
  preImage: string;
  postImage: string;
}

export interface JobLogEntry {
  image: string;
  error: string;
  message: string;
}

export interface JobResult {
  subjects: number;
  recordsWritten: number;
  skipped: JobLogEntry[];
}

const REQUIRED_COLUMNS = ["subject_id", "surgeon_id", "procedure_tags", "pre_image", "post_image"];

export function parseJobManifest(csv: string): JobRow[] {
  const lines = csv.split(/\r?\n/).filter((line) => line.trim().length > 0);
  if (lines.length === 0) throw new Error("image manifest is empty");
  const header = lines[0].split(",").map((c) => c.trim());
  for (const column of REQUIRED_COLUMNS) {
    if (!header.includes(column)) {
      throw new Error(`image manifest missing column ${column}`);
    }
  }
  const col = (name: string) => header.indexOf(name);
  const rows: JobRow[] = [];
  const seen = new Set<string>();
  for (const line of lines.slice(1)) {
    const cells = line.split(",");
    const subjectId = cells[col("subject_id")].trim();
    if (seen.has(subjectId)) throw new Error(`duplicate subject_id ${subjectId}`);
    seen.add(subjectId);
    rows.push({
      subjectId,
      surgeonId: cells[col("surgeon_id")].trim(),
      procedureTags: cells[col("procedure_tags")].split(";").map((t) => t.trim()).filter(Boolean),
      preImage: cells[col("pre_image")].trim(),
      postImage: cells[col("post_image")].trim(),
    });
  }
  return rows;
}

export async function runJob(
  rows: JobRow[],
  imagesDir: string,
  outDir: string,
  backend: LandmarkBackend,
  log: (line: string) => void = () => {},
): Promise<JobResult> {
  const recordsDir = path.join(outDir, "records");
  fs.mkdirSync(recordsDir, { recursive: true });

  const manifestRows: ManifestRow[] = [];
  const skipped: JobLogEntry[] = [];
  let written = 0;

  for (const row of rows) {
    const outputs: { fileName: string; doc: object }[] = [];
    let failed = false;
    for (const [role, imageName] of [["pre", row.preImage], ["post", row.postImage]] as const) {
      const imagePath = path.join(imagesDir, imageName);
      const imageId = path.basename(imageName, path.extname(imageName));
      try {
        const file = fs.readFileSync(imagePath);
        const extraction = await backend.extract(file, imageName);
        outputs.push({
          fileName: `${imageId}.json`,
          doc: toRecord(extraction, imageId, row.subjectId, role),
        });
      } catch (err) {
        const kind = err instanceof ExtractionError ? err.kind : "ReadFailure";
        const message = err instanceof Error ? err.message : String(err);
        skipped.push({ image: imageName, error: kind, message });
        log(`skip ${imageName}: ${kind}: ${message}`);
        failed = true;
      }
    }
    if (failed) continue;
    for (const { fileName, doc } of outputs) {
      fs.writeFileSync(path.join(recordsDir, fileName), JSON.stringify(doc));
      written++;
    }
    manifestRows.push({
      subjectId: row.subjectId,
      surgeonId: row.surgeonId,
      procedureTags: row.procedureTags,
      preRecord: outputs[0].fileName,
      postRecord: outputs[1].fileName,
    });
  }

  fs.writeFileSync(path.join(outDir, "manifest.csv"), manifestCsv(manifestRows));
  return { subjects: manifestRows.length, recordsWritten: written, skipped };
}
