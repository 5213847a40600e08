/** Record-JSON and cohort-manifest emission, matching the facegeom schema. */

import { Extraction } from "./backends";

export const SCHEMA_VERSION = 1;

export interface RecordDoc {
  schema_version: number;
  image_id: string;
  subject_id: string;
  role: "pre" | "post";
  width: number;
  height: number;
  coord_mode: "pixel";
  landmarks: Array<[number, number]>;
  apparent_age: number;
  embedding: number[];
}

export function toRecord(
  extraction: Extraction,
  imageId: string,
  subjectId: string,
  role: "pre" | "post",
): RecordDoc {
  return {
    schema_version: SCHEMA_VERSION,
    image_id: imageId,
    subject_id: subjectId,
    role,
    width: extraction.width,
    height: extraction.height,
    coord_mode: "pixel",
    landmarks: extraction.landmarks,
    apparent_age: extraction.apparentAge,
    embedding: extraction.embedding,
  };
}

export interface ManifestRow {
  subjectId: string;
  surgeonId: string;
  procedureTags: string[];
  preRecord: string;
  postRecord: string;
}

export function manifestCsv(rows: ManifestRow[]): string {
  const lines = ["subject_id,surgeon_id,procedure_tags,pre_record,post_record"];
  for (const row of rows) {
    lines.push(
      [row.subjectId, row.surgeonId, row.procedureTags.join(";"), row.preRecord, row.postRecord].join(","),
    );
  }
  return lines.join("\n") + "\n";
}
