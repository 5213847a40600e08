#!/usr/bin/env node
/**
 * CLI: facegeom-extract --images <dir> --manifest <csv> --out <dir>
 *                       [--backend synthetic|mediapipe]
 *
 * Emits facegeom record JSON plus a cohort manifest; the output directory is
 * directly consumable by `facegeom validate` / `facegeom analyze`.
 * Exit codes: 0 at least one subject extracted, 1 nothing extracted,
 * 2 bad usage.
 */

import * as fs from "node:fs";

import { createBackend } from "./backends";
import { parseJobManifest, runJob } from "./extract";

interface Args {
  images: string;
  manifest: string;
  out: string;
  backend: string;
}

function parseArgs(argv: string[]): Args {
  const values: Record<string, string> = { backend: "synthetic" };
  for (let i = 0; i < argv.length; i++) {
    const arg = argv[i];
    if (!arg.startsWith("--")) throw new Error(`unexpected argument ${arg}`);
    const key = arg.slice(2);
    if (!["images", "manifest", "out", "backend"].includes(key)) {
      throw new Error(`unknown flag --${key}`);
    }
    const value = argv[++i];
    if (value === undefined) throw new Error(`--${key} needs a value`);
    values[key] = value;
  }
  for (const required of ["images", "manifest", "out"]) {
    if (!(required in values)) throw new Error(`missing required flag --${required}`);
  }
  return values as unknown as Args;
}

export async function main(argv: string[]): Promise<number> {
  let args: Args;
  try {
    args = parseArgs(argv);
    if (!fs.existsSync(args.images)) throw new Error(`image directory not found: ${args.images}`);
    if (!fs.existsSync(args.manifest)) throw new Error(`manifest not found: ${args.manifest}`);
  } catch (err) {
    console.error(`usage error: ${err instanceof Error ? err.message : err}`);
    return 2;
  }

  try {
    const rows = parseJobManifest(fs.readFileSync(args.manifest, "utf-8"));
    const backend = createBackend(args.backend);
    const result = await runJob(rows, args.images, args.out, backend, (line) =>
      console.error(line),
    );
    console.log(
      `extracted ${result.recordsWritten} records for ${result.subjects} subjects ` +
        `(${result.skipped.length} images skipped) -> ${args.out}`,
    );
    return result.subjects > 0 ? 0 : 1;
  } catch (err) {
    console.error(`extraction error: ${err instanceof Error ? err.message : err}`);
    return 1;
  }
}

if (require.main === module) {
  main(process.argv.slice(2)).then((code) => {
    process.exitCode = code;
  });
}
