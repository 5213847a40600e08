/**
 * Landmark/age/embedding backends behind one interface.
 *
 * "synthetic" is fully deterministic and dependency-free: it detects the face
 * region geometrically, fits the canonical landmark layout into it, derives
 * the apparent age from face brightness and the embedding from a content
 * hash. It exists so the batch pipeline, the record schema, and every error
 * path can be exercised without model weights.
 *
 * "mediapipe" wires a real face-mesh runtime when its optional dependency is
 * installed; otherwise every image reports ModelLoadFailure and is skipped.
 */

import { detectFaceBoxes, meanLuminance } from "./detect";
import { Image, decodePng } from "./png";
import { SplitMix64, fnv1a64 } from "./rng";
import { fitTemplate } from "./template";

export const EMBEDDING_DIM = 64;

export class ExtractionError extends Error {
  constructor(public readonly kind: "NoFaceDetected" | "MultipleFaces" | "ModelLoadFailure",
              message: string) {
    super(message);
    this.name = kind;
  }
}

export interface Extraction {
  width: number;
  height: number;
  landmarks: Array<[number, number]>;
  apparentAge: number;
  embedding: number[];
}

export interface LandmarkBackend {
  readonly name: string;
  extract(file: Buffer, label: string): Promise<Extraction>;
}

function faceEmbedding(image: Image, boxBytes: Buffer): number[] {
  const rng = new SplitMix64(fnv1a64(boxBytes));
  const vector: number[] = [];
  let norm2 = 0;
  for (let i = 0; i < EMBEDDING_DIM; i++) {
    const v = rng.normal();
    vector.push(v);
    norm2 += v * v;
  }
  const norm = Math.sqrt(norm2) || 1;
  return vector.map((v) => v / norm);
}

export class SyntheticBackend implements LandmarkBackend {
  readonly name = "synthetic";

  async extract(file: Buffer, label: string): Promise<Extraction> {
    const image = decodePng(file);
    const boxes = detectFaceBoxes(image);
    if (boxes.length === 0) {
      throw new ExtractionError("NoFaceDetected", `${label}: no face region found`);
    }
    if (boxes.length > 1) {
      throw new ExtractionError(
        "MultipleFaces",
        `${label}: ${boxes.length} face regions; split composite panels upstream`,
      );
    }
    const box = boxes[0];
    const landmarks = fitTemplate(box);
    // brightness stands in for the age model: darker faces read older
    const apparentAge = 20 + 40 * (1 - meanLuminance(image, box) / 255);
    const stride = image.width * image.channels;
    const regionRows: Buffer[] = [];
    for (let y = box.y; y < box.y + box.height; y++) {
      regionRows.push(
        image.data.subarray(y * stride + box.x * image.channels,
                            y * stride + (box.x + box.width) * image.channels),
      );
    }
    const embedding = faceEmbedding(image, Buffer.concat(regionRows));
    return { width: image.width, height: image.height, landmarks, apparentAge, embedding };
  }
}

export class MediapipeBackend implements LandmarkBackend {
  readonly name = "mediapipe";
  private runtime: unknown | null = null;
  private loadError: string | null = null;

  private async load(): Promise<void> {
    if (this.runtime || this.loadError) return;
    try {
      // optional dependency; resolved dynamically so the package installs without it
      this.runtime = await import("@mediapipe/tasks-vision" as string);
    } catch (err) {
      this.loadError = err instanceof Error ? err.message : String(err);
    }
  }

  async extract(file: Buffer, label: string): Promise<Extraction> {
    await this.load();
    if (!this.runtime) {
      throw new ExtractionError(
        "ModelLoadFailure",
        `${label}: mediapipe runtime unavailable (${this.loadError}); ` +
          "install @mediapipe/tasks-vision or use --backend synthetic",
      );
    }
    // the hosted runtime targets browser/wasm environments; server-side
    // inference is not wired up yet
    throw new ExtractionError(
      "ModelLoadFailure",
      `${label}: mediapipe backend has no server-side inference path`,
    );
  }
}

export function createBackend(name: string): LandmarkBackend {
  switch (name) {
    case "synthetic":
      return new SyntheticBackend();
    case "mediapipe":
      return new MediapipeBackend();
    default:
      throw new Error(`unknown backend ${name} (expected synthetic or mediapipe)`);
  }
}
