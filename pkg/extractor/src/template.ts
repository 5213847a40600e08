/**
 * Canonical 468-point landmark layout in unit coordinates, mirror-symmetric
 * about u = 0.5. Fitted into a detected face box to produce pixel landmarks.
 */

export const N_LANDMARKS = 468;

// named indices of the 468-point face-mesh convention
export const INDEX = {
  OUTER_EYE_L: 33,
  OUTER_EYE_R: 263,
  NOSE_TIP: 1,
  NOSTRIL_L: 98,
  NOSTRIL_R: 327,
  INNER_EYE_L: 133,
  INNER_EYE_R: 362,
  CHEEK_L: 234,
  CHEEK_R: 454,
  CHIN: 152,
  FOREHEAD: 10,
  GLABELLA: 168,
} as const;

const NAMED_UNIT: Array<[number, number, number]> = [
  [INDEX.OUTER_EYE_L, 156 / 512, 216 / 512],
  [INDEX.OUTER_EYE_R, 356 / 512, 216 / 512],
  [INDEX.INNER_EYE_L, 216 / 512, 218 / 512],
  [INDEX.INNER_EYE_R, 296 / 512, 218 / 512],
  [INDEX.NOSE_TIP, 0.5, 300 / 512],
  [INDEX.NOSTRIL_L, 219 / 512, 308 / 512],
  [INDEX.NOSTRIL_R, 293 / 512, 308 / 512],
  [INDEX.CHEEK_L, 76 / 512, 260 / 512],
  [INDEX.CHEEK_R, 436 / 512, 260 / 512],
  [INDEX.FOREHEAD, 0.5, 60 / 512],
  [INDEX.CHIN, 0.5, 460 / 512],
  [INDEX.GLABELLA, 0.5, 210 / 512],
];

let cached: Float64Array | null = null;

/** Unit-square template, (u, v) interleaved per landmark. */
export function unitTemplate(): Float64Array {
  if (cached) return cached;
  const pts = new Float64Array(N_LANDMARKS * 2);
  const used = new Set<number>();
  for (const [index, u, v] of NAMED_UNIT) {
    pts[2 * index] = u;
    pts[2 * index + 1] = v;
    used.add(index);
  }
  const unused: number[] = [];
  for (let i = 0; i < N_LANDMARKS; i++) {
    if (!used.has(i)) unused.push(i);
  }
  // R2 low-discrepancy filler, mirrored in pairs about u = 0.5
  const g = 1.32471795724474602596;
  const a1 = 1 / g;
  const a2 = 1 / (g * g);
  for (let k = 0; k < unused.length / 2; k++) {
    const s = (0.5 + a1 * (k + 1)) % 1.0;
    const t = (0.5 + a2 * (k + 1)) % 1.0;
    const ul = 0.5 - (20 + 216 * s) / 512;
    const v = (40 + 432 * t) / 512;
    pts[2 * unused[2 * k]] = ul;
    pts[2 * unused[2 * k] + 1] = v;
    pts[2 * unused[2 * k + 1]] = 1.0 - ul;
    pts[2 * unused[2 * k + 1] + 1] = v;
  }
  cached = pts;
  return pts;
}

export interface Box {
  x: number;
  y: number;
  width: number;
  height: number;
}

/** Map the unit template into a face box; returns 468 [x, y] pixel pairs. */
export function fitTemplate(box: Box): Array<[number, number]> {
  const unit = unitTemplate();
  const out: Array<[number, number]> = [];
  for (let i = 0; i < N_LANDMARKS; i++) {
    out.push([box.x + unit[2 * i] * box.width, box.y + unit[2 * i + 1] * box.height]);
  }
  return out;
}
