/** Synthetic PNG fixtures: flat background with elliptical "face" regions. */

import { Image, encodePng } from "../src/png";

export interface Ellipse {
  cx: number;
  cy: number;
  rx: number;
  ry: number;
  gray: number;
}

export function renderImage(
  width: number,
  height: number,
  faces: Ellipse[],
  background = 235,
): Buffer {
  const data = Buffer.alloc(width * height * 3, background);
  for (const face of faces) {
    for (let y = Math.max(0, face.cy - face.ry); y <= Math.min(height - 1, face.cy + face.ry); y++) {
      for (let x = Math.max(0, face.cx - face.rx); x <= Math.min(width - 1, face.cx + face.rx); x++) {
        const dx = (x - face.cx) / face.rx;
        const dy = (y - face.cy) / face.ry;
        if (dx * dx + dy * dy <= 1.0) {
          const base = (y * width + x) * 3;
          data[base] = face.gray;
          data[base + 1] = face.gray;
          data[base + 2] = face.gray;
        }
      }
    }
  }
  const image: Image = { width, height, channels: 3, data };
  return encodePng(image);
}

export function singleFace(seed: number, size = 256): Buffer {
  const gray = 120 + (seed * 13) % 80;
  return renderImage(size, size, [
    {
      cx: (size >> 1) + (seed % 11) - 5,
      cy: (size >> 1) + (seed % 7) - 3,
      rx: 60 + (seed % 20),
      ry: 75 + (seed % 16),
      gray,
    },
  ]);
}

export function blankImage(size = 256): Buffer {
  return renderImage(size, size, []);
}

export function twoFaces(size = 256): Buffer {
  return renderImage(size, size, [
    { cx: 64, cy: 128, rx: 40, ry: 50, gray: 120 },
    { cx: 192, cy: 128, rx: 40, ry: 50, gray: 140 },
  ]);
}
