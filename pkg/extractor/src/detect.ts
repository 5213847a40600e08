/**
 * Geometric face-region detector for the synthetic backend: estimate the
 * background level from the image border, threshold the deviation, and label
 * connected components. Zero components is "no face", two or more is
 * "multiple faces" (composite before/after panels must be split upstream).
 */

import { Image, luminance } from "./png";
import { Box } from "./template";

const THRESHOLD = 16;

function borderMedian(image: Image): number {
  const values: number[] = [];
  const { width, height } = image;
  for (let x = 0; x < width; x++) {
    values.push(luminance(image, x, 0), luminance(image, x, height - 1));
  }
  for (let y = 1; y < height - 1; y++) {
    values.push(luminance(image, 0, y), luminance(image, width - 1, y));
  }
  values.sort((a, b) => a - b);
  return values[values.length >> 1];
}

export function detectFaceBoxes(image: Image): Box[] {
  const { width, height } = image;
  const background = borderMedian(image);
  const mask = new Uint8Array(width * height);
  for (let y = 0; y < height; y++) {
    for (let x = 0; x < width; x++) {
      if (Math.abs(luminance(image, x, y) - background) > THRESHOLD) {
        mask[y * width + x] = 1;
      }
    }
  }

  const labels = new Int32Array(width * height).fill(-1);
  const minArea = Math.max(64, Math.floor(width * height * 0.005));
  const boxes: Box[] = [];
  const stack: number[] = [];
  let nextLabel = 0;
  for (let start = 0; start < mask.length; start++) {
    if (!mask[start] || labels[start] !== -1) continue;
    let minX = width;
    let maxX = -1;
    let minY = height;
    let maxY = -1;
    let area = 0;
    stack.push(start);
    labels[start] = nextLabel;
    while (stack.length) {
      const p = stack.pop()!;
      const px = p % width;
      const py = (p / width) | 0;
      area++;
      if (px < minX) minX = px;
      if (px > maxX) maxX = px;
      if (py < minY) minY = py;
      if (py > maxY) maxY = py;
      const neighbors = [p - 1, p + 1, p - width, p + width];
      for (const q of neighbors) {
        if (q < 0 || q >= mask.length) continue;
        if (q === p - 1 && px === 0) continue;
        if (q === p + 1 && px === width - 1) continue;
        if (mask[q] && labels[q] === -1) {
          labels[q] = nextLabel;
          stack.push(q);
        }
      }
    }
    nextLabel++;
    if (area >= minArea) {
      boxes.push({ x: minX, y: minY, width: maxX - minX + 1, height: maxY - minY + 1 });
    }
  }
  boxes.sort((a, b) => a.x - b.x || a.y - b.y);
  return boxes;
}

/** Mean luminance inside a box, for the synthetic age estimate. */
export function meanLuminance(image: Image, box: Box): number {
  let total = 0;
  let count = 0;
  for (let y = box.y; y < box.y + box.height; y++) {
    for (let x = box.x; x < box.x + box.width; x++) {
      total += luminance(image, x, y);
      count++;
    }
  }
  return count ? total / count : 0;
}
