// Patch-label overlay compositing.
//
// The default rendering is deliberately blocky (nearest-neighbor patch
// expansion): it shows the method's native patch granularity instead of
// implying pixel precision.

import type { Rgb } from "./colors.js";

/** Nearest source cell per output pixel, half-pixel centers, edges clamped. */
export function nearestIndex(outSize: number, srcSize: number): Int32Array {
  const out = new Int32Array(outSize);
  for (let i = 0; i < outSize; i++) {
    const src = ((i + 0.5) * srcSize) / outSize - 0.5;
    out[i] = Math.min(srcSize - 1, Math.max(0, Math.round(src)));
  }
  return out;
}

export interface OverlayOptions {
  width: number;
  height: number;
  opacity: number; // 0..1
  transparentLabel?: number | null;
}

/** RGBA pixel buffer (length width*height*4) of the expanded label map. */
export function composeOverlay(
  labels: Int32Array,
  rows: number,
  cols: number,
  colors: Rgb[],
  options: OverlayOptions,
): Uint8ClampedArray<ArrayBuffer> {
  const { width, height, opacity } = options;
  const transparent = options.transparentLabel ?? null;
  if (labels.length !== rows * cols) {
    throw new Error(`label vector length ${labels.length} != grid ${rows}x${cols}`);
  }
  const alpha = Math.round(Math.min(1, Math.max(0, opacity)) * 255);
  const ry = nearestIndex(height, rows);
  const rx = nearestIndex(width, cols);
  const out = new Uint8ClampedArray(new ArrayBuffer(width * height * 4));
  for (let y = 0; y < height; y++) {
    const rowBase = ry[y] * cols;
    for (let x = 0; x < width; x++) {
      const label = labels[rowBase + rx[x]];
      const color = colors[label];
      if (!color) throw new Error(`label ${label} has no color`);
      const o = (y * width + x) * 4;
      out[o] = color.r;
      out[o + 1] = color.g;
      out[o + 2] = color.b;
      out[o + 3] = label === transparent ? 0 : alpha;
    }
  }
  return out;
}

/** Coverage entries ordered by the prompt list, formatted for display. */
export function coverageRows(
  prompts: string[],
  coverage: Record<string, number>,
): { prompt: string; percent: number }[] {
  return prompts.map((prompt) => ({ prompt, percent: coverage[prompt] ?? 0 }));
}
