import { describe, expect, it } from "vitest";

import { composeOverlay, coverageRows, nearestIndex } from "../src/overlay.js";
import { decodeRle } from "../src/rle.js";

describe("decodeRle", () => {
  it("expands runs in order", () => {
    expect(Array.from(decodeRle([[2, 3], [0, 1], [2, 2]], 6))).toEqual([2, 2, 2, 0, 2, 2]);
  });

  it("validates the expected length", () => {
    expect(() => decodeRle([[1, 4]], 5)).toThrow(/expected 5/);
  });

  it("handles empty payloads", () => {
    expect(decodeRle([], 0).length).toBe(0);
  });
});

describe("nearestIndex", () => {
  it("is the identity at equal sizes", () => {
    expect(Array.from(nearestIndex(5, 5))).toEqual([0, 1, 2, 3, 4]);
  });

  it("expands each cell into equal spans for integer upscaling", () => {
    expect(Array.from(nearestIndex(8, 2))).toEqual([0, 0, 0, 0, 1, 1, 1, 1]);
  });

  it("clamps to valid cells", () => {
    const idx = Array.from(nearestIndex(7, 3));
    expect(Math.min(...idx)).toBe(0);
    expect(Math.max(...idx)).toBe(2);
  });
});

describe("composeOverlay", () => {
  const colors = [
    { r: 255, g: 0, b: 0 },
    { r: 0, g: 255, b: 0 },
  ];

  it("paints each patch cell as one solid block", () => {
    const labels = decodeRle([[0, 1], [1, 1], [1, 1], [0, 1]], 4); // 2x2 checker
    const data = composeOverlay(labels, 2, 2, colors, {
      width: 4,
      height: 4,
      opacity: 1,
    });
    const px = (x: number, y: number) => Array.from(data.slice((y * 4 + x) * 4, (y * 4 + x) * 4 + 4));
    expect(px(0, 0)).toEqual([255, 0, 0, 255]);
    expect(px(3, 0)).toEqual([0, 255, 0, 255]);
    expect(px(0, 3)).toEqual([0, 255, 0, 255]);
    expect(px(3, 3)).toEqual([255, 0, 0, 255]);
  });

  it("applies opacity and background transparency", () => {
    const labels = decodeRle([[0, 2], [1, 2]], 4);
    const data = composeOverlay(labels, 2, 2, colors, {
      width: 2,
      height: 2,
      opacity: 0.5,
      transparentLabel: 1,
    });
    expect(data[3]).toBe(128); // label 0: half opacity
    expect(data[2 * 4 + 3]).toBe(0); // label 1: transparent
  });

  it("rejects mismatched label lengths", () => {
    expect(() =>
      composeOverlay(new Int32Array(3), 2, 2, colors, { width: 2, height: 2, opacity: 1 }),
    ).toThrow(/grid/);
  });
});

describe("coverageRows", () => {
  it("orders rows by the prompt list and fills gaps with zero", () => {
    const rows = coverageRows(["cat", "dog"], { dog: 40.5 });
    expect(rows).toEqual([
      { prompt: "cat", percent: 0 },
      { prompt: "dog", percent: 40.5 },
    ]);
  });
});
