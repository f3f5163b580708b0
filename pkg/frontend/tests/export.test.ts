import { describe, expect, it } from "vitest";

import type { SegmentResponse } from "../src/api.js";
import { buildSidecar, parseSidecar } from "../src/export.js";
import { addPrompt, initialState, withSession } from "../src/state.js";

const response: SegmentResponse = {
  session_id: "s",
  prompts: ["cat", "background"],
  background_added: false,
  background_index: 1,
  grid: { n_rows: 2, n_cols: 2, n: 4 },
  labels_rle: [[0, 2], [1, 2]],
  length: 4,
  coverage_percent: { cat: 50, background: 50 },
  scores_summary: { cat: { mean: 0.2, max: 0.5 }, background: { mean: 0.1, max: 0.2 } },
  palette: ["#aa0000", "#000000"],
  overlay_png_base64: "",
  config: { gamma: 0.3, delta: 0.9, background: true, config_hash: "h" },
};

describe("sidecar export", () => {
  it("matches the CLI sidecar schema fields", () => {
    let state = initialState("http://x");
    state = withSession(state, { session_id: "s", grid: response.grid, timing_ms: 1 }, "pic.png");
    state = addPrompt(addPrompt(state, "cat"), "background");
    const sidecar = buildSidecar(state, response);
    expect(Object.keys(sidecar).sort()).toEqual([
      "config",
      "coverage_percent",
      "image",
      "prompts",
      "schema_version",
    ]);
    expect(Object.keys(sidecar.config).sort()).toEqual([
      "background",
      "baseline_maskclip",
      "delta",
      "gamma",
      "template_set",
      "use_teacher",
    ]);
    expect(sidecar.schema_version).toBe(1);
    expect(sidecar.image).toBe("pic.png");
    expect(sidecar.config.gamma).toBe(0.3);
  });

  it("round-trips through parseSidecar to restore sliders", () => {
    let state = initialState("http://x");
    state = withSession(state, { session_id: "s", grid: response.grid, timing_ms: 1 }, "pic.png");
    const restored = parseSidecar(JSON.stringify(buildSidecar(state, response)));
    expect(restored).toEqual({
      prompts: ["cat", "background"],
      gamma: 0.3,
      delta: 0.9,
      background: true,
    });
  });

  it("rejects unknown schema versions", () => {
    expect(() => parseSidecar(JSON.stringify({ schema_version: 9 }))).toThrow(/schema_version/);
  });

  it("rejects malformed payloads", () => {
    expect(() =>
      parseSidecar(JSON.stringify({ schema_version: 1, config: {} })),
    ).toThrow(/prompts/);
  });
});
