// Export/import of the current view: a JSON sidecar matching the CLI's
// schema plus the rendered overlay PNG.

import type { SegmentResponse } from "./api.js";
import type { ExplorerState } from "./state.js";

export const SIDECAR_SCHEMA_VERSION = 1;

export interface Sidecar {
  schema_version: number;
  image: string;
  prompts: string[];
  coverage_percent: Record<string, number>;
  config: {
    gamma: number;
    delta: number;
    background: boolean;
    template_set: string;
    baseline_maskclip: boolean;
    use_teacher: boolean;
  };
}

export function buildSidecar(
  state: ExplorerState,
  response: SegmentResponse,
  templateSet: string = "imagenet80",
): Sidecar {
  return {
    schema_version: SIDECAR_SCHEMA_VERSION,
    image: state.imageName ?? "session",
    prompts: response.prompts,
    coverage_percent: response.coverage_percent,
    config: {
      gamma: response.config.gamma,
      delta: response.config.delta,
      background: response.config.background,
      template_set: templateSet,
      baseline_maskclip: false,
      use_teacher: false,
    },
  };
}

/** Settings recovered from a sidecar; restores sliders and prompts. */
export function parseSidecar(json: string): {
  prompts: string[];
  gamma: number;
  delta: number;
  background: boolean;
} {
  const data = JSON.parse(json);
  if (data.schema_version !== SIDECAR_SCHEMA_VERSION) {
    throw new Error(`unsupported sidecar schema_version ${data.schema_version}`);
  }
  if (!Array.isArray(data.prompts) || typeof data.config !== "object") {
    throw new Error("sidecar is missing prompts or config");
  }
  return {
    prompts: data.prompts.map(String),
    gamma: Number(data.config.gamma),
    delta: Number(data.config.delta),
    background: Boolean(data.config.background),
  };
}
