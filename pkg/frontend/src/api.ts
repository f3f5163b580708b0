// Typed client for the segmentation service's /v1 JSON API.

export interface GridInfo {
  n_rows: number;
  n_cols: number;
  patch_size?: number;
  n: number;
}

export interface SessionInfo {
  session_id: string;
  grid: GridInfo;
  timing_ms: number;
}

export interface SegmentRequestBody {
  prompts: string[];
  gamma?: number;
  delta?: number;
  background?: boolean;
}

export interface SegmentResponse {
  session_id: string;
  prompts: string[];
  background_added: boolean;
  background_index: number | null;
  grid: GridInfo;
  labels_rle: [number, number][];
  length: number;
  coverage_percent: Record<string, number>;
  scores_summary: Record<string, { mean: number; max: number }>;
  palette: string[];
  overlay_png_base64: string;
  config: { gamma: number; delta: number; background: boolean; config_hash: string };
}

export interface HealthInfo {
  status: string;
  backbone_id: string;
  checkpoint_id: string;
  config_hash: string;
  backbone_passes: number;
  sessions: number;
}

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

async function raiseForStatus(response: Response): Promise<void> {
  if (response.ok) return;
  let detail = response.statusText;
  try {
    const body = await response.json();
    if (body && typeof body.detail === "string") detail = body.detail;
  } catch {
    // non-JSON error body: keep the status text
  }
  throw new ApiError(response.status, detail);
}

export async function fetchHealth(baseUrl: string): Promise<HealthInfo> {
  const response = await fetch(`${baseUrl}/v1/health`);
  await raiseForStatus(response);
  return response.json();
}

export async function createSession(baseUrl: string, image: Blob): Promise<SessionInfo> {
  const response = await fetch(`${baseUrl}/v1/sessions`, {
    method: "POST",
    body: image,
  });
  await raiseForStatus(response);
  return response.json();
}

export async function segmentSession(
  baseUrl: string,
  sessionId: string,
  body: SegmentRequestBody,
  signal?: AbortSignal,
): Promise<SegmentResponse> {
  const response = await fetch(`${baseUrl}/v1/sessions/${sessionId}/segment`, {
    method: "POST",
    headers: { "Content-Type": "application/json" },
    body: JSON.stringify(body),
    signal,
  });
  await raiseForStatus(response);
  return response.json();
}
