// Explorer state and its pure transitions.
//
// Rendering is a pure function of this state; responses carry the id of
// the request that produced them and anything superseded is dropped, so
// a stale response can never overwrite a newer one.

import type { GridInfo, SegmentResponse, SessionInfo } from "./api.js";

export interface ExplorerState {
  baseUrl: string;
  sessionId: string | null;
  grid: GridInfo | null;
  imageName: string | null;
  prompts: string[];
  gamma: number;
  delta: number;
  background: boolean;
  opacity: number;
  smooth: boolean;
  latest: SegmentResponse | null;
  lastIssuedId: number;
  renderedId: number;
  inFlight: boolean;
  error: string | null;
}

export function initialState(baseUrl: string): ExplorerState {
  return {
    baseUrl,
    sessionId: null,
    grid: null,
    imageName: null,
    prompts: [],
    gamma: 0.2,
    delta: 0.98,
    background: false,
    opacity: 0.6,
    smooth: false,
    latest: null,
    lastIssuedId: 0,
    renderedId: 0,
    inFlight: false,
    error: null,
  };
}

export function withSession(
  state: ExplorerState,
  info: SessionInfo,
  imageName: string,
): ExplorerState {
  // replacing the image discards the old session and its response
  return {
    ...state,
    sessionId: info.session_id,
    grid: info.grid,
    imageName,
    latest: null,
    lastIssuedId: state.lastIssuedId,
    renderedId: state.lastIssuedId,
    inFlight: false,
    error: null,
  };
}

export function withSessionLost(state: ExplorerState, message: string): ExplorerState {
  return { ...state, sessionId: null, grid: null, latest: null, inFlight: false, error: message };
}

export function addPrompt(state: ExplorerState, prompt: string): ExplorerState {
  const cleaned = prompt.trim();
  if (!cleaned || state.prompts.some((p) => p.toLowerCase() === cleaned.toLowerCase())) {
    return state;
  }
  return { ...state, prompts: [...state.prompts, cleaned] };
}

export function removePrompt(state: ExplorerState, prompt: string): ExplorerState {
  return { ...state, prompts: state.prompts.filter((p) => p !== prompt) };
}

export function beginRequest(state: ExplorerState): { state: ExplorerState; id: number } {
  const id = state.lastIssuedId + 1;
  return { state: { ...state, lastIssuedId: id, inFlight: true }, id };
}

/** Accept a response only if no newer request has been issued meanwhile. */
export function applyResponse(
  state: ExplorerState,
  id: number,
  response: SegmentResponse,
): ExplorerState {
  if (id !== state.lastIssuedId) return state; // superseded: never rendered
  return { ...state, latest: response, renderedId: id, inFlight: false, error: null };
}

export function applyFailure(state: ExplorerState, id: number, message: string): ExplorerState {
  if (id !== state.lastIssuedId) return state;
  return { ...state, inFlight: false, error: message };
}

export function canQuery(state: ExplorerState): boolean {
  return state.sessionId !== null && state.prompts.length > 0;
}

export function requestBody(state: ExplorerState) {
  return {
    prompts: state.prompts,
    gamma: state.gamma,
    delta: state.delta,
    background: state.background,
  };
}
