// DOM wiring for the explorer. All rendering is driven by one state
// object; every user action funnels through update() -> render().

import { ApiError, createSession, segmentSession } from "./api.js";
import { cssColor, promptColor } from "./colors.js";
import { debounce } from "./debounce.js";
import { buildSidecar, parseSidecar } from "./export.js";
import { composeOverlay, coverageRows } from "./overlay.js";
import { decodeRle } from "./rle.js";
import {
  ExplorerState,
  addPrompt,
  applyFailure,
  applyResponse,
  beginRequest,
  canQuery,
  initialState,
  removePrompt,
  requestBody,
  withSession,
  withSessionLost,
} from "./state.js";

const SLIDER_DEBOUNCE_MS = 150;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

const apiInput = el<HTMLInputElement>("api-url");
const fileInput = el<HTMLInputElement>("image-file");
const promptInput = el<HTMLInputElement>("prompt-input");
const promptAdd = el<HTMLButtonElement>("prompt-add");
const promptList = el<HTMLDivElement>("prompt-list");
const gammaSlider = el<HTMLInputElement>("gamma");
const deltaSlider = el<HTMLInputElement>("delta");
const gammaValue = el<HTMLSpanElement>("gamma-value");
const deltaValue = el<HTMLSpanElement>("delta-value");
const backgroundToggle = el<HTMLInputElement>("background");
const opacitySlider = el<HTMLInputElement>("opacity");
const smoothToggle = el<HTMLInputElement>("smooth");
const statusLine = el<HTMLDivElement>("status");
const coverageList = el<HTMLDivElement>("coverage");
const imageCanvas = el<HTMLCanvasElement>("image-canvas");
const overlayCanvas = el<HTMLCanvasElement>("overlay-canvas");
const exportButton = el<HTMLButtonElement>("export-view");
const importInput = el<HTMLInputElement>("import-json");
const gridInfo = el<HTMLSpanElement>("grid-info");

const params = new URLSearchParams(window.location.search);
let state: ExplorerState = initialState(params.get("api") ?? "http://127.0.0.1:8000");
apiInput.value = state.baseUrl;

let bitmap: ImageBitmap | null = null;
let abortController: AbortController | null = null;

function update(next: ExplorerState, requery = false): void {
  state = next;
  render();
  if (requery) issueQuery();
}

async function issueQuery(): Promise<void> {
  if (!canQuery(state)) {
    render();
    return;
  }
  // at most one in-flight request: supersede and abort the previous one
  abortController?.abort();
  abortController = new AbortController();
  const begun = beginRequest(state);
  state = begun.state;
  render();
  try {
    const response = await segmentSession(
      state.baseUrl,
      state.sessionId!,
      requestBody(state),
      abortController.signal,
    );
    update(applyResponse(state, begun.id, response));
  } catch (err) {
    if (err instanceof DOMException && err.name === "AbortError") return;
    if (err instanceof ApiError && err.status === 404) {
      update(withSessionLost(state, "session expired: upload the image again"));
      return;
    }
    update(applyFailure(state, begun.id, err instanceof Error ? err.message : String(err)));
  }
}

const debouncedQuery = debounce(issueQuery, SLIDER_DEBOUNCE_MS);

async function onUpload(): Promise<void> {
  const file = fileInput.files?.[0];
  if (!file) return;
  statusLine.textContent = "encoding image (single backbone pass)...";
  try {
    const info = await createSession(state.baseUrl, file);
    bitmap = await createImageBitmap(file);
    update(withSession(state, info, file.name));
    statusLine.textContent =
      `session ${info.session_id.slice(0, 8)}: ` +
      `${info.grid.n_rows}x${info.grid.n_cols} patches in ${info.timing_ms} ms`;
    issueQuery();
  } catch (err) {
    const message =
      err instanceof ApiError && err.status === 413
        ? "image too large for the server"
        : err instanceof ApiError && err.status === 415
          ? "file is not a decodable image"
          : err instanceof Error
            ? err.message
            : String(err);
    statusLine.textContent = `upload failed: ${message}`;
  }
}

function renderPrompts(): void {
  promptList.replaceChildren();
  for (const prompt of state.prompts) {
    const chip = document.createElement("span");
    chip.className = "chip";
    chip.style.borderColor = cssColor(promptColor(prompt));
    const swatch = document.createElement("span");
    swatch.className = "swatch";
    swatch.style.backgroundColor = cssColor(promptColor(prompt));
    const label = document.createElement("span");
    label.textContent = prompt;
    const remove = document.createElement("button");
    remove.textContent = "x";
    remove.title = `remove "${prompt}"`;
    remove.addEventListener("click", () => update(removePrompt(state, prompt), true));
    chip.append(swatch, label, remove);
    promptList.append(chip);
  }
}

function renderOverlay(): void {
  const ctx = overlayCanvas.getContext("2d")!;
  ctx.clearRect(0, 0, overlayCanvas.width, overlayCanvas.height);
  const response = state.latest;
  if (!response || !bitmap) return;
  const labels = decodeRle(response.labels_rle, response.length);
  const colors = response.prompts.map(promptColor);
  const { n_rows: rows, n_cols: cols } = response.grid;
  if (state.smooth) {
    // optional smoothed mode: patch-resolution pixels scaled with filtering
    const patch = new OffscreenCanvas(cols, rows);
    const pctx = patch.getContext("2d")!;
    const data = composeOverlay(labels, rows, cols, colors, {
      width: cols,
      height: rows,
      opacity: state.opacity,
      transparentLabel: response.background_index,
    });
    pctx.putImageData(new ImageData(data, cols, rows), 0, 0);
    ctx.imageSmoothingEnabled = true;
    ctx.drawImage(patch, 0, 0, overlayCanvas.width, overlayCanvas.height);
  } else {
    // default: blocky nearest-neighbor expansion, the method's native granularity
    const data = composeOverlay(labels, rows, cols, colors, {
      width: overlayCanvas.width,
      height: overlayCanvas.height,
      opacity: state.opacity,
      transparentLabel: response.background_index,
    });
    ctx.putImageData(new ImageData(data, overlayCanvas.width, overlayCanvas.height), 0, 0);
  }
}

function renderCoverage(): void {
  coverageList.replaceChildren();
  const response = state.latest;
  if (!response) return;
  for (const { prompt, percent } of coverageRows(response.prompts, response.coverage_percent)) {
    const row = document.createElement("div");
    const swatch = document.createElement("span");
    swatch.className = "swatch";
    swatch.style.backgroundColor = cssColor(promptColor(prompt));
    const text = document.createElement("span");
    text.textContent = ` ${prompt}: ${percent.toFixed(1)}%`;
    row.append(swatch, text);
    coverageList.append(row);
  }
}

function render(): void {
  gammaValue.textContent = state.gamma.toFixed(2);
  deltaValue.textContent = state.delta.toFixed(2);
  gammaSlider.value = String(state.gamma);
  deltaSlider.value = String(state.delta);
  backgroundToggle.checked = state.background;
  opacitySlider.value = String(state.opacity);
  smoothToggle.checked = state.smooth;
  const enabled = state.sessionId !== null;
  for (const control of [promptInput, promptAdd, gammaSlider, deltaSlider,
                         backgroundToggle, opacitySlider, smoothToggle, exportButton]) {
    (control as HTMLInputElement).disabled = !enabled;
  }
  gridInfo.textContent = state.grid
    ? `${state.grid.n_rows} x ${state.grid.n_cols} patches`
    : "no session";
  if (bitmap) {
    imageCanvas.width = overlayCanvas.width = bitmap.width;
    imageCanvas.height = overlayCanvas.height = bitmap.height;
    imageCanvas.getContext("2d")!.drawImage(bitmap, 0, 0);
  }
  renderPrompts();
  renderOverlay();
  renderCoverage();
  if (state.error) statusLine.textContent = `error: ${state.error}`;
  else if (state.inFlight) statusLine.textContent = "querying cached session...";
}

function exportView(): void {
  const response = state.latest;
  if (!response) return;
  const sidecar = buildSidecar(state, response);
  const jsonBlob = new Blob([JSON.stringify(sidecar, null, 2)], { type: "application/json" });
  const jsonLink = document.createElement("a");
  jsonLink.href = URL.createObjectURL(jsonBlob);
  jsonLink.download = `${sidecar.image.replace(/\.[^.]+$/, "")}.json`;
  jsonLink.click();
  overlayCanvas.toBlob((blob) => {
    if (!blob) return;
    const pngLink = document.createElement("a");
    pngLink.href = URL.createObjectURL(blob);
    pngLink.download = `${sidecar.image.replace(/\.[^.]+$/, "")}_overlay.png`;
    pngLink.click();
  });
}

async function importView(): Promise<void> {
  const file = importInput.files?.[0];
  if (!file) return;
  try {
    const restored = parseSidecar(await file.text());
    update(
      {
        ...state,
        prompts: restored.prompts,
        gamma: restored.gamma,
        delta: restored.delta,
        background: restored.background,
      },
      true,
    );
  } catch (err) {
    statusLine.textContent = `import failed: ${err instanceof Error ? err.message : err}`;
  }
}

apiInput.addEventListener("change", () => {
  state = { ...initialState(apiInput.value.replace(/\/$/, "")) };
  bitmap = null;
  render();
});
fileInput.addEventListener("change", onUpload);
promptAdd.addEventListener("click", () => {
  update(addPrompt(state, promptInput.value), true);
  promptInput.value = "";
});
promptInput.addEventListener("keydown", (event) => {
  if (event.key === "Enter") promptAdd.click();
});
gammaSlider.addEventListener("input", () => {
  state = { ...state, gamma: Number(gammaSlider.value) };
  render();
  debouncedQuery();
});
deltaSlider.addEventListener("input", () => {
  state = { ...state, delta: Number(deltaSlider.value) };
  render();
  debouncedQuery();
});
backgroundToggle.addEventListener("change", () => {
  update({ ...state, background: backgroundToggle.checked }, true);
});
opacitySlider.addEventListener("input", () => {
  state = { ...state, opacity: Number(opacitySlider.value) };
  render(); // pure re-render; no re-query needed
});
smoothToggle.addEventListener("change", () => {
  state = { ...state, smooth: smoothToggle.checked };
  render();
});
exportButton.addEventListener("click", exportView);
importInput.addEventListener("change", importView);

render();
