/**
 * The workshop operator console.
 *
 * Upload a capture, watch the job advance on a 500 ms poll, preview the four
 * layers plus a tinted overlay composite, and fire prints. All view state
 * derives from GET /v1/jobs/{id}; the only mutating actions are job
 * submission and Print, and Print is never retried automatically.
 */

import { ApiError, getJob, printJob, stencilUrl, submitJob } from "./api.js";
import { extractOpenMask, imageToBitmap, renderComposite } from "./composite.js";
import {
  LAYERS,
  type Job,
  type Layer,
  type LayerVisibility,
  type RenderMode,
  type Strategy,
} from "./types.js";

export interface ConsoleOptions {
  baseUrl?: string;
  pollIntervalMs?: number;
}

export interface ConsoleHandle {
  element: HTMLElement;
  currentJob: () => Job | null;
  destroy: () => void;
}

const MODES: RenderMode[] = ["fourcolor", "trim", "silhouette"];

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

export function createConsole(root: HTMLElement, options: ConsoleOptions = {}): ConsoleHandle {
  const baseUrl = options.baseUrl ?? "";
  const pollIntervalMs = options.pollIntervalMs ?? 500;

  let job: Job | null = null;
  let storedInput: { blob: Blob; name: string } | null = null;
  let pollTimer: ReturnType<typeof setInterval> | null = null;
  let pollInFlight = false;
  const visibility: LayerVisibility = { c: true, m: true, y: true, k: true };
  let masks: Partial<Record<Layer, Uint8Array>> = {};
  let maskSize: { width: number; height: number } | null = null;

  // --- static skeleton -----------------------------------------------------

  const container = el("div", "mp-console");
  container.appendChild(el("h1", "mp-title", "meshpress operator console"));

  const banner = el("div", "mp-banner");
  banner.setAttribute("role", "alert");
  banner.hidden = true;
  const bannerText = el("span", "mp-banner-text");
  const bannerDismiss = el("button", "mp-banner-dismiss", "Dismiss");
  bannerDismiss.type = "button";
  bannerDismiss.addEventListener("click", () => {
    banner.hidden = true;
  });
  banner.append(bannerText, bannerDismiss);
  container.appendChild(banner);

  const form = el("form", "mp-upload");
  const fileInput = el("input") as HTMLInputElement;
  fileInput.type = "file";
  fileInput.accept = "image/png";
  fileInput.name = "image";
  const modeSelect = el("select") as HTMLSelectElement;
  modeSelect.name = "mode";
  for (const mode of MODES) {
    const opt = el("option", undefined, mode) as HTMLOptionElement;
    opt.value = mode;
    modeSelect.appendChild(opt);
  }
  const strategySelect = el("select") as HTMLSelectElement;
  strategySelect.name = "strategy";
  for (const strategy of ["cmyk", "area"] as Strategy[]) {
    const opt = el("option", undefined, strategy) as HTMLOptionElement;
    opt.value = strategy;
    strategySelect.appendChild(opt);
  }
  const stylizeBox = el("input") as HTMLInputElement;
  stylizeBox.type = "checkbox";
  stylizeBox.name = "stylize";
  const stylizeLabel = el("label", "mp-stylize");
  stylizeLabel.append(stylizeBox, document.createTextNode(" stylize"));
  const submitButton = el("button", "mp-submit", "Upload & separate");
  submitButton.type = "submit";
  form.append(fileInput, modeSelect, strategySelect, stylizeLabel, submitButton);
  container.appendChild(form);

  const status = el("div", "mp-status");
  status.hidden = true;
  const stateLine = el("div", "mp-state");
  const historyLine = el("div", "mp-history");
  status.append(stateLine, historyLine);
  container.appendChild(status);

  const readySection = el("div", "mp-ready");
  readySection.hidden = true;
  const previews = el("div", "mp-previews");
  const layerImgs = {} as Record<Layer, HTMLImageElement>;
  const layerToggles = {} as Record<Layer, HTMLInputElement>;
  for (const layer of LAYERS) {
    const cell = el("figure", "mp-layer");
    const img = el("img", "mp-stencil") as HTMLImageElement;
    img.alt = `${layer.toUpperCase()} stencil`;
    img.dataset.layer = layer;
    const caption = el("figcaption");
    const toggle = el("input") as HTMLInputElement;
    toggle.type = "checkbox";
    toggle.checked = true;
    toggle.dataset.layer = layer;
    toggle.addEventListener("change", () => {
      visibility[layer] = toggle.checked;
      repaintComposite();
    });
    caption.append(toggle, document.createTextNode(` ${layer.toUpperCase()}`));
    cell.append(img, caption);
    previews.appendChild(cell);
    layerImgs[layer] = img;
    layerToggles[layer] = toggle;
  }
  const compositeFigure = el("figure", "mp-layer mp-composite-cell");
  const compositeCanvas = el("canvas", "mp-composite") as HTMLCanvasElement;
  compositeFigure.append(compositeCanvas, el("figcaption", undefined, "composite"));
  previews.appendChild(compositeFigure);
  const planLine = el("div", "mp-plan");
  const fallbackLine = el("div", "mp-fallback");
  const printButton = el("button", "mp-print", "Print");
  printButton.type = "button";
  const printResult = el("div", "mp-print-result");
  const rerunRow = el("div", "mp-rerun");
  readySection.append(previews, planLine, fallbackLine, printButton, printResult, rerunRow);
  container.appendChild(readySection);

  const failedSection = el("div", "mp-failed");
  failedSection.hidden = true;
  const failedLine = el("div", "mp-failed-code");
  const printErrorButton = el("button", "mp-print-error", "Print error stencil");
  printErrorButton.type = "button";
  failedSection.append(failedLine, printErrorButton);
  container.appendChild(failedSection);

  root.appendChild(container);

  // --- behavior ------------------------------------------------------------

  function showBanner(message: string): void {
    bannerText.textContent = message;
    banner.hidden = false;
  }

  function describe(err: unknown): string {
    if (err instanceof ApiError) return `${err.status} ${err.code}: ${err.message}`;
    return err instanceof Error ? err.message : String(err);
  }

  function stopPolling(): void {
    if (pollTimer !== null) {
      clearInterval(pollTimer);
      pollTimer = null;
    }
  }

  function startPolling(id: string): void {
    stopPolling();
    pollTimer = setInterval(() => {
      void pollOnce(id);
    }, pollIntervalMs);
  }

  async function pollOnce(id: string): Promise<void> {
    if (pollInFlight) return;
    pollInFlight = true;
    try {
      const next = await getJob(baseUrl, id);
      job = next;
      render();
      if (next.state === "ready" || next.state === "failed" || next.state === "done") {
        stopPolling();
      }
    } catch (err) {
      stopPolling();
      showBanner(`lost contact with the job service: ${describe(err)}`);
    } finally {
      pollInFlight = false;
    }
  }

  async function submit(mode: RenderMode, strategy: Strategy, stylize: boolean): Promise<void> {
    if (!storedInput) {
      showBanner("choose a PNG to upload first");
      return;
    }
    banner.hidden = true;
    try {
      const created = await submitJob(baseUrl, storedInput.blob, storedInput.name, {
        mode,
        strategy,
        stylize,
      });
      job = created;
      masks = {};
      maskSize = null;
      render();
      startPolling(created.id);
      void pollOnce(created.id);
    } catch (err) {
      showBanner(`submit failed: ${describe(err)}`);
    }
  }

  form.addEventListener("submit", (event) => {
    event.preventDefault();
    const file = fileInput.files?.[0];
    if (file) storedInput = { blob: file, name: file.name };
    void submit(
      modeSelect.value as RenderMode,
      strategySelect.value as Strategy,
      stylizeBox.checked,
    );
  });

  printButton.addEventListener("click", () => {
    if (!job) return;
    printButton.disabled = true;
    printJob(baseUrl, job.id)
      .then((record) => {
        printResult.textContent = `printed ${record.order.join(" > ")} to ${record.device}`;
        if (job) void pollOnce(job.id);
      })
      .catch((err) => {
        // surfaced verbatim; the operator decides whether to press again
        showBanner(`print failed: ${describe(err)}`);
      })
      .finally(() => {
        printButton.disabled = false;
      });
  });

  printErrorButton.addEventListener("click", () => {
    if (!job) return;
    printErrorButton.disabled = true;
    printJob(baseUrl, job.id)
      .then((record) => {
        failedLine.textContent += ` (error mesh sent: ${record.order.join(",")})`;
      })
      .catch((err) => {
        showBanner(`print failed: ${describe(err)}`);
      })
      .finally(() => {
        printErrorButton.disabled = false;
      });
  });

  function buildRerunButtons(current: Job): void {
    rerunRow.textContent = "";
    for (const mode of MODES) {
      if (mode === current.mode) continue;
      const button = el("button", "mp-rerun-btn", `Re-run as ${mode}`);
      button.type = "button";
      button.dataset.mode = mode;
      button.addEventListener("click", () => {
        void submit(mode, current.strategy, current.stylize);
      });
      rerunRow.appendChild(button);
    }
  }

  function loadPreviews(current: Job): void {
    for (const layer of LAYERS) {
      const img = layerImgs[layer];
      const url = stencilUrl(baseUrl, current.id, layer);
      if (img.dataset.src === url) continue;
      img.dataset.src = url;
      img.src = url;
      img.onload = () => {
        const bitmap = imageToBitmap(img);
        if (!bitmap) return; // no 2d canvas here (e.g. jsdom): previews only
        masks[layer] = extractOpenMask(bitmap);
        maskSize = { width: bitmap.width, height: bitmap.height };
        repaintComposite();
      };
    }
  }

  function repaintComposite(): void {
    if (!maskSize) return;
    renderComposite(compositeCanvas, masks, maskSize.width, maskSize.height, visibility);
  }

  function render(): void {
    if (!job) return;
    status.hidden = false;
    stateLine.textContent = `job ${job.id} - ${job.state}`;
    historyLine.textContent = job.history.join(" > ");

    const ready = job.state === "ready" || job.state === "printing" || job.state === "done";
    readySection.hidden = !ready;
    failedSection.hidden = job.state !== "failed";

    if (ready) {
      loadPreviews(job);
      planLine.textContent = job.plan ? `print order: ${job.plan.order.join(" > ")}` : "";
      fallbackLine.textContent = job.stylizer_fallback
        ? "stylizer failed; separated the original photo instead"
        : "";
      buildRerunButtons(job);
    }
    if (job.state === "failed" && job.error) {
      failedLine.textContent = `${job.error.code}: ${job.error.message}`;
    }
  }

  return {
    element: container,
    currentJob: () => job,
    destroy: () => {
      stopPolling();
      container.remove();
    },
  };
}
