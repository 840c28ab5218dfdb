/** Thin client for the job service HTTP API. */

import type { Job, Layer, PrintRecord, SubmitOptions } from "./types.js";

export class ApiError extends Error {
  status: number;
  code: string;

  constructor(status: number, code: string, message: string) {
    super(message);
    this.status = status;
    this.code = code;
  }
}

async function asApiError(resp: Response): Promise<ApiError> {
  let code = "Error";
  let message = `HTTP ${resp.status}`;
  try {
    const body = await resp.json();
    if (body?.error) {
      code = body.error.code ?? code;
      message = body.error.message ?? message;
    }
  } catch {
    // non-JSON error body: keep the status text
  }
  return new ApiError(resp.status, code, message);
}

export async function submitJob(
  baseUrl: string,
  image: Blob,
  filename: string,
  options: SubmitOptions,
): Promise<Job> {
  const form = new FormData();
  form.append("image", image, filename);
  form.append("options", JSON.stringify(options));
  const resp = await fetch(`${baseUrl}/v1/jobs`, { method: "POST", body: form });
  if (!resp.ok) throw await asApiError(resp);
  return resp.json();
}

export async function getJob(baseUrl: string, id: string): Promise<Job> {
  const resp = await fetch(`${baseUrl}/v1/jobs/${id}`);
  if (!resp.ok) throw await asApiError(resp);
  return resp.json();
}

export async function printJob(baseUrl: string, id: string): Promise<PrintRecord> {
  const resp = await fetch(`${baseUrl}/v1/jobs/${id}/print`, { method: "POST" });
  if (!resp.ok) throw await asApiError(resp);
  return resp.json();
}

export function stencilUrl(baseUrl: string, id: string, layer: Layer): string {
  return `${baseUrl}/v1/jobs/${id}/stencils/${layer}.png`;
}

export function errorFrameUrl(baseUrl: string, id: string): string {
  return `${baseUrl}/v1/jobs/${id}/frames/error.escpos`;
}
