/** Mirrors of the job service JSON plus client-side view state. */

export type JobState =
  | "received"
  | "stylizing"
  | "separating"
  | "ready"
  | "printing"
  | "done"
  | "failed";

export type RenderMode = "fourcolor" | "trim" | "silhouette";
export type Strategy = "cmyk" | "area";

export type Layer = "c" | "m" | "y" | "k";

export const LAYERS: readonly Layer[] = ["c", "m", "y", "k"];

export interface JobError {
  code: string;
  message: string;
}

export interface JobPlan {
  order: string[];
  counts: Record<string, number>;
}

export interface Job {
  id: string;
  state: JobState;
  mode: RenderMode;
  strategy: Strategy;
  stylize: boolean;
  strict_stylize: boolean;
  stylizer_fallback: boolean;
  created_at: string;
  updated_at: string;
  artifacts: Record<string, string>;
  plan: JobPlan | null;
  error: JobError | null;
  history: string[];
}

export interface SubmitOptions {
  mode: RenderMode;
  strategy: Strategy;
  stylize: boolean;
}

export interface PrintRecord {
  job_id: string;
  order: string[];
  frames: { layer: string; bytes: number; duration_ms: number }[];
  device: string;
}

/** Client-side layer visibility for the composite preview. */
export type LayerVisibility = Record<Layer, boolean>;
