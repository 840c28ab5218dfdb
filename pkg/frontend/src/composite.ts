/**
 * Overlay composite of the four stencil previews.
 *
 * Stencil PNGs draw open mesh as black. Each layer contributes its fixed ink
 * tint at 70% opacity where the mesh is open, stacked in C, M, Y, K order
 * over white: a cheap approximation of how the inks layer on skin. The pixel
 * math is pure so the preview is a function of the stencil bytes plus the
 * visibility toggles and nothing else.
 */

import { LAYERS, type Layer, type LayerVisibility } from "./types.js";

export const TINT_OPACITY = 0.7;

export const LAYER_TINTS: Record<Layer, [number, number, number]> = {
  c: [0, 255, 255],
  m: [255, 0, 255],
  y: [255, 255, 0],
  k: [0, 0, 0],
};

export interface Bitmap {
  width: number;
  height: number;
  data: Uint8ClampedArray; // RGBA
}

/** Open-mesh mask from stencil RGBA pixels: dark means open. */
export function extractOpenMask(bitmap: Bitmap): Uint8Array {
  const n = bitmap.width * bitmap.height;
  const mask = new Uint8Array(n);
  for (let i = 0; i < n; i++) {
    const r = bitmap.data[4 * i]!;
    const g = bitmap.data[4 * i + 1]!;
    const b = bitmap.data[4 * i + 2]!;
    const a = bitmap.data[4 * i + 3]!;
    mask[i] = a > 0 && (r + g + b) / 3 < 128 ? 1 : 0;
  }
  return mask;
}

/** Stack the visible layers' tints over white, source-over at 70% alpha. */
export function compositeLayers(
  masks: Partial<Record<Layer, Uint8Array>>,
  width: number,
  height: number,
  visible: LayerVisibility,
): Bitmap {
  const n = width * height;
  const out = new Uint8ClampedArray(n * 4);
  out.fill(255);
  for (const layer of LAYERS) {
    const mask = masks[layer];
    if (!mask || !visible[layer]) continue;
    const [tr, tg, tb] = LAYER_TINTS[layer];
    for (let i = 0; i < n; i++) {
      if (!mask[i]) continue;
      out[4 * i] = Math.round((1 - TINT_OPACITY) * out[4 * i]! + TINT_OPACITY * tr);
      out[4 * i + 1] = Math.round((1 - TINT_OPACITY) * out[4 * i + 1]! + TINT_OPACITY * tg);
      out[4 * i + 2] = Math.round((1 - TINT_OPACITY) * out[4 * i + 2]! + TINT_OPACITY * tb);
    }
  }
  return { width, height, data: out };
}

/** Draw an already-loaded stencil <img> into a Bitmap; null when 2d canvas is unavailable. */
export function imageToBitmap(img: HTMLImageElement): Bitmap | null {
  const canvas = document.createElement("canvas");
  canvas.width = img.naturalWidth;
  canvas.height = img.naturalHeight;
  const ctx = canvas.getContext("2d");
  if (!ctx || canvas.width === 0 || canvas.height === 0) return null;
  ctx.drawImage(img, 0, 0);
  const data = ctx.getImageData(0, 0, canvas.width, canvas.height);
  return { width: data.width, height: data.height, data: data.data };
}

/** Paint a composite onto a canvas; no-op where canvas 2d is unavailable. */
export function renderComposite(
  canvas: HTMLCanvasElement,
  masks: Partial<Record<Layer, Uint8Array>>,
  width: number,
  height: number,
  visible: LayerVisibility,
): void {
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  canvas.width = width;
  canvas.height = height;
  const bitmap = compositeLayers(masks, width, height, visible);
  ctx.putImageData(new ImageData(new Uint8ClampedArray(bitmap.data), width, height), 0, 0);
}
