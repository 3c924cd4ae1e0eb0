// Slice compositing. The pure pixel math (window/level ramp, heat ramp,
// mask gating) lives in plain functions over typed arrays; canvas calls
// are confined to composite() so everything else runs headless.

import { marchingSquares, Polyline } from './contours.js';
import { thresholdFloats } from './threshold.js';
import { LayerToggles } from './state.js';

export const GT_COLOR = '#e53935'; // fixed: ground truth is always red
export const PRED_COLOR = '#00e5ff';

// linear window/level lookup for the served 8-bit CT intensities
export function windowLut(window: number, level: number): Uint8Array {
  const lut = new Uint8Array(256);
  const lo = level - window / 2;
  for (let v = 0; v < 256; v++) {
    const t = ((v - lo) / window) * 255;
    lut[v] = Math.max(0, Math.min(255, Math.round(t)));
  }
  return lut;
}

export function applyWindow(pixels: Uint8ClampedArray, lut: Uint8Array): void {
  for (let i = 0; i < pixels.length; i += 4) {
    const v = lut[pixels[i]];
    pixels[i] = v;
    pixels[i + 1] = v;
    pixels[i + 2] = v;
  }
}

// orange-to-yellow heat for p in [th, 1]; alpha rises with probability.
// The heat layer is decorative: quantitative edges come from contours.
export function heatPixels(probs: Float32Array, th: number): Uint8ClampedArray {
  const out = new Uint8ClampedArray(probs.length * 4);
  for (let i = 0; i < probs.length; i++) {
    const p = probs[i];
    if (p >= th) {
      const t = (p - th) / Math.max(1 - th, 1e-9);
      out[i * 4] = 255;
      out[i * 4 + 1] = Math.round(64 + 160 * t);
      out[i * 4 + 2] = 0;
      out[i * 4 + 3] = Math.round(90 + 120 * t);
    }
  }
  return out;
}

export function predictedContours(probs: Float32Array, width: number, height: number, th: number): Polyline[] {
  // nothing strictly exceeds 1.0, so the top of the slider is a clean
  // "contour off" position
  if (th >= 1.0) return [];
  return marchingSquares(thresholdFloats(probs, th), width, height);
}

export interface SliceImages {
  ct: CanvasImageSource | null;
  pet: CanvasImageSource | null;
}

export interface SliceData {
  images: SliceImages;
  probs: Float32Array | null;
  gtContours: Polyline[];
  width: number;
  height: number;
}

export interface RenderOptions {
  layers: LayerToggles;
  th: number;
  ctWindow: number;
  ctLevel: number;
  scale: number;
}

function strokeContours(ctx: CanvasRenderingContext2D, lines: Polyline[], color: string, scale: number): void {
  ctx.strokeStyle = color;
  ctx.lineWidth = Math.max(1.5, scale * 0.25);
  for (const line of lines) {
    if (line.length < 2) continue;
    ctx.beginPath();
    // contour points are (row, col) on pixel centers
    ctx.moveTo((line[0][1] + 0.5) * scale, (line[0][0] + 0.5) * scale);
    for (let i = 1; i < line.length; i++) {
      ctx.lineTo((line[i][1] + 0.5) * scale, (line[i][0] + 0.5) * scale);
    }
    ctx.stroke();
  }
}

export function composite(canvas: HTMLCanvasElement, data: SliceData, opts: RenderOptions): void {
  const { width, height } = data;
  const scale = opts.scale;
  canvas.width = width * scale;
  canvas.height = height * scale;
  const ctx = canvas.getContext('2d');
  if (!ctx) return;
  ctx.imageSmoothingEnabled = false;
  ctx.fillStyle = '#000';
  ctx.fillRect(0, 0, canvas.width, canvas.height);

  if (opts.layers.ct && data.images.ct) {
    const off = document.createElement('canvas');
    off.width = width;
    off.height = height;
    const octx = off.getContext('2d');
    if (octx) {
      octx.drawImage(data.images.ct, 0, 0);
      const img = octx.getImageData(0, 0, width, height);
      applyWindow(img.data, windowLut(opts.ctWindow, opts.ctLevel));
      octx.putImageData(img, 0, 0);
      ctx.drawImage(off, 0, 0, canvas.width, canvas.height);
    }
  }

  if (opts.layers.pet && data.images.pet) {
    ctx.globalAlpha = 0.45;
    ctx.drawImage(data.images.pet, 0, 0, canvas.width, canvas.height);
    ctx.globalAlpha = 1.0;
  }

  if (opts.layers.heat && data.probs) {
    const off = document.createElement('canvas');
    off.width = width;
    off.height = height;
    const octx = off.getContext('2d');
    if (octx) {
      const img = octx.createImageData(width, height);
      img.data.set(heatPixels(data.probs, opts.th));
      octx.putImageData(img, 0, 0);
      ctx.drawImage(off, 0, 0, canvas.width, canvas.height);
    }
  }

  if (opts.layers.predContour && data.probs) {
    strokeContours(ctx, predictedContours(data.probs, width, height, opts.th), PRED_COLOR, scale);
  }

  if (opts.layers.gtContour) {
    strokeContours(ctx, data.gtContours, GT_COLOR, scale);
  }
}

// legend strip: the full ramp with the active band [th, 1] highlighted
export function drawLegend(canvas: HTMLCanvasElement, th: number): void {
  const ctx = canvas.getContext('2d');
  if (!ctx) return;
  const w = canvas.width;
  const h = canvas.height;
  ctx.clearRect(0, 0, w, h);
  for (let x = 0; x < w; x++) {
    const p = x / (w - 1);
    if (p >= th) {
      const t = (p - th) / Math.max(1 - th, 1e-9);
      ctx.fillStyle = `rgb(255, ${Math.round(64 + 160 * t)}, 0)`;
    } else {
      ctx.fillStyle = '#333';
    }
    ctx.fillRect(x, 0, 1, h);
  }
  const cut = Math.round(th * (w - 1));
  ctx.fillStyle = '#fff';
  ctx.fillRect(cut, 0, 2, h);
}
