// Client-side rethresholding of the raw float map. The server stores
// probabilities as float32; reading Float32Array elements in JS promotes
// them to float64 exactly, and the server thresholds the same promoted
// values, so `p > th` here is bit-identical to the mask endpoint for any
// threshold.

export function thresholdFloats(probs: Float32Array, th: number): Uint8Array {
  const out = new Uint8Array(probs.length);
  for (let i = 0; i < probs.length; i++) {
    out[i] = probs[i] > th ? 1 : 0;
  }
  return out;
}

export function positiveCount(probs: Float32Array, th: number): number {
  let n = 0;
  for (let i = 0; i < probs.length; i++) {
    if (probs[i] > th) n++;
  }
  return n;
}

export function masksEqual(a: Uint8Array, b: Uint8Array): boolean {
  if (a.length !== b.length) return false;
  for (let i = 0; i < a.length; i++) {
    if (a[i] !== b[i]) return false;
  }
  return true;
}
