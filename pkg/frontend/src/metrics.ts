// Client-side slice Dice, matching the server's smoothed formula so the
// live readout agrees with what evaluation would report for this slice.

const EPSILON = 1e-5;

export function sliceDsc(probs: Float32Array, gt: Uint8Array, th: number): number {
  if (probs.length !== gt.length) {
    throw new Error(`prob/gt length mismatch: ${probs.length} vs ${gt.length}`);
  }
  let tp = 0;
  let fp = 0;
  let fn = 0;
  for (let i = 0; i < probs.length; i++) {
    const p = probs[i] > th;
    const g = gt[i] === 1;
    if (p && g) tp++;
    else if (p) fp++;
    else if (g) fn++;
  }
  // both empty -> 1.0 through the smoothing, not a special case
  return (2 * tp + EPSILON) / (tp + fp + (tp + fn) + EPSILON);
}
