// Marching squares over the client-side binary mask. Runs on every
// threshold scrub, so it must stay cheap: one allocation-light pass
// builds segments in doubled integer coordinates, a second chains them
// into polylines. Coordinates are (row, col) with pixel centers on
// integers, matching the server's contour convention; on a 0/1 field
// every crossing lands on a half-integer midpoint, so each vertex lies
// exactly 0.5 px from a mask boundary pixel center.

export type Point = [number, number];
export type Polyline = Point[];

// edge codes for the flat case table
const T = 0;
const B = 1;
const L = 2;
const R = 3;

// up to two segments (four edge slots) per case, -1 padding; corner
// bits tl=1 tr=2 br=4 bl=8, inside = 1. Cases 5 and 10 are saddles.
const CASE_EDGES = new Int8Array([
  -1, -1, -1, -1,
  L, T, -1, -1,
  T, R, -1, -1,
  L, R, -1, -1,
  R, B, -1, -1,
  L, T, R, B,
  T, B, -1, -1,
  L, B, -1, -1,
  B, L, -1, -1,
  T, B, -1, -1,
  T, R, B, L,
  B, R, -1, -1,
  R, L, -1, -1,
  T, R, -1, -1,
  T, L, -1, -1,
  -1, -1, -1, -1,
]);

export function marchingSquares(mask: Uint8Array, width: number, height: number): Polyline[] {
  if (mask.length !== width * height) {
    throw new Error(`mask length ${mask.length} != ${width}x${height}`);
  }

  // endpoints as single integers over doubled coordinates: the midpoint
  // (r + 0.5, c) doubles to integral (2r + 1, 2c), and one number per
  // endpoint keeps the hot loop free of per-segment allocations
  const stride = 2 * width + 2;
  // doubled coords of edge midpoints for cell (r, c), by edge code
  const edgeKey = (edge: number, r: number, c: number): number => {
    switch (edge) {
      case T: return 2 * r * stride + 2 * c + 1;
      case B: return (2 * r + 2) * stride + 2 * c + 1;
      case L: return (2 * r + 1) * stride + 2 * c;
      default: return (2 * r + 1) * stride + 2 * c + 2;
    }
  };

  const segA: number[] = [];
  const segB: number[] = [];
  for (let r = 0; r < height - 1; r++) {
    for (let c = 0; c < width - 1; c++) {
      const tl = mask[r * width + c];
      const tr = mask[r * width + c + 1];
      const br = mask[(r + 1) * width + c + 1];
      const bl = mask[(r + 1) * width + c];
      const idx = tl | (tr << 1) | (br << 2) | (bl << 3);
      if (idx === 0 || idx === 15) continue; // uniform cells dominate
      const base = idx * 4;
      segA.push(edgeKey(CASE_EDGES[base], r, c));
      segB.push(edgeKey(CASE_EDGES[base + 1], r, c));
      if (CASE_EDGES[base + 2] >= 0) {
        segA.push(edgeKey(CASE_EDGES[base + 2], r, c));
        segB.push(edgeKey(CASE_EDGES[base + 3], r, c));
      }
    }
  }

  // chain segments endpoint-to-endpoint into polylines
  const links = new Map<number, number[]>();
  for (let i = 0; i < segA.length; i++) {
    const la = links.get(segA[i]);
    if (la) la.push(i);
    else links.set(segA[i], [i]);
    const lb = links.get(segB[i]);
    if (lb) lb.push(i);
    else links.set(segB[i], [i]);
  }

  const toPoint = (k: number): Point => {
    const r2 = Math.floor(k / stride);
    return [r2 / 2, (k - r2 * stride) / 2];
  };

  const used = new Uint8Array(segA.length);

  // walk unused segments away from tip, appending endpoints
  function extend(tip: number, acc: Polyline): void {
    for (;;) {
      const candidates = links.get(tip);
      if (!candidates) return;
      let nextIdx = -1;
      for (const i of candidates) {
        if (!used[i]) { nextIdx = i; break; }
      }
      if (nextIdx < 0) return;
      used[nextIdx] = 1;
      tip = segA[nextIdx] === tip ? segB[nextIdx] : segA[nextIdx];
      acc.push(toPoint(tip));
    }
  }

  const out: Polyline[] = [];
  for (let start = 0; start < segA.length; start++) {
    if (used[start]) continue;
    used[start] = 1;
    const line: Polyline = [toPoint(segA[start]), toPoint(segB[start])];
    extend(segB[start], line);
    // open chains continue past the original head; closed loops already
    // ended back at it. Collect head-side points separately: appending
    // then reversing stays linear where repeated unshift would not.
    const headward: Polyline = [];
    extend(segA[start], headward);
    out.push(headward.length > 0 ? headward.reverse().concat(line) : line);
  }
  return out;
}
