// Stale-response discarding. Every async load takes a ticket; only the
// newest ticket may commit its result, so rapid scrubbing or slice
// changes can never paint an older response over a newer one.

export class LatestGate {
  private counter = 0;

  next(): number {
    this.counter += 1;
    return this.counter;
  }

  isCurrent(ticket: number): boolean {
    return ticket === this.counter;
  }
}

// issue the prefetch plan around a slice: at most two speculative
// neighbors, clamped to the plane extent and deduplicated at the edges
export function prefetchTargets(k: number, nSlices: number): number[] {
  const targets: number[] = [];
  for (const dk of [1, -1]) {
    const t = k + dk;
    if (t >= 1 && t <= nSlices && t !== k && !targets.includes(t)) {
      targets.push(t);
    }
  }
  return targets;
}
