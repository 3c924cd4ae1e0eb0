import { describe, expect, it } from 'vitest';

import {
  clampSlice, clampThreshold, decodeState, defaultState, encodeState,
  navigate, setThreshold, switchPlane, TH_MAX, TH_MIN, TH_STEP, ViewerState,
} from '../src/state.js';

// deterministic PRNG so the property loops are reproducible
function mulberry32(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a = (a + 0x6d2b79f5) >>> 0;
    let t = a;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

describe('threshold clamping', () => {
  it('keeps grid values where they are', () => {
    expect(clampThreshold(0.5)).toBe(0.5);
    expect(clampThreshold(0.1)).toBe(0.1);
    expect(clampThreshold(1.0)).toBe(1.0);
    expect(clampThreshold(0.65)).toBe(0.65);
  });

  it('snaps off-grid values and clamps the range', () => {
    expect(clampThreshold(0.47)).toBe(0.45);
    expect(clampThreshold(0.48)).toBe(0.5);
    expect(clampThreshold(-3)).toBe(TH_MIN);
    expect(clampThreshold(2)).toBe(TH_MAX);
    expect(clampThreshold(Number.NaN)).toBe(0.5);
  });

  it('always lands on the 0.05 grid inside [0.1, 1.0]', () => {
    const rand = mulberry32(7);
    for (let i = 0; i < 500; i++) {
      const th = clampThreshold(rand() * 3 - 1);
      expect(th).toBeGreaterThanOrEqual(TH_MIN);
      expect(th).toBeLessThanOrEqual(TH_MAX);
      const steps = (th - TH_MIN) / TH_STEP;
      expect(Math.abs(steps - Math.round(steps))).toBeLessThan(1e-9);
    }
  });
});

describe('slice navigation', () => {
  it('clamps at both extremes', () => {
    const s = { ...defaultState('p01'), k: 144 };
    expect(navigate(s, +1, 144).k).toBe(144);
    expect(navigate({ ...s, k: 1 }, -1, 144).k).toBe(1);
    expect(navigate({ ...s, k: 70 }, +5, 144).k).toBe(75);
    expect(clampSlice(0, 10)).toBe(1);
    expect(clampSlice(99, 10)).toBe(10);
  });

  it('plane switches keep the threshold', () => {
    const s = setThreshold(defaultState('p01'), 0.85);
    const switched = switchPlane(s, 'coronal', 32);
    expect(switched.plane).toBe('coronal');
    expect(switched.th).toBe(0.85);
  });

  it('plane switches re-clamp the slice to the new extent', () => {
    const s = { ...defaultState('p01'), k: 120 };
    expect(switchPlane(s, 'sagittal', 32).k).toBe(32);
  });
});

describe('URL deep links', () => {
  it('round-trips the identifying fields exactly', () => {
    const s: ViewerState = {
      patient: 'p07',
      plane: 'coronal',
      k: 93,
      th: 0.45,
      layers: { ct: true, pet: true, heat: false, gtContour: true, predContour: false },
      ctWindow: 180,
      ctLevel: 96,
    };
    const restored = decodeState(encodeState(s));
    expect(restored).toEqual(s);
  });

  it('round-trips random states', () => {
    const rand = mulberry32(2024);
    const planes = ['axial', 'coronal', 'sagittal'] as const;
    for (let i = 0; i < 200; i++) {
      const s: ViewerState = {
        patient: `p${Math.floor(rand() * 90)}`,
        plane: planes[Math.floor(rand() * 3)],
        k: 1 + Math.floor(rand() * 144),
        th: clampThreshold(rand()),
        layers: {
          ct: rand() > 0.5,
          pet: rand() > 0.5,
          heat: rand() > 0.5,
          gtContour: rand() > 0.5,
          predContour: rand() > 0.5,
        },
        ctWindow: 16 + Math.floor(rand() * 239),
        ctLevel: Math.floor(rand() * 255),
      };
      expect(decodeState(encodeState(s))).toEqual(s);
    }
  });

  it('tolerates junk queries', () => {
    const s = decodeState('?patient=&plane=oblique&k=-4&th=zzz');
    expect(s.plane).toBe('axial');
    expect(s.k).toBe(1);
    expect(s.th).toBe(0.5);
  });

  it('keeps defaults for absent parameters but honors explicit zeros', () => {
    // Number(null) is 0; a hand-typed partial link must not sneak zeros in
    const partial = decodeState('?patient=p02');
    expect(partial.th).toBe(0.5);
    expect(partial.ctLevel).toBe(128);
    expect(partial.ctWindow).toBe(255);
    expect(partial.layers.pet).toBe(false);
    expect(decodeState('?patient=p02&lvl=0').ctLevel).toBe(0);
  });
});
