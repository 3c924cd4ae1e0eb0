import { readFileSync } from 'node:fs';
import { join } from 'node:path';
import { fileURLToPath } from 'node:url';

import { describe, expect, it } from 'vitest';

import { masksEqual, positiveCount, thresholdFloats } from '../src/threshold.js';

const FIXTURES = fileURLToPath(new URL('./fixtures', import.meta.url));

function fixtureFloats(name: string): Float32Array {
  const buf = readFileSync(join(FIXTURES, name));
  return new Float32Array(buf.buffer, buf.byteOffset, buf.byteLength / 4);
}

function fixtureBytes(name: string): Uint8Array {
  return new Uint8Array(readFileSync(join(FIXTURES, name)));
}

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

describe('client-side thresholding against server fixtures', () => {
  // the fixtures are byte-for-byte server responses captured from a real
  // evaluated run: prob.bin for two slices plus mask.bin at four thresholds
  const meta = JSON.parse(readFileSync(join(FIXTURES, 'meta.json'), 'utf8'));

  for (const slice of meta.slices as { name: string; k: number }[]) {
    for (const th of [0.3, 0.5, 0.7, 0.9]) {
      it(`matches mask.bin for ${slice.name} at th=${th}`, () => {
        const probs = fixtureFloats(`${slice.name}_prob.bin`);
        const server = fixtureBytes(`${slice.name}_mask_${th}.bin`);
        expect(probs.length).toBe(meta.rows * meta.cols);
        const client = thresholdFloats(probs, th);
        expect(masksEqual(client, server)).toBe(true);
      });
    }
  }

  it('float32 reads promote exactly, so boundary values stay out', () => {
    // a probability stored as exactly 0.5 must not pass th=0.5
    const probs = new Float32Array([0.5, Math.fround(0.5000001), 0.49999]);
    const mask = thresholdFloats(probs, 0.5);
    expect(Array.from(mask)).toEqual([0, 1, 0]);
  });
});

describe('scrub monotonicity', () => {
  it('highlighted area never grows as the threshold rises', () => {
    const rand = mulberry32(11);
    const probs = new Float32Array(144 * 144);
    for (let i = 0; i < probs.length; i++) probs[i] = Math.fround(rand());
    let previous = Number.POSITIVE_INFINITY;
    for (let th = 0.1; th <= 0.901; th += 0.05) {
      const count = positiveCount(probs, th);
      expect(count).toBeLessThanOrEqual(previous);
      previous = count;
    }
  });

  it('positiveCount agrees with the mask sum', () => {
    const rand = mulberry32(3);
    const probs = new Float32Array(500);
    for (let i = 0; i < probs.length; i++) probs[i] = Math.fround(rand());
    for (const th of [0.2, 0.55, 0.9]) {
      const mask = thresholdFloats(probs, th);
      const sum = mask.reduce((a, b) => a + b, 0);
      expect(positiveCount(probs, th)).toBe(sum);
    }
  });
});
