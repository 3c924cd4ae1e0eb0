// Viewer state and its URL round-trip. Every field that identifies a view
// (patient, plane, k, th) survives encode/decode exactly, so deep links
// reproduce what the user saw.

export type PlaneName = 'axial' | 'coronal' | 'sagittal';

export const PLANES: PlaneName[] = ['axial', 'coronal', 'sagittal'];

export const TH_MIN = 0.1;
export const TH_MAX = 1.0;
export const TH_STEP = 0.05;

export interface LayerToggles {
  ct: boolean;
  pet: boolean;
  heat: boolean;
  gtContour: boolean;
  predContour: boolean;
}

export interface ViewerState {
  patient: string;
  plane: PlaneName;
  k: number; // 1-based slice index
  th: number;
  layers: LayerToggles;
  ctWindow: number; // width of the display ramp over served 8-bit CT
  ctLevel: number; // center of the ramp
}

export const DEFAULT_LAYERS: LayerToggles = {
  ct: true,
  pet: false,
  heat: true,
  gtContour: true,
  predContour: true,
};

export function defaultState(patient: string): ViewerState {
  return {
    patient,
    plane: 'axial',
    k: 1,
    th: 0.5,
    layers: { ...DEFAULT_LAYERS },
    ctWindow: 255,
    ctLevel: 128,
  };
}

// snap an arbitrary value onto the slider grid; the grid is 0.1..1.0 in
// steps of 0.05, so indices 0..18
export function clampThreshold(th: number): number {
  if (!Number.isFinite(th)) return 0.5;
  const steps = Math.round((th - TH_MIN) / TH_STEP);
  const bounded = Math.min(Math.max(steps, 0), Math.round((TH_MAX - TH_MIN) / TH_STEP));
  return Number((TH_MIN + bounded * TH_STEP).toFixed(2));
}

export function clampSlice(k: number, nSlices: number): number {
  if (!Number.isFinite(k)) return 1;
  return Math.min(Math.max(Math.round(k), 1), Math.max(nSlices, 1));
}

// Δk navigation; out-of-range targets stick to the boundary
export function navigate(state: ViewerState, deltaK: number, nSlices: number): ViewerState {
  return { ...state, k: clampSlice(state.k + deltaK, nSlices) };
}

// plane switches keep the threshold (and everything else except k, which
// re-clamps against the new extent)
export function switchPlane(state: ViewerState, plane: PlaneName, nSlices: number): ViewerState {
  return { ...state, plane, k: clampSlice(state.k, nSlices) };
}

export function setThreshold(state: ViewerState, th: number): ViewerState {
  return { ...state, th: clampThreshold(th) };
}

export function encodeState(state: ViewerState): string {
  const q = new URLSearchParams();
  q.set('patient', state.patient);
  q.set('plane', state.plane);
  q.set('k', String(state.k));
  q.set('th', state.th.toFixed(2));
  // always emitted: decode rebuilds layers from an all-on basis, so the
  // parameter has to be present even when nothing is disabled
  const off = Object.entries(state.layers)
    .filter(([, on]) => !on)
    .map(([name]) => name);
  q.set('off', off.join(','));
  if (state.ctWindow !== 255) q.set('win', String(state.ctWindow));
  if (state.ctLevel !== 128) q.set('lvl', String(state.ctLevel));
  return q.toString();
}

// Number(null) is 0, so absent parameters have to stay distinct from "0"
function numParam(q: URLSearchParams, name: string): number | null {
  const raw = q.get(name);
  if (raw === null || raw === '') return null;
  const n = Number(raw);
  return Number.isFinite(n) ? n : null;
}

export function decodeState(query: string, fallbackPatient = ''): ViewerState {
  const q = new URLSearchParams(query);
  const state = defaultState(q.get('patient') ?? fallbackPatient);
  const plane = q.get('plane');
  if (plane && (PLANES as string[]).includes(plane)) state.plane = plane as PlaneName;
  const k = numParam(q, 'k');
  if (k !== null && k >= 1) state.k = Math.round(k);
  const th = numParam(q, 'th');
  if (th !== null) state.th = clampThreshold(th);
  if (q.has('off')) {
    // the off list is authoritative when present; a URL without it keeps
    // the default toggles
    for (const name of Object.keys(state.layers)) {
      state.layers[name as keyof LayerToggles] = true;
    }
    for (const name of (q.get('off') ?? '').split(',')) {
      if (name in state.layers) state.layers[name as keyof LayerToggles] = false;
    }
  }
  const win = numParam(q, 'win');
  if (win !== null && win > 0) state.ctWindow = win;
  const lvl = numParam(q, 'lvl');
  if (lvl !== null) state.ctLevel = lvl;
  return state;
}
