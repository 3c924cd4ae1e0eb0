// DOM wiring: one canvas, a control rail, and a metrics panel, all driven
// by a single ViewerState that round-trips through the URL.

import { ApiClient, PatientDetail } from './api.js';
import { Polyline } from './contours.js';
import { sliceDsc } from './metrics.js';
import { composite, drawLegend, SliceData } from './render.js';
import { LatestGate, prefetchTargets } from './requests.js';
import {
  decodeState, encodeState, navigate, PlaneName, PLANES, setThreshold,
  switchPlane, TH_MAX, TH_MIN, TH_STEP, ViewerState,
} from './state.js';

interface LoadedSlice {
  probs: Float32Array;
  gt: Uint8Array;
  gtContours: Polyline[];
  ct: HTMLImageElement | null;
  pet: HTMLImageElement | null;
  width: number;
  height: number;
}

function loadImage(url: string): Promise<HTMLImageElement | null> {
  return new Promise((resolve) => {
    const img = new Image();
    img.crossOrigin = 'anonymous';
    img.onload = () => resolve(img);
    img.onerror = () => resolve(null); // image layers degrade, data does not
    img.src = url;
  });
}

class SliceStore {
  private cache = new Map<string, Promise<LoadedSlice>>();

  constructor(private readonly api: ApiClient) {}

  get(pid: string, plane: PlaneName, k: number, rows: number, cols: number): Promise<LoadedSlice> {
    const key = `${pid}/${plane}/${k}`;
    let hit = this.cache.get(key);
    if (!hit) {
      hit = this.load(pid, plane, k, rows, cols);
      this.cache.set(key, hit);
      hit.catch(() => this.cache.delete(key)); // failed loads retry later
    }
    return hit;
  }

  private async load(pid: string, plane: PlaneName, k: number, rows: number, cols: number): Promise<LoadedSlice> {
    const [probs, gt, contours, ct, pet] = await Promise.all([
      this.api.probFloats(pid, plane, k),
      this.api.gtMask(pid, plane, k),
      this.api.contours(pid, plane, k, 0.5),
      loadImage(this.api.imageUrl(pid, plane, k, 'ct')),
      loadImage(this.api.imageUrl(pid, plane, k, 'pet')),
    ]);
    return {
      probs,
      gt,
      gtContours: contours.gt as Polyline[],
      ct,
      pet,
      width: cols,
      height: rows,
    };
  }
}

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

export class ViewerApp {
  private state: ViewerState;
  private detail: PatientDetail | null = null;
  private current: LoadedSlice | null = null;
  private readonly gate = new LatestGate();
  private readonly metricsGate = new LatestGate();
  private readonly store: SliceStore;

  constructor(private readonly api: ApiClient) {
    this.store = new SliceStore(api);
    this.state = decodeState(window.location.search);
  }

  private planeInfo() {
    const info = this.detail?.planes[this.state.plane];
    if (!info) throw new Error(`plane ${this.state.plane} not served`);
    return info;
  }

  async start(): Promise<void> {
    const patients = await this.api.listPatients();
    if (patients.length === 0) {
      this.showError('no evaluated patients on the server');
      return;
    }
    const select = el<HTMLSelectElement>('patient');
    for (const p of patients) {
      const opt = document.createElement('option');
      opt.value = p.patient_id;
      opt.textContent = p.patient_id;
      select.appendChild(opt);
    }
    if (!patients.some((p) => p.patient_id === this.state.patient)) {
      this.state.patient = patients[0].patient_id;
    }
    select.value = this.state.patient;
    this.bindControls();
    await this.switchPatient(this.state.patient, true);
  }

  private bindControls(): void {
    el<HTMLSelectElement>('patient').addEventListener('change', (e) => {
      void this.switchPatient((e.target as HTMLSelectElement).value, false);
    });

    const planeSel = el<HTMLSelectElement>('plane');
    planeSel.addEventListener('change', (e) => {
      const plane = (e.target as HTMLSelectElement).value as PlaneName;
      this.state = switchPlane(this.state, plane, this.detail?.planes[plane]?.n_slices ?? 1);
      this.afterStateChange();
    });

    const kSlider = el<HTMLInputElement>('slice');
    kSlider.addEventListener('input', () => {
      this.state = { ...this.state, k: Number(kSlider.value) };
      this.afterStateChange();
    });

    const thSlider = el<HTMLInputElement>('threshold');
    thSlider.min = String(TH_MIN);
    thSlider.max = String(TH_MAX);
    thSlider.step = String(TH_STEP);
    thSlider.addEventListener('input', () => {
      this.scrub(Number(thSlider.value));
    });

    for (const name of ['ct', 'pet', 'heat', 'gtContour', 'predContour'] as const) {
      el<HTMLInputElement>(`layer-${name}`).addEventListener('change', (e) => {
        this.state.layers[name] = (e.target as HTMLInputElement).checked;
        this.syncUrl();
        this.paint();
      });
    }

    const win = el<HTMLInputElement>('ct-window');
    const lvl = el<HTMLInputElement>('ct-level');
    const onWindow = () => {
      this.state = { ...this.state, ctWindow: Number(win.value), ctLevel: Number(lvl.value) };
      this.syncUrl();
      this.paint();
    };
    win.addEventListener('input', onWindow);
    lvl.addEventListener('input', onWindow);

    window.addEventListener('keydown', (e) => {
      if (e.key === 'ArrowUp' || e.key === 'ArrowRight') this.step(+1);
      else if (e.key === 'ArrowDown' || e.key === 'ArrowLeft') this.step(-1);
    });
    el<HTMLCanvasElement>('view').addEventListener('wheel', (e) => {
      e.preventDefault();
      this.step(e.deltaY > 0 ? +1 : -1);
    }, { passive: false });
  }

  private step(dk: number): void {
    this.state = navigate(this.state, dk, this.planeInfo().n_slices);
    this.afterStateChange();
  }

  private scrub(th: number): void {
    this.state = setThreshold(this.state, th);
    this.syncUrl();
    // rethreshold from the cached floats only: no server round-trip
    this.paint();
    this.updateMetricsPanel();
  }

  private async switchPatient(pid: string, keepState: boolean): Promise<void> {
    try {
      this.detail = await this.api.patientDetail(pid);
    } catch (err) {
      this.showError(String(err));
      return;
    }
    const planes = Object.keys(this.detail.planes) as PlaneName[];
    const planeSel = el<HTMLSelectElement>('plane');
    planeSel.innerHTML = '';
    for (const plane of PLANES.filter((p) => planes.includes(p))) {
      const opt = document.createElement('option');
      opt.value = plane;
      opt.textContent = plane;
      planeSel.appendChild(opt);
    }
    if (!keepState || !planes.includes(this.state.plane)) {
      this.state.plane = planes[0];
    }
    this.state.patient = pid;
    this.state = { ...this.state, k: Math.min(this.state.k, this.planeInfo().n_slices) };
    planeSel.value = this.state.plane;
    this.afterStateChange();
  }

  private afterStateChange(): void {
    this.syncUrl();
    this.refreshControls();
    void this.loadAndPaint();
  }

  private refreshControls(): void {
    const info = this.planeInfo();
    const kSlider = el<HTMLInputElement>('slice');
    kSlider.min = '1';
    kSlider.max = String(info.n_slices);
    kSlider.value = String(this.state.k);
    el<HTMLSpanElement>('slice-label').textContent = `${this.state.k} / ${info.n_slices}`;
    el<HTMLInputElement>('threshold').value = String(this.state.th);
    el<HTMLSpanElement>('threshold-label').textContent = this.state.th.toFixed(2);
    for (const name of ['ct', 'pet', 'heat', 'gtContour', 'predContour'] as const) {
      el<HTMLInputElement>(`layer-${name}`).checked = this.state.layers[name];
    }
  }

  private syncUrl(): void {
    history.replaceState(null, '', `?${encodeState(this.state)}`);
  }

  private async loadAndPaint(): Promise<void> {
    const { patient, plane, k } = this.state;
    const info = this.planeInfo();
    const ticket = this.gate.next();
    try {
      const slice = await this.store.get(patient, plane, k, info.rows, info.cols);
      if (!this.gate.isCurrent(ticket)) return; // a newer view superseded us
      this.current = slice;
      this.clearError();
      this.paint();
      this.updateMetricsPanel();
      // warm the neighbors; at most two speculative loads
      for (const nk of prefetchTargets(k, info.n_slices)) {
        void this.store.get(patient, plane, nk, info.rows, info.cols).catch(() => undefined);
      }
    } catch (err) {
      if (this.gate.isCurrent(ticket)) this.showError(String(err)); // stale frame stays up
    }
  }

  private paint(): void {
    if (!this.current) return;
    const data: SliceData = {
      images: { ct: this.current.ct, pet: this.current.pet },
      probs: this.current.probs,
      gtContours: this.state.layers.gtContour ? this.current.gtContours : [],
      width: this.current.width,
      height: this.current.height,
    };
    const canvas = el<HTMLCanvasElement>('view');
    const scale = Math.max(1, Math.floor(512 / this.current.width));
    composite(canvas, data, {
      layers: this.state.layers,
      th: this.state.th,
      ctWindow: this.state.ctWindow,
      ctLevel: this.state.ctLevel,
      scale,
    });
    drawLegend(el<HTMLCanvasElement>('legend'), this.state.th);
  }

  private updateMetricsPanel(): void {
    const slice = this.current;
    if (!slice) return;
    const dscEl = el<HTMLSpanElement>('metric-slice-dsc');
    if (this.state.layers.gtContour) {
      dscEl.textContent = sliceDsc(slice.probs, slice.gt, this.state.th).toFixed(4);
    } else {
      dscEl.textContent = '-';
    }
    const ticket = this.metricsGate.next();
    this.api.metrics(this.state.patient, this.state.plane, this.state.th)
      .then((row) => {
        if (!this.metricsGate.isCurrent(ticket)) return;
        el<HTMLSpanElement>('metric-th').textContent = row.threshold.toFixed(1);
        el<HTMLSpanElement>('metric-mean-dsc').textContent = row.mean_dsc.toFixed(4);
        el<HTMLSpanElement>('metric-precision').textContent = row.precision.toFixed(4);
        el<HTMLSpanElement>('metric-recall').textContent = row.recall.toFixed(4);
      })
      .catch(() => undefined); // panel keeps the last good row
  }

  private showError(message: string): void {
    const banner = el<HTMLDivElement>('error-banner');
    banner.textContent = message;
    banner.style.display = 'block';
  }

  private clearError(): void {
    el<HTMLDivElement>('error-banner').style.display = 'none';
  }
}

export function boot(): void {
  const params = new URLSearchParams(window.location.search);
  const api = new ApiClient(params.get('api') ?? '');
  void new ViewerApp(api).start();
}
