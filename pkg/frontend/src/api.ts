// Typed client for the probseg read-only HTTP API. All calls go through
// fetch; binary payloads come back as typed arrays.

export interface PlaneInfo {
  n_slices: number;
  rows: number;
  cols: number;
}

export interface PatientSummary {
  patient_id: string;
  planes: string[];
  [key: string]: unknown;
}

export interface PatientDetail {
  patient_id: string;
  planes: Record<string, PlaneInfo>;
  thresholds: number[];
  // stage/gender metadata arrives as additional flat string fields
  [key: string]: unknown;
}

export interface MetricsRow {
  requested_th: number;
  threshold: number;
  mean_dsc: number;
  precision: number;
  recall: number;
  [key: string]: unknown;
}

export class ApiClient {
  constructor(private readonly base: string = '') {}

  private async getJson<T>(path: string): Promise<T> {
    const res = await fetch(this.base + path);
    if (!res.ok) throw new Error(`GET ${path} -> ${res.status}`);
    return res.json() as Promise<T>;
  }

  listPatients(): Promise<PatientSummary[]> {
    return this.getJson('/api/patients');
  }

  patientDetail(pid: string): Promise<PatientDetail> {
    return this.getJson(`/api/patients/${encodeURIComponent(pid)}`);
  }

  imageUrl(pid: string, plane: string, k: number, layer: 'ct' | 'pet' | 'prob'): string {
    return `${this.base}/api/patients/${encodeURIComponent(pid)}/${plane}/slices/${k}/${layer}.png`;
  }

  async probFloats(pid: string, plane: string, k: number): Promise<Float32Array> {
    const path = `/api/patients/${encodeURIComponent(pid)}/${plane}/slices/${k}/prob.bin`;
    const res = await fetch(this.base + path);
    if (!res.ok) throw new Error(`GET ${path} -> ${res.status}`);
    return new Float32Array(await res.arrayBuffer());
  }

  async serverMask(pid: string, plane: string, k: number, th: number): Promise<Uint8Array> {
    const path = `/api/patients/${encodeURIComponent(pid)}/${plane}/slices/${k}/mask.bin?th=${th}`;
    const res = await fetch(this.base + path);
    if (!res.ok) throw new Error(`GET ${path} -> ${res.status}`);
    return new Uint8Array(await res.arrayBuffer());
  }

  async gtMask(pid: string, plane: string, k: number): Promise<Uint8Array> {
    const path = `/api/patients/${encodeURIComponent(pid)}/${plane}/slices/${k}/gt.bin`;
    const res = await fetch(this.base + path);
    if (!res.ok) throw new Error(`GET ${path} -> ${res.status}`);
    return new Uint8Array(await res.arrayBuffer());
  }

  async contours(pid: string, plane: string, k: number, th: number): Promise<{ predicted: number[][][]; gt: number[][][] }> {
    return this.getJson(
      `/api/patients/${encodeURIComponent(pid)}/${plane}/slices/${k}/contours?th=${th}`,
    );
  }

  metrics(pid: string, plane: string, th: number): Promise<MetricsRow> {
    return this.getJson(`/api/patients/${encodeURIComponent(pid)}/metrics?plane=${plane}&th=${th}`);
  }
}
