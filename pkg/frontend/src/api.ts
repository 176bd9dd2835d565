// Thin client over the paint service HTTP API.

import type {
  CompositionDoc,
  JobConfig,
  JobRecord,
  PatchInfo,
  RasterizeEcho,
  StrategyPreset,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public status: number,
    message: string,
  ) {
    super(message);
  }
}

async function asJson<T>(resp: Response): Promise<T> {
  const body = await resp.json().catch(() => ({}));
  if (!resp.ok) {
    const detail = (body as { error?: string }).error ?? resp.statusText;
    throw new ApiError(resp.status, detail);
  }
  return body as T;
}

export class PaintApi {
  constructor(private baseUrl: string = "") {}

  private url(path: string): string {
    return `${this.baseUrl}${path}`;
  }

  async createJob(spec: CompositionDoc, config: JobConfig = {}): Promise<string> {
    const resp = await fetch(this.url("/jobs"), {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ spec, config }),
    });
    const body = await asJson<{ id: string }>(resp);
    return body.id;
  }

  async getJob(id: string): Promise<JobRecord> {
    return asJson<JobRecord>(await fetch(this.url(`/jobs/${id}`)));
  }

  resultUrl(id: string): string {
    return this.url(`/jobs/${id}/result.png`);
  }

  snapshotUrl(id: string, index: number): string {
    return this.url(`/jobs/${id}/snapshots/${index}.png`);
  }

  async cancel(id: string): Promise<void> {
    await asJson(await fetch(this.url(`/jobs/${id}/cancel`), { method: "POST" }));
  }

  async strategies(): Promise<StrategyPreset[]> {
    return asJson<StrategyPreset[]>(await fetch(this.url("/strategies")));
  }

  async patches(): Promise<PatchInfo[]> {
    return asJson<PatchInfo[]>(await fetch(this.url("/patches")));
  }

  async rasterizeEcho(spec: CompositionDoc): Promise<RasterizeEcho> {
    const resp = await fetch(this.url("/rasterize"), {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(spec),
    });
    return asJson<RasterizeEcho>(resp);
  }

  async fetchPng(url: string): Promise<Uint8Array> {
    const resp = await fetch(url);
    if (!resp.ok) throw new ApiError(resp.status, `cannot fetch ${url}`);
    return new Uint8Array(await resp.arrayBuffer());
  }
}

export function formatOps(nTotal: number): string {
  return `${nTotal} ops`;
}
