// Wire types shared with the paint service. The UI never computes diffusion
// math; every number shown (op counts, progress) comes from these payloads.

export interface OpCountReport {
  n_dn: number;
  n_fwd: number;
  n_total: number;
}

export interface StrategyPreset {
  strategy: string;
  T: number;
  lambda: number;
  repeats: number;
  ops: OpCountReport;
}

export type JobState = "queued" | "running" | "done" | "failed" | "cancelled";

export interface JobRecord {
  id: string;
  state: JobState;
  progress: number;
  spec: CompositionDoc;
  config: Record<string, unknown>;
  error: string | null;
  n_snapshots: number;
  warnings: string[];
  result: { png: string; sha256: string; ops: OpCountReport } | null;
}

export interface PlacementDoc {
  image: string; // PNG data URL (client-side scaling already baked in)
  x: number;
  y: number;
  z: number;
}

export interface CompositionDoc {
  canvas: { w: number; h: number };
  placements: PlacementDoc[];
  background: number;
}

export interface JobConfig {
  strategy?: string;
  lambda?: number;
  repeats?: number;
  seed?: number;
  T?: number;
  denoiser?: string | Record<string, unknown>;
  snapshots?: boolean;
}

export interface PatchInfo {
  name: string;
  data_url: string;
  rgba_data_url: string;
}

export interface RasterizeEcho {
  mask: number[][];
  known_png: string;
  warnings: string[];
}
