// Strategy comparison: run one composition under several presets with one
// seed and collect results side by side with their server-reported op counts.

import type { PaintApi } from "./api.js";
import type { CompositionDoc, JobConfig, JobRecord } from "./types.js";
import { watchJob, type WatchOptions } from "./watch.js";

export const COMPARE_PRESETS = ["none", "all", "start:150", "stop:100"] as const;

export interface CompareEntry {
  strategy: string;
  record: JobRecord;
  resultUrl: string | null;
  nTotal: number | null;
}

export async function runComparison(
  api: PaintApi,
  spec: CompositionDoc,
  baseConfig: JobConfig,
  strategies: readonly string[] = COMPARE_PRESETS,
  watchOptions: WatchOptions = {},
): Promise<CompareEntry[]> {
  const ids = await Promise.all(
    strategies.map((strategy) => api.createJob(spec, { ...baseConfig, strategy })),
  );
  const records = await Promise.all(ids.map((id) => watchJob(api, id, watchOptions)));
  return records.map((record, i) => ({
    strategy: strategies[i],
    record,
    resultUrl: record.state === "done" ? api.resultUrl(record.id) : null,
    nTotal: record.result?.ops.n_total ?? null,
  }));
}
