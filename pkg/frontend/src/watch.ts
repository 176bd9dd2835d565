// Poll a job until it settles. Jobs run minutes at most, so a 1 s poll loop
// is plenty; the interval is injectable for tests.

import type { PaintApi } from "./api.js";
import type { JobRecord, JobState } from "./types.js";

const TERMINAL: JobState[] = ["done", "failed", "cancelled"];

export interface WatchOptions {
  intervalMs?: number;
  timeoutMs?: number;
  onUpdate?: (record: JobRecord) => void;
}

export async function watchJob(
  api: PaintApi,
  id: string,
  options: WatchOptions = {},
): Promise<JobRecord> {
  const intervalMs = options.intervalMs ?? 1000;
  const timeoutMs = options.timeoutMs ?? 30 * 60_000;
  const startedAt = Date.now();

  for (;;) {
    const record = await api.getJob(id);
    options.onUpdate?.(record);
    if (TERMINAL.includes(record.state)) return record;
    if (Date.now() - startedAt > timeoutMs) {
      throw new Error(`job ${id} timed out after ${timeoutMs} ms`);
    }
    await new Promise((resolve) => setTimeout(resolve, intervalMs));
  }
}

export function progressPercent(record: JobRecord): number {
  return Math.round(record.progress * 100);
}
