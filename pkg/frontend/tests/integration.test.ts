// End-to-end round trip against the real paint service: authored composition
// -> server rasterize echo, strategy selector numbers, and the comparison
// grid, all through the public HTTP API. Spawns the service as a child
// process; skipped when the python package is not importable.

import { execFileSync, spawn, type ChildProcess } from "node:child_process";
import { mkdtempSync, rmSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { PNG } from "pngjs";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { PaintApi } from "../src/api.js";
import { runComparison } from "../src/compare.js";
import {
  addPatch,
  emptyComposition,
  expectedMaskFootprint,
  masksEqual,
  toCompositionDoc,
} from "../src/composition.js";

function pythonAvailable(): boolean {
  try {
    execFileSync("python3", ["-c", "import diffpaint"], { stdio: "ignore" });
    return true;
  } catch {
    return false;
  }
}

function opaquePatchDataUrl(width: number, height: number, gray: number): string {
  const png = new PNG({ width, height, colorType: 6 });
  for (let i = 0; i < width * height; i++) {
    png.data[i * 4] = gray;
    png.data[i * 4 + 1] = gray;
    png.data[i * 4 + 2] = gray;
    png.data[i * 4 + 3] = 255;
  }
  return `data:image/png;base64,${PNG.sync.write(png).toString("base64")}`;
}

const RUN = pythonAvailable();
const PORT = 8930 + (process.pid % 50);
const BASE = `http://127.0.0.1:${PORT}`;

let server: ChildProcess | null = null;
let storeDir = "";

async function waitForServer(api: PaintApi, timeoutMs = 30_000): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  for (;;) {
    try {
      await api.strategies();
      return;
    } catch {
      if (Date.now() > deadline) throw new Error("service did not come up");
      await new Promise((r) => setTimeout(r, 250));
    }
  }
}

describe.skipIf(!RUN)("service round trip", () => {
  const api = new PaintApi(BASE);

  beforeAll(async () => {
    storeDir = mkdtempSync(join(tmpdir(), "diffpaint-ui-test-"));
    server = spawn(
      "python3",
      ["-m", "diffpaint.service.cli", "serve", "--port", String(PORT), "--store", storeDir],
      { stdio: "ignore" },
    );
    await waitForServer(api);
  }, 40_000);

  afterAll(() => {
    server?.kill();
    if (storeDir) rmSync(storeDir, { recursive: true, force: true });
  });

  it("rasterizes an authored 8x8 composition to the expected mask, pixel-exact", async () => {
    const comp = emptyComposition(8, 8);
    addPatch(comp, {
      dataUrl: opaquePatchDataUrl(3, 3, 200),
      width: 3,
      height: 3,
      x: 2,
      y: 1,
      scale: 1,
      opaque: true,
    });
    addPatch(comp, {
      dataUrl: opaquePatchDataUrl(4, 4, 40),
      width: 4,
      height: 4,
      x: 6,
      y: 6, // clipped at the corner
      scale: 1,
      opaque: true,
    });
    const doc = await toCompositionDoc(comp);
    const echo = await api.rasterizeEcho(doc);
    expect(masksEqual(echo.mask, expectedMaskFootprint(comp))).toBe(true);
    expect(echo.warnings).toEqual([]);
  });

  it("strategy selector op counts equal the reference presets", async () => {
    const listing = await api.strategies();
    const byName = Object.fromEntries(listing.map((p) => [p.strategy, p.ops]));
    expect(byName["all"]).toEqual({ n_dn: 2410, n_fwd: 216, n_total: 2626 });
    expect(byName["start:150"]).toEqual({ n_dn: 1600, n_fwd: 135, n_total: 1735 });
    expect(byName["stop:100"]).toEqual({ n_dn: 1510, n_fwd: 126, n_total: 1636 });
    expect(byName["none"]).toEqual({ n_dn: 250, n_fwd: 0, n_total: 250 });
  });

  it("renders a comparison grid of four presets from one seed", async () => {
    const comp = emptyComposition(8, 8);
    addPatch(comp, {
      dataUrl: opaquePatchDataUrl(3, 3, 180),
      width: 3,
      height: 3,
      x: 2,
      y: 2,
      scale: 1,
      opaque: true,
    });
    const doc = await toCompositionDoc(comp);
    const entries = await runComparison(
      api,
      doc,
      { seed: 5, snapshots: false }, // default schedule, one seed
      ["none", "all", "start:150", "stop:100"],
      { intervalMs: 100, timeoutMs: 120_000 },
    );
    expect(entries).toHaveLength(4);
    const listing = Object.fromEntries((await api.strategies()).map((p) => [p.strategy, p.ops]));
    for (const entry of entries) {
      expect(entry.record.state).toBe("done");
      expect(entry.resultUrl).not.toBeNull();
      // the grid caption shows exactly what the server reported
      expect(entry.nTotal).toBe(listing[entry.strategy].n_total);
      const png = await api.fetchPng(entry.resultUrl!);
      expect(Array.from(png.slice(0, 8))).toEqual([0x89, 0x50, 0x4e, 0x47, 0x0d, 0x0a, 0x1a, 0x0a]);
    }
  }, 150_000);

  it("resubmitting an unchanged composition and seed is pixel-identical", async () => {
    const comp = emptyComposition(8, 8);
    addPatch(comp, {
      dataUrl: opaquePatchDataUrl(2, 2, 120),
      width: 2,
      height: 2,
      x: 3,
      y: 3,
      scale: 1,
      opaque: true,
    });
    const doc = await toCompositionDoc(comp);
    const config = { seed: 9, T: 30, strategy: "none", snapshots: false };
    const runOnce = async () => {
      const id = await api.createJob(doc, config);
      for (;;) {
        const record = await api.getJob(id);
        if (record.state === "done") return record.result!.sha256;
        if (record.state === "failed") throw new Error(record.error ?? "failed");
        await new Promise((r) => setTimeout(r, 100));
      }
    };
    expect(await runOnce()).toBe(await runOnce());
  }, 60_000);

  it("empty canvas with strategy none still renders an unconditional sample", async () => {
    const doc = await toCompositionDoc(emptyComposition(8, 8));
    const id = await api.createJob(doc, { seed: 1, T: 30, strategy: "none", snapshots: false });
    for (;;) {
      const record = await api.getJob(id);
      if (record.state === "done") {
        const png = await api.fetchPng(api.resultUrl(id));
        expect(png.length).toBeGreaterThan(0);
        return;
      }
      if (record.state === "failed") throw new Error(record.error ?? "failed");
      await new Promise((r) => setTimeout(r, 100));
    }
  }, 60_000);
});
