// App wiring: palette, composer board, strategy selector, job submission,
// progress watching with snapshot previews, and the preset comparison grid.

import { PaintApi, formatOps } from "./api.js";
import { canvasBaker } from "./bake.js";
import { Board } from "./board.js";
import { COMPARE_PRESETS, runComparison } from "./compare.js";
import { emptyComposition, toCompositionDoc } from "./composition.js";
import type { JobConfig, StrategyPreset } from "./types.js";
import { progressPercent, watchJob } from "./watch.js";

const api = new PaintApi("");

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

async function loadPalette(): Promise<void> {
  const palette = el<HTMLDivElement>("palette");
  for (const patch of await api.patches()) {
    const img = document.createElement("img");
    img.src = patch.rgba_data_url;
    img.title = patch.name;
    img.className = "palette-patch";
    img.draggable = true;
    img.addEventListener("dragstart", (e) => {
      e.dataTransfer?.setData(
        "application/x-diffpaint-patch",
        JSON.stringify({ dataUrl: patch.rgba_data_url, opaque: false }),
      );
    });
    palette.appendChild(img);
  }
}

async function loadStrategies(): Promise<StrategyPreset[]> {
  const presets = await api.strategies();
  const select = el<HTMLSelectElement>("strategy");
  for (const preset of presets) {
    const option = document.createElement("option");
    option.value = preset.strategy;
    option.textContent = `${preset.strategy} (${formatOps(preset.ops.n_total)})`;
    select.appendChild(option);
  }
  select.value = "stop:100";
  return presets;
}

function currentConfig(): JobConfig {
  return {
    strategy: el<HTMLSelectElement>("strategy").value,
    lambda: Number(el<HTMLInputElement>("lambda").value),
    repeats: Number(el<HTMLInputElement>("repeats").value),
    seed: Number(el<HTMLInputElement>("seed").value),
    snapshots: true,
  };
}

async function submit(board: Board): Promise<void> {
  const status = el<HTMLDivElement>("status");
  const bar = el<HTMLProgressElement>("progress");
  const result = el<HTMLImageElement>("result");
  const preview = el<HTMLImageElement>("preview");
  status.textContent = "submitting…";
  try {
    const doc = await toCompositionDoc(board.comp, canvasBaker);
    const id = await api.createJob(doc, currentConfig());
    status.textContent = `job ${id} queued`;
    const record = await watchJob(api, id, {
      intervalMs: 1000,
      onUpdate: (r) => {
        bar.value = progressPercent(r);
        status.textContent = `job ${id}: ${r.state} ${progressPercent(r)}%`;
        if (r.n_snapshots > 0) {
          preview.src = api.snapshotUrl(id, r.n_snapshots - 1) + `?t=${Date.now()}`;
        }
      },
    });
    if (record.state === "done") {
      result.src = api.resultUrl(id) + `?t=${Date.now()}`;
      status.textContent = `job ${id} done (${formatOps(record.result?.ops.n_total ?? 0)})`;
    } else {
      status.textContent = `job ${id} ${record.state}: ${record.error ?? ""}`;
    }
  } catch (err) {
    status.textContent = `error: ${(err as Error).message}`;
  }
}

async function compare(board: Board): Promise<void> {
  const grid = el<HTMLDivElement>("compare-grid");
  const status = el<HTMLDivElement>("status");
  grid.textContent = "";
  status.textContent = `comparing ${COMPARE_PRESETS.join(", ")}…`;
  const doc = await toCompositionDoc(board.comp, canvasBaker);
  const entries = await runComparison(api, doc, currentConfig(), COMPARE_PRESETS, {
    intervalMs: 1000,
  });
  for (const entry of entries) {
    const cell = document.createElement("figure");
    cell.className = "compare-cell";
    if (entry.resultUrl) {
      const img = document.createElement("img");
      img.src = entry.resultUrl;
      cell.appendChild(img);
    }
    const caption = document.createElement("figcaption");
    caption.textContent = `${entry.strategy} — ${entry.nTotal != null ? formatOps(entry.nTotal) : entry.record.state}`;
    cell.appendChild(caption);
    grid.appendChild(cell);
  }
  status.textContent = "comparison done";
}

async function init(): Promise<void> {
  const comp = emptyComposition(64, 64);
  const board = new Board(el<HTMLCanvasElement>("board"), comp);
  el<HTMLInputElement>("canvas-w").addEventListener("change", (e) => {
    comp.canvasWidth = Number((e.target as HTMLInputElement).value);
    void board.render();
  });
  el<HTMLInputElement>("canvas-h").addEventListener("change", (e) => {
    comp.canvasHeight = Number((e.target as HTMLInputElement).value);
    void board.render();
  });
  el<HTMLButtonElement>("delete").addEventListener("click", () => board.deleteSelected());
  el<HTMLInputElement>("scale").addEventListener("input", (e) => {
    board.scaleSelected(Number((e.target as HTMLInputElement).value));
  });
  el<HTMLButtonElement>("submit").addEventListener("click", () => void submit(board));
  el<HTMLButtonElement>("compare").addEventListener("click", () => void compare(board));

  await Promise.all([loadPalette(), loadStrategies()]);
  await board.render();
}

void init();
