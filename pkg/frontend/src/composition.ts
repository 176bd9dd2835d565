// The client-side composition model: patches placed on the canvas with
// position, scale and z-order. Serialization bakes scaling into the uploaded
// pixels so the server contract stays integer-placement-only.

import type { CompositionDoc, PlacementDoc } from "./types.js";

export interface PlacedPatch {
  id: string;
  dataUrl: string; // intrinsic pixels, PNG data URL
  width: number; // intrinsic width of dataUrl
  height: number;
  x: number;
  y: number;
  scale: number; // client-side; baked into pixels on serialization
  z: number;
  opaque: boolean; // true when the patch has no alpha channel
}

export interface UiComposition {
  canvasWidth: number;
  canvasHeight: number;
  patches: PlacedPatch[];
  background: number;
}

export function emptyComposition(w = 64, h = 64): UiComposition {
  return { canvasWidth: w, canvasHeight: h, patches: [], background: 0 };
}

let nextId = 1;

export function addPatch(
  comp: UiComposition,
  patch: Omit<PlacedPatch, "id" | "z">,
): PlacedPatch {
  const placed: PlacedPatch = {
    ...patch,
    id: `p${nextId++}`,
    z: comp.patches.length ? Math.max(...comp.patches.map((p) => p.z)) + 1 : 1,
  };
  comp.patches.push(placed);
  return placed;
}

export function removePatch(comp: UiComposition, id: string): void {
  comp.patches = comp.patches.filter((p) => p.id !== id);
}

export function bringToFront(comp: UiComposition, id: string): void {
  const patch = comp.patches.find((p) => p.id === id);
  if (!patch) return;
  patch.z = Math.max(...comp.patches.map((p) => p.z)) + 1;
}

export function scaledSize(patch: PlacedPatch): { w: number; h: number } {
  return {
    w: Math.max(1, Math.round(patch.width * patch.scale)),
    h: Math.max(1, Math.round(patch.height * patch.scale)),
  };
}

/** Resample a patch's pixels to its displayed size, returning a data URL.
 * Injected so node tests can run the serializer without a DOM canvas. */
export type PixelBaker = (patch: PlacedPatch) => Promise<string>;

export const passthroughBaker: PixelBaker = async (patch) => {
  if (patch.scale !== 1) {
    throw new Error("passthrough baker cannot scale; provide a canvas baker");
  }
  return patch.dataUrl;
};

export async function toCompositionDoc(
  comp: UiComposition,
  bake: PixelBaker = passthroughBaker,
): Promise<CompositionDoc> {
  const placements: PlacementDoc[] = [];
  for (const patch of [...comp.patches].sort((a, b) => a.z - b.z)) {
    placements.push({
      image: patch.scale === 1 ? patch.dataUrl : await bake(patch),
      x: Math.round(patch.x),
      y: Math.round(patch.y),
      z: patch.z,
    });
  }
  return {
    canvas: { w: comp.canvasWidth, h: comp.canvasHeight },
    placements,
    background: comp.background,
  };
}

/** Expected keep-mask footprint for fully opaque patches: the union of the
 * clipped placement rectangles. Patches carrying alpha are excluded (their
 * footprint depends on pixel data and is resolved by the server echo). */
export function expectedMaskFootprint(comp: UiComposition): number[][] {
  const mask: number[][] = Array.from({ length: comp.canvasHeight }, () =>
    new Array<number>(comp.canvasWidth).fill(0),
  );
  for (const patch of comp.patches) {
    if (!patch.opaque) continue;
    const { w, h } = scaledSize(patch);
    const x0 = Math.max(Math.round(patch.x), 0);
    const y0 = Math.max(Math.round(patch.y), 0);
    const x1 = Math.min(Math.round(patch.x) + w, comp.canvasWidth);
    const y1 = Math.min(Math.round(patch.y) + h, comp.canvasHeight);
    for (let y = y0; y < y1; y++) {
      for (let x = x0; x < x1; x++) mask[y][x] = 1;
    }
  }
  return mask;
}

export function masksEqual(a: number[][], b: number[][]): boolean {
  if (a.length !== b.length) return false;
  return a.every((row, i) => row.length === b[i].length && row.every((v, j) => v === b[i][j]));
}
