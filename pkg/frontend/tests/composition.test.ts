import { describe, expect, it } from "vitest";

import {
  addPatch,
  bringToFront,
  emptyComposition,
  expectedMaskFootprint,
  masksEqual,
  passthroughBaker,
  removePatch,
  scaledSize,
  toCompositionDoc,
} from "../src/composition.js";

const DUMMY_URL = "data:image/png;base64,AAAA";

function makePatch(overrides: Partial<Parameters<typeof addPatch>[1]> = {}) {
  return {
    dataUrl: DUMMY_URL,
    width: 3,
    height: 3,
    x: 0,
    y: 0,
    scale: 1,
    opaque: true,
    ...overrides,
  };
}

describe("composition model", () => {
  it("assigns increasing z-order to added patches", () => {
    const comp = emptyComposition(8, 8);
    const a = addPatch(comp, makePatch());
    const b = addPatch(comp, makePatch({ x: 2 }));
    expect(b.z).toBeGreaterThan(a.z);
  });

  it("bringToFront raises z above everything else", () => {
    const comp = emptyComposition(8, 8);
    const a = addPatch(comp, makePatch());
    const b = addPatch(comp, makePatch({ x: 2 }));
    bringToFront(comp, a.id);
    expect(a.z).toBeGreaterThan(b.z);
  });

  it("removePatch drops the patch", () => {
    const comp = emptyComposition(8, 8);
    const a = addPatch(comp, makePatch());
    removePatch(comp, a.id);
    expect(comp.patches).toHaveLength(0);
  });

  it("scaledSize rounds and never collapses to zero", () => {
    expect(scaledSize(makePatch({ scale: 2 }) as never)).toEqual({ w: 6, h: 6 });
    expect(scaledSize(makePatch({ width: 1, height: 1, scale: 0.25 }) as never)).toEqual({
      w: 1,
      h: 1,
    });
  });

  it("serializes placements sorted by z with integer coordinates", async () => {
    const comp = emptyComposition(16, 12);
    comp.background = 0.5;
    addPatch(comp, makePatch({ x: 4.4, y: 2.6 }));
    const first = comp.patches[0];
    addPatch(comp, makePatch({ x: 1 }));
    bringToFront(comp, first.id);
    const doc = await toCompositionDoc(comp);
    expect(doc.canvas).toEqual({ w: 16, h: 12 });
    expect(doc.background).toBe(0.5);
    expect(doc.placements.map((p) => p.z)).toEqual([...doc.placements.map((p) => p.z)].sort((a, b) => a - b));
    const top = doc.placements[doc.placements.length - 1];
    expect(top.x).toBe(4);
    expect(top.y).toBe(3);
  });

  it("passthrough baker refuses scaled patches", async () => {
    const comp = emptyComposition(8, 8);
    addPatch(comp, makePatch({ scale: 2 }));
    await expect(toCompositionDoc(comp, passthroughBaker)).rejects.toThrow(/scale/);
  });

  it("computes the 8x8 fixture footprint with clipping", () => {
    const comp = emptyComposition(8, 8);
    addPatch(comp, makePatch({ x: 2, y: 1 })); // 3x3 at (2,1)
    addPatch(comp, makePatch({ width: 4, height: 4, x: 6, y: 6 })); // clipped corner
    const mask = expectedMaskFootprint(comp);
    const expected = [
      [0, 0, 0, 0, 0, 0, 0, 0],
      [0, 0, 1, 1, 1, 0, 0, 0],
      [0, 0, 1, 1, 1, 0, 0, 0],
      [0, 0, 1, 1, 1, 0, 0, 0],
      [0, 0, 0, 0, 0, 0, 0, 0],
      [0, 0, 0, 0, 0, 0, 0, 0],
      [0, 0, 0, 0, 0, 0, 1, 1],
      [0, 0, 0, 0, 0, 0, 1, 1],
    ];
    expect(masksEqual(mask, expected)).toBe(true);
  });

  it("footprint accounts for client-side scaling", () => {
    const comp = emptyComposition(8, 8);
    addPatch(comp, makePatch({ width: 2, height: 2, scale: 2, x: 1, y: 1 }));
    const mask = expectedMaskFootprint(comp);
    let count = 0;
    for (const row of mask) for (const v of row) count += v;
    expect(count).toBe(16); // 4x4 after scaling
  });

  it("alpha patches are excluded from the pure footprint", () => {
    const comp = emptyComposition(8, 8);
    addPatch(comp, makePatch({ opaque: false }));
    const mask = expectedMaskFootprint(comp);
    expect(mask.flat().every((v) => v === 0)).toBe(true);
  });
});
