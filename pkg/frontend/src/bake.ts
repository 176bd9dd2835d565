// Browser pixel baker: resamples a placed patch to its displayed size with a
// 2D canvas so the server only ever sees integer placements.

import type { PixelBaker } from "./composition.js";
import { scaledSize } from "./composition.js";

export function loadImage(src: string): Promise<HTMLImageElement> {
  return new Promise((resolve, reject) => {
    const img = new Image();
    img.onload = () => resolve(img);
    img.onerror = () => reject(new Error(`cannot load image ${src.slice(0, 48)}…`));
    img.src = src;
  });
}

export const canvasBaker: PixelBaker = async (patch) => {
  const img = await loadImage(patch.dataUrl);
  const { w, h } = scaledSize(patch);
  const canvas = document.createElement("canvas");
  canvas.width = w;
  canvas.height = h;
  const ctx = canvas.getContext("2d");
  if (!ctx) throw new Error("no 2d canvas context");
  ctx.imageSmoothingEnabled = true;
  ctx.drawImage(img, 0, 0, w, h);
  return canvas.toDataURL("image/png");
};
