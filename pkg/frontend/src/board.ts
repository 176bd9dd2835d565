// Composer board: place, move, scale, reorder and delete landmark patches on
// a zoomed pixel canvas, with a live overlay of the keep-region.

import { loadImage } from "./bake.js";
import {
  addPatch,
  bringToFront,
  removePatch,
  scaledSize,
  type PlacedPatch,
  type UiComposition,
} from "./composition.js";

const ALPHA_THRESHOLD = 128; // byte scale, matches the server's 0.5 cut

export class Board {
  zoom = 8;
  selectedId: string | null = null;
  onChange: () => void = () => {};

  private images = new Map<string, HTMLImageElement>();
  private dragging: { id: string; dx: number; dy: number } | null = null;

  constructor(
    public canvas: HTMLCanvasElement,
    public comp: UiComposition,
  ) {
    canvas.addEventListener("mousedown", (e) => this.onMouseDown(e));
    canvas.addEventListener("mousemove", (e) => this.onMouseMove(e));
    window.addEventListener("mouseup", () => (this.dragging = null));
    canvas.addEventListener("dragover", (e) => e.preventDefault());
    canvas.addEventListener("drop", (e) => this.onDrop(e));
  }

  private toCanvasCoords(e: MouseEvent): { x: number; y: number } {
    const rect = this.canvas.getBoundingClientRect();
    return {
      x: Math.floor((e.clientX - rect.left) / this.zoom),
      y: Math.floor((e.clientY - rect.top) / this.zoom),
    };
  }

  private hit(x: number, y: number): PlacedPatch | null {
    const sorted = [...this.comp.patches].sort((a, b) => b.z - a.z);
    for (const patch of sorted) {
      const { w, h } = scaledSize(patch);
      if (x >= patch.x && x < patch.x + w && y >= patch.y && y < patch.y + h) return patch;
    }
    return null;
  }

  private onMouseDown(e: MouseEvent): void {
    const { x, y } = this.toCanvasCoords(e);
    const patch = this.hit(x, y);
    this.selectedId = patch?.id ?? null;
    if (patch) {
      this.dragging = { id: patch.id, dx: x - patch.x, dy: y - patch.y };
      bringToFront(this.comp, patch.id);
    }
    this.render();
    this.onChange();
  }

  private onMouseMove(e: MouseEvent): void {
    if (!this.dragging) return;
    const patch = this.comp.patches.find((p) => p.id === this.dragging!.id);
    if (!patch) return;
    const { x, y } = this.toCanvasCoords(e);
    patch.x = x - this.dragging.dx;
    patch.y = y - this.dragging.dy;
    this.render();
    this.onChange();
  }

  private async onDrop(e: DragEvent): Promise<void> {
    e.preventDefault();
    const payload = e.dataTransfer?.getData("application/x-diffpaint-patch");
    if (!payload) return;
    const info = JSON.parse(payload) as { dataUrl: string; opaque: boolean };
    const img = await loadImage(info.dataUrl);
    const { x, y } = this.toCanvasCoords(e as unknown as MouseEvent);
    const placed = addPatch(this.comp, {
      dataUrl: info.dataUrl,
      width: img.width,
      height: img.height,
      x: x - Math.floor(img.width / 2),
      y: y - Math.floor(img.height / 2),
      scale: 1,
      opaque: info.opaque,
    });
    this.selectedId = placed.id;
    this.render();
    this.onChange();
  }

  deleteSelected(): void {
    if (!this.selectedId) return;
    removePatch(this.comp, this.selectedId);
    this.selectedId = null;
    this.render();
    this.onChange();
  }

  scaleSelected(scale: number): void {
    const patch = this.comp.patches.find((p) => p.id === this.selectedId);
    if (!patch) return;
    patch.scale = scale;
    this.render();
    this.onChange();
  }

  async render(): Promise<void> {
    const { canvasWidth: w, canvasHeight: h } = this.comp;
    this.canvas.width = w * this.zoom;
    this.canvas.height = h * this.zoom;
    const ctx = this.canvas.getContext("2d");
    if (!ctx) return;
    ctx.imageSmoothingEnabled = false;

    const bg = Math.round(((this.comp.background + 1) / 2) * 255);
    ctx.fillStyle = `rgb(${bg},${bg},${bg})`;
    ctx.fillRect(0, 0, this.canvas.width, this.canvas.height);

    const overlay = new Uint8Array(w * h);
    for (const patch of [...this.comp.patches].sort((a, b) => a.z - b.z)) {
      const img = await this.imageFor(patch);
      const { w: pw, h: ph } = scaledSize(patch);
      ctx.drawImage(img, patch.x * this.zoom, patch.y * this.zoom, pw * this.zoom, ph * this.zoom);
      this.stampFootprint(overlay, patch, img);
    }

    // translucent keep-region overlay
    ctx.fillStyle = "rgba(80, 200, 120, 0.25)";
    for (let y = 0; y < h; y++) {
      for (let x = 0; x < w; x++) {
        if (overlay[y * w + x]) ctx.fillRect(x * this.zoom, y * this.zoom, this.zoom, this.zoom);
      }
    }

    const selected = this.comp.patches.find((p) => p.id === this.selectedId);
    if (selected) {
      const { w: pw, h: ph } = scaledSize(selected);
      ctx.strokeStyle = "#ffb000";
      ctx.lineWidth = 2;
      ctx.strokeRect(selected.x * this.zoom, selected.y * this.zoom, pw * this.zoom, ph * this.zoom);
    }
  }

  private async imageFor(patch: PlacedPatch): Promise<HTMLImageElement> {
    let img = this.images.get(patch.dataUrl);
    if (!img) {
      img = await loadImage(patch.dataUrl);
      this.images.set(patch.dataUrl, img);
    }
    return img;
  }

  private stampFootprint(overlay: Uint8Array, patch: PlacedPatch, img: HTMLImageElement): void {
    const { canvasWidth: w, canvasHeight: h } = this.comp;
    const { w: pw, h: ph } = scaledSize(patch);
    const off = document.createElement("canvas");
    off.width = pw;
    off.height = ph;
    const octx = off.getContext("2d");
    if (!octx) return;
    octx.drawImage(img, 0, 0, pw, ph);
    const data = octx.getImageData(0, 0, pw, ph).data;
    for (let py = 0; py < ph; py++) {
      for (let px = 0; px < pw; px++) {
        const cy = patch.y + py;
        const cx = patch.x + px;
        if (cy < 0 || cy >= h || cx < 0 || cx >= w) continue;
        if (data[(py * pw + px) * 4 + 3] >= ALPHA_THRESHOLD) overlay[cy * w + cx] = 1;
      }
    }
  }
}
