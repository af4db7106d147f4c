import { ManifoldData } from "./types.js";

/** Canvas scatter plot of the embedded materials with a draggable cursor.
 * Screen/data transforms keep a margin so edge points stay clickable. */
export class ManifoldView {
  private data: ManifoldData | null = null;
  private cursor: [number, number] | null = null;
  private dragging = false;
  private readonly margin = 24;

  constructor(
    private readonly canvas: HTMLCanvasElement,
    private readonly onDrag: (x: number, y: number) => void,
  ) {
    canvas.addEventListener("pointerdown", (e) => {
      this.dragging = true;
      canvas.setPointerCapture(e.pointerId);
      this.emit(e);
    });
    canvas.addEventListener("pointermove", (e) => {
      if (this.dragging) this.emit(e);
    });
    canvas.addEventListener("pointerup", (e) => {
      this.dragging = false;
      canvas.releasePointerCapture(e.pointerId);
    });
  }

  setData(data: ManifoldData): void {
    this.data = data;
    this.draw();
  }

  setCursor(pt: [number, number] | null): void {
    this.cursor = pt;
    this.draw();
  }

  private bounds(): [number, number, number, number] {
    if (!this.data) return [0, 0, 1, 1];
    return this.data.bounding_box;
  }

  private toScreen(x: number, y: number): [number, number] {
    const [x0, y0, x1, y1] = this.bounds();
    const w = this.canvas.width - 2 * this.margin;
    const h = this.canvas.height - 2 * this.margin;
    const sx = this.margin + ((x - x0) / (x1 - x0 || 1)) * w;
    const sy = this.canvas.height - this.margin - ((y - y0) / (y1 - y0 || 1)) * h;
    return [sx, sy];
  }

  private toData(sx: number, sy: number): [number, number] {
    const [x0, y0, x1, y1] = this.bounds();
    const w = this.canvas.width - 2 * this.margin;
    const h = this.canvas.height - 2 * this.margin;
    const x = x0 + ((sx - this.margin) / (w || 1)) * (x1 - x0);
    const y = y0 + ((this.canvas.height - this.margin - sy) / (h || 1)) * (y1 - y0);
    return [x, y];
  }

  private emit(e: PointerEvent): void {
    const rect = this.canvas.getBoundingClientRect();
    const scaleX = this.canvas.width / rect.width;
    const scaleY = this.canvas.height / rect.height;
    const [x, y] = this.toData(
      (e.clientX - rect.left) * scaleX,
      (e.clientY - rect.top) * scaleY,
    );
    this.cursor = [x, y];
    this.draw();
    this.onDrag(x, y);
  }

  /** Data point nearest to screen coordinates, for snap-to-material clicks. */
  nearestMaterial(x: number, y: number): { name: string; index: number } | null {
    if (!this.data) return null;
    let best = -1;
    let bestDist = Infinity;
    this.data.points.forEach(([px, py], i) => {
      const d = (px - x) ** 2 + (py - y) ** 2;
      if (d < bestDist) {
        bestDist = d;
        best = i;
      }
    });
    return best >= 0 ? { name: this.data.names[best], index: best } : null;
  }

  private draw(): void {
    const ctx = this.canvas.getContext("2d");
    if (!ctx) return;
    ctx.clearRect(0, 0, this.canvas.width, this.canvas.height);
    ctx.fillStyle = "#181a1f";
    ctx.fillRect(0, 0, this.canvas.width, this.canvas.height);
    if (!this.data) return;

    ctx.fillStyle = "#e04a3f";
    for (const [x, y] of this.data.points) {
      const [sx, sy] = this.toScreen(x, y);
      ctx.beginPath();
      ctx.arc(sx, sy, 4, 0, Math.PI * 2);
      ctx.fill();
    }
    if (this.cursor) {
      const [sx, sy] = this.toScreen(this.cursor[0], this.cursor[1]);
      ctx.strokeStyle = "#4ab3ff";
      ctx.lineWidth = 2;
      ctx.beginPath();
      ctx.arc(sx, sy, 8, 0, Math.PI * 2);
      ctx.stroke();
      ctx.beginPath();
      ctx.moveTo(sx - 12, sy);
      ctx.lineTo(sx + 12, sy);
      ctx.moveTo(sx, sy - 12);
      ctx.lineTo(sx, sy + 12);
      ctx.stroke();
    }
  }
}
