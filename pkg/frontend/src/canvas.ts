/** Tiny software raster canvas with just enough drawing for line plots. */

import { GLYPH_H, GLYPH_W, glyphFor } from "./font.js";
import { encodePng } from "./png.js";

export type Color = [number, number, number, number];

export const WHITE: Color = [255, 255, 255, 255];
export const BLACK: Color = [0, 0, 0, 255];
export const GREY: Color = [170, 170, 170, 255];
export const RED: Color = [214, 39, 40, 255]; // TDQMC curves
export const BLUE: Color = [31, 119, 180, 255]; // exact curves

export class Canvas {
  readonly width: number;
  readonly height: number;
  readonly pixels: Uint8Array;

  constructor(width: number, height: number, background: Color = WHITE) {
    this.width = width;
    this.height = height;
    this.pixels = new Uint8Array(width * height * 4);
    for (let i = 0; i < width * height; i++) {
      this.pixels.set(background, i * 4);
    }
  }

  set(x: number, y: number, color: Color): void {
    if (x < 0 || y < 0 || x >= this.width || y >= this.height) return;
    const a = color[3] / 255;
    const o = (y * this.width + x) * 4;
    for (let c = 0; c < 3; c++) {
      this.pixels[o + c] = Math.round(color[c] * a + this.pixels[o + c] * (1 - a));
    }
    this.pixels[o + 3] = 255;
  }

  fillRect(x0: number, y0: number, w: number, h: number, color: Color): void {
    for (let y = y0; y < y0 + h; y++) {
      for (let x = x0; x < x0 + w; x++) this.set(x, y, color);
    }
  }

  line(x0: number, y0: number, x1: number, y1: number, color: Color, width = 1): void {
    const steps = Math.max(Math.abs(x1 - x0), Math.abs(y1 - y0), 1);
    const r = Math.max(0, Math.floor(width / 2));
    for (let s = 0; s <= steps; s++) {
      const x = Math.round(x0 + ((x1 - x0) * s) / steps);
      const y = Math.round(y0 + ((y1 - y0) * s) / steps);
      for (let dy = -r; dy <= r; dy++) {
        for (let dx = -r; dx <= r; dx++) {
          this.set(x + dx, y + dy, color);
        }
      }
    }
  }

  text(x: number, y: number, msg: string, color: Color = BLACK, scale = 1): void {
    let cx = x;
    for (const ch of msg) {
      const rows = glyphFor(ch);
      for (let gy = 0; gy < GLYPH_H; gy++) {
        for (let gx = 0; gx < GLYPH_W; gx++) {
          if ((rows[gy] >> (GLYPH_W - 1 - gx)) & 1) {
            this.fillRect(cx + gx * scale, y + gy * scale, scale, scale, color);
          }
        }
      }
      cx += (GLYPH_W + 1) * scale;
    }
  }

  toPng(): Buffer {
    return encodePng(this.width, this.height, this.pixels);
  }
}

export interface Frame {
  x0: number;
  y0: number;
  w: number;
  h: number;
  xMin: number;
  xMax: number;
  yMin: number;
  yMax: number;
}

export function toPixel(f: Frame, x: number, y: number): [number, number] {
  const px = f.x0 + ((x - f.xMin) / (f.xMax - f.xMin)) * f.w;
  const py = f.y0 + f.h - ((y - f.yMin) / (f.yMax - f.yMin)) * f.h;
  return [Math.round(px), Math.round(py)];
}

function niceTicks(lo: number, hi: number, n = 5): number[] {
  const span = hi - lo;
  if (!(span > 0)) return [lo];
  const step = Math.pow(10, Math.floor(Math.log10(span / n)));
  const candidates = [step, 2 * step, 5 * step, 10 * step];
  const pick = candidates.find((s) => span / s <= n + 1) ?? 10 * step;
  const out: number[] = [];
  for (let v = Math.ceil(lo / pick) * pick; v <= hi + 1e-12; v += pick) {
    out.push(Math.abs(v) < 1e-12 ? 0 : v);
  }
  return out;
}

export function fmtTick(v: number): string {
  if (v === 0) return "0";
  const a = Math.abs(v);
  if (a >= 1000 || a < 0.01) return v.toExponential(0).replace("e+", "e");
  return parseFloat(v.toPrecision(3)).toString();
}

export function drawFrame(c: Canvas, f: Frame, xLabel: string, yLabel: string, title: string): void {
  c.line(f.x0, f.y0, f.x0, f.y0 + f.h, BLACK);
  c.line(f.x0, f.y0 + f.h, f.x0 + f.w, f.y0 + f.h, BLACK);
  c.line(f.x0 + f.w, f.y0, f.x0 + f.w, f.y0 + f.h, GREY);
  c.line(f.x0, f.y0, f.x0 + f.w, f.y0, GREY);
  for (const t of niceTicks(f.xMin, f.xMax)) {
    const [px] = toPixel(f, t, f.yMin);
    c.line(px, f.y0 + f.h, px, f.y0 + f.h + 4, BLACK);
    const label = fmtTick(t);
    c.text(px - (label.length * 6) / 2, f.y0 + f.h + 7, label);
  }
  for (const t of niceTicks(f.yMin, f.yMax)) {
    const [, py] = toPixel(f, f.xMin, t);
    c.line(f.x0 - 4, py, f.x0, py, BLACK);
    const label = fmtTick(t);
    c.text(f.x0 - 6 - label.length * 6, py - 3, label);
  }
  c.text(f.x0 + f.w / 2 - (xLabel.length * 6) / 2, f.y0 + f.h + 20, xLabel);
  c.text(f.x0 - 38, f.y0 - 14, yLabel);
  c.text(f.x0 + 8, f.y0 - 14, title);
}

export function polyline(c: Canvas, f: Frame, xs: number[], ys: number[], color: Color, width = 1): void {
  for (let i = 1; i < xs.length; i++) {
    const [ax, ay] = toPixel(f, xs[i - 1], ys[i - 1]);
    const [bx, by] = toPixel(f, xs[i], ys[i]);
    c.line(ax, ay, bx, by, color, width);
  }
}
