/**
 * Figure builders. Color convention everywhere: TDQMC red, exact blue.
 * Each figure embeds the run seed and a config fingerprint in its footer.
 */

import { join } from "node:path";

import { BLACK, BLUE, Canvas, drawFrame, Frame, GREY, polyline, RED, toPixel } from "./canvas.js";
import { MissingInput, numeric, readBundle, readSeriesPair, readTable, resolvedConfigHash, readSeed } from "./csv.js";

const W = 900;
const PANEL_H = 300;
const MARGIN = { left: 70, right: 25, top: 40, bottom: 45 };

function frameFor(panel: number, xMin: number, xMax: number, yMin: number, yMax: number): Frame {
  const pad = (yMax - yMin) * 0.05 || 0.05;
  return {
    x0: MARGIN.left,
    y0: MARGIN.top + panel * PANEL_H,
    w: W - MARGIN.left - MARGIN.right,
    h: PANEL_H - MARGIN.top - MARGIN.bottom,
    xMin,
    xMax,
    yMin: yMin - pad,
    yMax: yMax + pad,
  };
}

function footer(c: Canvas, dir: string): void {
  const note = `seed=${readSeed(dir)}  config=${resolvedConfigHash(dir)}  tdqmc=red exact=blue`;
  c.text(MARGIN.left, c.height - 14, note, GREY);
}

function extent(arrays: number[][]): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const a of arrays) {
    for (const v of a) {
      if (v < lo) lo = v;
      if (v > hi) hi = v;
    }
  }
  return [lo, hi];
}

export function renderFig2(dir: string): Canvas {
  const td = readBundle(join(dir, "trajectories_tdqmc.csv"));
  const ex = readBundle(join(dir, "trajectories_exact.csv"));
  const densInit = readTable(join(dir, "densities_initial.csv"));
  const densFinal = readTable(join(dir, "densities_final.csv"));

  const c = new Canvas(W, 2 * PANEL_H + 20);
  const [xLo, xHi] = extent([...td.trajectories, ...ex.trajectories]);
  const fa = frameFor(0, td.times[0], td.times[td.times.length - 1], xLo, xHi);
  drawFrame(c, fa, "t (a.u.)", "x (a.u.)", "(a) trajectory bundles");
  for (const traj of ex.trajectories) polyline(c, fa, ex.times, traj, BLUE);
  for (const traj of td.trajectories) polyline(c, fa, td.times, traj, RED);

  const x = numeric(densInit, "x", "densities_initial.csv");
  const rows = [
    { tab: densInit, name: "tdqmc", color: RED, width: 1 },
    { tab: densInit, name: "exact", color: BLUE, width: 1 },
    { tab: densFinal, name: "tdqmc", color: RED, width: 3 },
    { tab: densFinal, name: "exact", color: BLUE, width: 3 },
  ];
  const [, dHi] = extent(rows.map((r) => numeric(r.tab, r.name)));
  const fb = frameFor(1, x[0], x[x.length - 1], 0, dHi);
  fb.y0 += 20;
  drawFrame(c, fb, "x (a.u.)", "density", "(b) initial (thin) and final (thick) walker densities");
  for (const r of rows) polyline(c, fb, x, numeric(r.tab, r.name), r.color, r.width);

  footer(c, dir);
  return c;
}

export function renderFig3(dir: string): Canvas {
  const surv = readSeriesPair(join(dir, "survival.csv"));
  const coh = readSeriesPair(join(dir, "coherence.csv"));

  const c = new Canvas(W, 2 * PANEL_H + 20);
  const panels: [typeof surv, string, string, number][] = [
    [surv, "(a) survival probability", "S(t)/S(0)", 0],
    [coh, "(b) coherence", "C(t)/C(0)", 1],
  ];
  for (const [pair, title, ylab, i] of panels) {
    const [lo, hi] = extent([pair.tdqmc, pair.exact]);
    const f = frameFor(i, pair.times[0], pair.times[pair.times.length - 1], Math.min(lo, 0.0), Math.max(hi, 1.0));
    if (i === 1) f.y0 += 20;
    drawFrame(c, f, "t (a.u.)", ylab, title);
    polyline(c, f, pair.times, pair.exact, BLUE, 2);
    polyline(c, f, pair.times, pair.tdqmc, RED, 2);
  }
  footer(c, dir);
  return c;
}

export function renderAlpha(dir: string): Canvas {
  const tab = readTable(join(dir, "alpha_scan.csv"));
  const alphas = numeric(tab, "alpha", "alpha_scan.csv");
  const energies = numeric(tab, "E0", "alpha_scan.csv");
  if (alphas.length === 0) throw new MissingInput("alpha_scan.csv has no rows");

  const xs = alphas.map((a) => Math.log10(a));
  const c = new Canvas(W, PANEL_H + 40);
  const [eLo, eHi] = extent([energies]);
  const f = frameFor(0, Math.min(...xs), Math.max(...xs), eLo, eHi);
  drawFrame(c, f, "log10(alpha)", "E0 (a.u.)", "ground-state energy vs window parameter");
  polyline(c, f, xs, energies, BLACK, 1);
  let best = 0;
  energies.forEach((e, i) => {
    if (e < energies[best]) best = i;
  });
  for (let i = 0; i < xs.length; i++) {
    const [px, py] = toPixel(f, xs[i], energies[i]);
    c.fillRect(px - 2, py - 2, 5, 5, i === best ? RED : BLACK);
  }
  const [bx, by] = toPixel(f, xs[best], energies[best]);
  c.text(bx + 8, by - 8, `alpha*=${alphas[best]}`, RED);
  footer(c, dir);
  return c;
}

export type FigureKind = "fig2" | "fig3" | "alpha";

export function render(kind: FigureKind, dir: string): Canvas {
  switch (kind) {
    case "fig2":
      return renderFig2(dir);
    case "fig3":
      return renderFig3(dir);
    case "alpha":
      return renderAlpha(dir);
  }
}
