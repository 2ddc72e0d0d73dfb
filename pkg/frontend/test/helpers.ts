import { mkdtempSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { inflateSync } from "node:zlib";

/** Minimal PNG decoder for test assertions (filter-0 RGBA only). */
export function decodePng(buf: Buffer): { width: number; height: number; rgba: Uint8Array } {
  const sig = buf.subarray(0, 8);
  if (sig[0] !== 0x89 || sig[1] !== 0x50) throw new Error("not a png");
  let off = 8;
  let width = 0;
  let height = 0;
  const idat: Buffer[] = [];
  while (off < buf.length) {
    const len = buf.readUInt32BE(off);
    const type = buf.subarray(off + 4, off + 8).toString("ascii");
    const data = buf.subarray(off + 8, off + 8 + len);
    if (type === "IHDR") {
      width = data.readUInt32BE(0);
      height = data.readUInt32BE(4);
      if (data[8] !== 8 || data[9] !== 6) throw new Error("expected 8-bit RGBA");
    } else if (type === "IDAT") {
      idat.push(Buffer.from(data));
    }
    off += 12 + len;
  }
  const raw = inflateSync(Buffer.concat(idat));
  const stride = width * 4;
  const rgba = new Uint8Array(width * height * 4);
  for (let y = 0; y < height; y++) {
    if (raw[y * (stride + 1)] !== 0) throw new Error("expected filter 0");
    rgba.set(raw.subarray(y * (stride + 1) + 1, (y + 1) * (stride + 1)), y * stride);
  }
  return { width, height, rgba };
}

export function countColor(rgba: Uint8Array, [r, g, b]: number[], tol = 30): number {
  let n = 0;
  for (let i = 0; i < rgba.length; i += 4) {
    if (
      Math.abs(rgba[i] - r) <= tol &&
      Math.abs(rgba[i + 1] - g) <= tol &&
      Math.abs(rgba[i + 2] - b) <= tol
    ) {
      n++;
    }
  }
  return n;
}

function csv(header: string, rows: (string | number)[][]): string {
  return [header, ...rows.map((r) => r.join(","))].join("\n") + "\n";
}

/** Build a synthetic but schema-correct run directory for figure tests. */
export function makeRunDir(): string {
  const dir = mkdtempSync(join(tmpdir(), "tdqmc-run-"));
  writeFileSync(
    join(dir, "resolved-config.json"),
    JSON.stringify({ seed: 4242, mode: "compare-fig3" }, null, 2),
  );

  const times = Array.from({ length: 40 }, (_, i) => i * 0.5);
  const survRows: (string | number)[][] = [];
  const cohRows: (string | number)[][] = [];
  for (const engine of ["tdqmc", "exact"]) {
    const bump = engine === "tdqmc" ? 0.02 : 0.0;
    for (const t of times) {
      survRows.push([t, 1.0 - 0.012 * t + bump, engine]);
      cohRows.push([t, Math.exp(-0.05 * t) + bump, engine]);
    }
  }
  writeFileSync(join(dir, "survival.csv"), csv("t,value,engine", survRows));
  writeFileSync(join(dir, "coherence.csv"), csv("t,value,engine", cohRows));

  const trajTimes = Array.from({ length: 21 }, (_, i) => i * 0.2);
  for (const engine of ["tdqmc", "exact"]) {
    const shift = engine === "tdqmc" ? 0.3 : 0.0;
    const rows = trajTimes.map((t) => [
      t,
      ...Array.from({ length: 5 }, (_, k) => (k - 2) * (1 + t) + shift * t),
    ]);
    writeFileSync(
      join(dir, `trajectories_${engine}.csv`),
      csv("t," + Array.from({ length: 5 }, (_, k) => `traj_${k}`).join(","), rows),
    );
  }
  const xs = Array.from({ length: 101 }, (_, i) => -10 + 0.2 * i);
  const densRows = (s: number) =>
    xs.map((x) => [x, Math.exp((-x * x) / s), Math.exp((-x * x) / (s * 1.05))]);
  writeFileSync(join(dir, "densities_initial.csv"), csv("x,tdqmc,exact", densRows(2)));
  writeFileSync(join(dir, "densities_final.csv"), csv("x,tdqmc,exact", densRows(18)));

  writeFileSync(
    join(dir, "alpha_scan.csv"),
    csv("alpha,E0,E_std", [
      [0.25, -2.241, 5e-4],
      [0.5, -2.225, 5e-4],
      [1.0, -2.221, 5e-4],
      [2.0, -2.2, 5e-4],
      [10000.0, -2.224, 5e-4],
    ]),
  );
  return dir;
}
