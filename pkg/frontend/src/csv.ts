/** Readers for the run artifacts: plain CSV files with JSON header sidecars. */

import { existsSync, readFileSync } from "node:fs";
import { join } from "node:path";

export class MissingInput extends Error {}
export class SchemaMismatch extends Error {}

export interface Table {
  names: string[];
  columns: string[][];
}

export function readTable(path: string): Table {
  if (!existsSync(path)) {
    throw new MissingInput(`missing input file: ${path}`);
  }
  const lines = readFileSync(path, "utf-8")
    .split("\n")
    .map((l) => l.trim())
    .filter((l) => l.length > 0);
  if (lines.length < 1) {
    throw new SchemaMismatch(`${path}: empty file`);
  }
  const names = lines[0].split(",");
  const columns: string[][] = names.map(() => []);
  for (const line of lines.slice(1)) {
    const parts = line.split(",");
    if (parts.length !== names.length) {
      throw new SchemaMismatch(`${path}: row has ${parts.length} fields, header has ${names.length}`);
    }
    parts.forEach((v, i) => columns[i].push(v));
  }
  return { names, columns };
}

export function numeric(table: Table, name: string, path = "<table>"): number[] {
  const idx = table.names.indexOf(name);
  if (idx < 0) {
    throw new SchemaMismatch(`${path}: missing column '${name}' (have ${table.names.join(",")})`);
  }
  return table.columns[idx].map((v) => {
    const x = Number(v);
    if (Number.isNaN(x)) throw new SchemaMismatch(`${path}: non-numeric value '${v}' in '${name}'`);
    return x;
  });
}

export function strings(table: Table, name: string, path = "<table>"): string[] {
  const idx = table.names.indexOf(name);
  if (idx < 0) {
    throw new SchemaMismatch(`${path}: missing column '${name}'`);
  }
  return table.columns[idx];
}

export interface SeriesPair {
  times: number[];
  tdqmc: number[];
  exact: number[];
}

/** Long-format series (t, value, engine) split by engine; stamps must agree. */
export function readSeriesPair(path: string): SeriesPair {
  const tab = readTable(path);
  const t = numeric(tab, "t", path);
  const v = numeric(tab, "value", path);
  const eng = strings(tab, "engine", path);
  const td: { t: number; v: number }[] = [];
  const ex: { t: number; v: number }[] = [];
  eng.forEach((e, i) => {
    if (e === "tdqmc") td.push({ t: t[i], v: v[i] });
    else if (e === "exact") ex.push({ t: t[i], v: v[i] });
    else throw new SchemaMismatch(`${path}: unknown engine tag '${e}'`);
  });
  if (td.length === 0 || ex.length === 0) {
    throw new SchemaMismatch(`${path}: need both engines' series`);
  }
  if (td.length !== ex.length || td.some((p, i) => p.t !== ex[i].t)) {
    throw new SchemaMismatch(`${path}: engines disagree on time stamps`);
  }
  return {
    times: td.map((p) => p.t),
    tdqmc: td.map((p) => p.v),
    exact: ex.map((p) => p.v),
  };
}

export interface Bundle {
  times: number[];
  trajectories: number[][]; // [traj][time]
}

export function readBundle(path: string): Bundle {
  const tab = readTable(path);
  const times = numeric(tab, "t", path);
  const names = tab.names.filter((n) => n.startsWith("traj_"));
  if (names.length === 0) {
    throw new SchemaMismatch(`${path}: no traj_* columns`);
  }
  return { times, trajectories: names.map((n) => numeric(tab, n, path)) };
}

export function readSidecar(csvPath: string): Record<string, unknown> {
  const side = csvPath.replace(/\.csv$/, ".json");
  if (!existsSync(side)) return {};
  return JSON.parse(readFileSync(side, "utf-8"));
}

export function resolvedConfigHash(dir: string): string {
  const p = join(dir, "resolved-config.json");
  if (!existsSync(p)) return "no-config";
  const body = readFileSync(p);
  // FNV-1a, printed as 8 hex chars: stable, dependency-free fingerprint
  let h = 0x811c9dc5;
  for (const byte of body) {
    h ^= byte;
    h = Math.imul(h, 0x01000193) >>> 0;
  }
  return h.toString(16).padStart(8, "0");
}

export function readSeed(dir: string): string {
  const p = join(dir, "resolved-config.json");
  if (!existsSync(p)) return "?";
  const doc = JSON.parse(readFileSync(p, "utf-8"));
  return String(doc.seed ?? "?");
}
