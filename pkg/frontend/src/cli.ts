#!/usr/bin/env node
/**
 * render --figure {fig2|fig3|alpha} --in DIR --out FILE.png
 *
 * Reads only the public CSV artifacts of a completed run directory; never
 * writes into it.
 */

import { writeFileSync } from "node:fs";

import { MissingInput, SchemaMismatch } from "./csv.js";
import { FigureKind, render } from "./figures.js";

function usage(): never {
  console.error("usage: tdqmc-plots render --figure {fig2|fig3|alpha} --in DIR --out FILE.png");
  process.exit(2);
}

export function main(argv: string[]): number {
  if (argv[0] !== "render") usage();
  let figure: string | undefined;
  let inDir: string | undefined;
  let out: string | undefined;
  for (let i = 1; i < argv.length; i += 2) {
    const key = argv[i];
    const value = argv[i + 1];
    if (value === undefined) usage();
    if (key === "--figure") figure = value;
    else if (key === "--in") inDir = value;
    else if (key === "--out") out = value;
    else usage();
  }
  if (!figure || !inDir || !out) usage();
  if (!["fig2", "fig3", "alpha"].includes(figure)) usage();

  try {
    const canvas = render(figure as FigureKind, inDir);
    writeFileSync(out, canvas.toPng());
  } catch (err) {
    if (err instanceof MissingInput || err instanceof SchemaMismatch) {
      console.error(`${err.constructor.name}: ${err.message}`);
      return 1;
    }
    throw err;
  }
  console.log(`wrote ${out}`);
  return 0;
}

const isMain = process.argv[1] && import.meta.url.endsWith(process.argv[1].split("/").pop() as string);
if (isMain) {
  process.exit(main(process.argv.slice(2)));
}
