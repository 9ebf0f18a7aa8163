#!/usr/bin/env node
/**
 * berplot — plot sweep result CSVs as a semilog BER figure.
 *
 * Usage:
 *   berplot results.csv [more.csv ...] --out figure.svg [--floor 1e-7] [--title "..."]
 *
 * Inputs are concatenated, so decoder sweeps and baselines exported to
 * separate files end up in one figure. Inputs are only ever read.
 */

import { readFileSync, realpathSync, writeFileSync } from "node:fs";
import { fileURLToPath } from "node:url";
import { parseArgs } from "node:util";

import { EmptyInput, SchemaMismatch, parseBerCsv, type BerRow } from "./csv.js";
import { renderSvg } from "./figure.js";

const USAGE =
  "usage: berplot <results.csv> [more.csv ...] --out <figure.svg> [--floor 1e-7] [--title text]";

export function main(argv: string[]): number {
  let parsed;
  try {
    parsed = parseArgs({
      args: argv,
      allowPositionals: true,
      options: {
        out: { type: "string" },
        floor: { type: "string" },
        title: { type: "string" },
        help: { type: "boolean", short: "h" },
      },
    });
  } catch (err) {
    console.error(`berplot: ${(err as Error).message}`);
    console.error(USAGE);
    return 2;
  }
  if (parsed.values.help) {
    console.log(USAGE);
    return 0;
  }
  if (parsed.positionals.length === 0 || !parsed.values.out) {
    console.error(USAGE);
    return 2;
  }
  let floor: number | undefined;
  if (parsed.values.floor !== undefined) {
    floor = Number(parsed.values.floor);
    if (Number.isNaN(floor) || floor <= 0) {
      console.error(`berplot: --floor must be a positive number, got ${parsed.values.floor}`);
      return 2;
    }
  }

  try {
    const rows: BerRow[] = [];
    for (const path of parsed.positionals) {
      rows.push(...parseBerCsv(readFileSync(path, "utf8"), path));
    }
    const svg = renderSvg(rows, { floor, title: parsed.values.title });
    writeFileSync(parsed.values.out, svg);
    const curves = new Set(rows.map((r) => `${r.decoder}|${r.M}|${r.channel}`)).size;
    console.log(`wrote ${parsed.values.out}: ${curves} curves, ${rows.length} points`);
    return 0;
  } catch (err) {
    if (err instanceof SchemaMismatch || err instanceof EmptyInput) {
      console.error(`berplot: ${err.name}: ${err.message}`);
    } else {
      console.error(`berplot: ${(err as Error).message}`);
    }
    return 1;
  }
}

let invokedDirectly = false;
if (process.argv[1] !== undefined) {
  try {
    invokedDirectly = realpathSync(process.argv[1]) === fileURLToPath(import.meta.url);
  } catch {
    invokedDirectly = false;
  }
}
if (invokedDirectly) {
  process.exit(main(process.argv.slice(2)));
}
