#!/usr/bin/env node
/**
 * Render figure panels from a simulation log CSV.
 *
 * Usage: sync-sim-reporter CSV_PATH [--out DIR] [--panels a,b,c]
 *
 * Exit codes: 0 ok, 1 usage or I/O failure, 2 schema error.
 */

import { mkdirSync, writeFileSync } from "node:fs";
import { join } from "node:path";
import { parseLogCsv, SchemaError } from "./csv.js";
import { parsePanelList, PanelName, renderPanels } from "./panels.js";

export interface CliOptions {
  csvPath: string;
  outDir: string;
  panels: PanelName[];
}

export function parseArgs(argv: string[]): CliOptions {
  let csvPath: string | undefined;
  let outDir = ".";
  let panels: PanelName[] = ["errors", "param_norms"];
  for (let i = 0; i < argv.length; i++) {
    const a = argv[i];
    if (a === "--out") {
      outDir = argv[++i];
      if (outDir === undefined) throw new Error("--out requires a directory");
    } else if (a === "--panels") {
      const spec = argv[++i];
      if (spec === undefined) throw new Error("--panels requires a list");
      panels = parsePanelList(spec);
    } else if (a === "--help" || a === "-h") {
      throw new Error("usage: sync-sim-reporter CSV_PATH [--out DIR] [--panels a,b,c]");
    } else if (a.startsWith("--")) {
      throw new Error(`unknown option ${a}`);
    } else if (csvPath === undefined) {
      csvPath = a;
    } else {
      throw new Error(`unexpected argument ${a}`);
    }
  }
  if (csvPath === undefined) {
    throw new Error("missing CSV_PATH (usage: sync-sim-reporter CSV_PATH " +
      "[--out DIR] [--panels a,b,c])");
  }
  return { csvPath, outDir, panels };
}

export function runCli(argv: string[], log: (s: string) => void = console.log): number {
  let opts: CliOptions;
  try {
    opts = parseArgs(argv);
  } catch (e) {
    console.error(String(e instanceof Error ? e.message : e));
    return 1;
  }
  try {
    const table = parseLogCsv(opts.csvPath);
    const results = renderPanels(table, opts.panels);
    mkdirSync(opts.outDir, { recursive: true });
    for (const r of results) {
      const path = join(opts.outDir, `${r.name}.svg`);
      writeFileSync(path, r.svg, "utf-8");
      log(`wrote ${path}`);
      if (r.outOfBand !== undefined) {
        log(`out_of_band_samples=${r.outOfBand}`);
      }
    }
    return 0;
  } catch (e) {
    if (e instanceof SchemaError) {
      console.error(`schema error: ${e.message}`);
      return 2;
    }
    console.error(String(e instanceof Error ? e.message : e));
    return 1;
  }
}

if (import.meta.url === `file://${process.argv[1]}`) {
  process.exit(runCli(process.argv.slice(2)));
}
