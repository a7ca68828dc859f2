#!/usr/bin/env node
import { realpathSync, writeFileSync } from "node:fs";
import { pathToFileURL } from "node:url";
import { parseArgs } from "node:util";
import { SchemaError } from "./csv.js";
import { buildSvg, FIGURE_KINDS, FigureKind, FigureSpec } from "./figures.js";
import { svgToPng } from "./render.js";

const USAGE = `usage: figs --kind <bars|scaling|convergence|grid> --in <file> [--in <file> ...] --out <png>
            [--title <text>] [--xlabel <text>] [--ylabel <text>]

kinds:
  bars         one CSV with columns arch,latency_ms,bandwidth_MBps -> two bar panels
  scaling      timing CSV (n_pixels,seconds[,iterations]) plus optional fit CSV
               (coefficient,r_squared) -> log-log curve with a*N*log2(N) overlay
  convergence  CSV with round,federated_acc,centralized_acc -> two curves
  grid         one or more binary PGM files -> captioned image tiles`;

export function runCli(argv: string[]): number {
  let args;
  try {
    args = parseArgs({
      args: argv,
      options: {
        kind: { type: "string" },
        in: { type: "string", multiple: true },
        out: { type: "string" },
        title: { type: "string" },
        xlabel: { type: "string" },
        ylabel: { type: "string" },
        help: { type: "boolean", short: "h" },
      },
      allowPositionals: false,
    }).values;
  } catch (err) {
    console.error(`figs: ${err instanceof Error ? err.message : String(err)}`);
    console.error(USAGE);
    return 2;
  }
  if (args.help) {
    console.log(USAGE);
    return 0;
  }
  const kind = args.kind as FigureKind | undefined;
  if (!kind || !FIGURE_KINDS.includes(kind)) {
    console.error(`figs: --kind must be one of ${FIGURE_KINDS.join(", ")}`);
    console.error(USAGE);
    return 2;
  }
  if (!args.in || args.in.length === 0 || !args.out) {
    console.error("figs: --in and --out are required");
    console.error(USAGE);
    return 2;
  }
  const spec: FigureSpec = {
    kind,
    inputs: args.in,
    title: args.title,
    xLabel: args.xlabel,
    yLabel: args.ylabel,
  };
  try {
    writeFileSync(args.out, svgToPng(buildSvg(spec)));
    return 0;
  } catch (err) {
    if (err instanceof RangeError) {
      console.error(`figs: ${err.message}`);
      console.error(USAGE);
      return 2;
    }
    if (err instanceof SchemaError) {
      console.error(`figs: ${err.name}: ${err.message}`);
      return 1;
    }
    if (err instanceof Error) {
      console.error(`figs: ${err.message}`);
      return 1;
    }
    console.error(`figs: ${String(err)}`);
    return 1;
  }
}

function invokedDirectly(): boolean {
  if (!process.argv[1]) {
    return false;
  }
  try {
    return import.meta.url === pathToFileURL(realpathSync(process.argv[1])).href;
  } catch {
    return false;
  }
}

if (invokedDirectly()) {
  process.exit(runCli(process.argv.slice(2)));
}
