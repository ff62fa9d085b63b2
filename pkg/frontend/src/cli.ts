#!/usr/bin/env node
/** Figure renderer for the experiment CSVs.
 *
 * Usage:
 *   mommd-plot plot --kind error_curves|dna_bars --in results.csv --out figure.svg [--log]
 *
 * Writes the SVG plus a `<out>.json` sidecar listing every plotted aggregate.
 * Exit codes: 0 ok, 2 bad arguments or schema mismatch, 3 unreadable input.
 */

import { readFileSync, writeFileSync } from "fs";

import { SchemaError, parseCsv } from "./csv.js";
import { FigureKind, buildFigure } from "./figures.js";
import { renderSvg } from "./svg.js";

interface Args {
  kind: FigureKind;
  input: string;
  output: string;
  logX: boolean;
}

function parseArgs(argv: string[]): Args {
  const args = [...argv];
  if (args[0] === "plot") args.shift();
  let kind: string | undefined;
  let input: string | undefined;
  let output: string | undefined;
  let logX = false;
  for (let i = 0; i < args.length; i += 1) {
    const a = args[i];
    if (a === "--kind") kind = args[++i];
    else if (a === "--in") input = args[++i];
    else if (a === "--out") output = args[++i];
    else if (a === "--log") logX = true;
    else throw new Error(`unknown argument ${a}`);
  }
  if (kind !== "error_curves" && kind !== "dna_bars") {
    throw new Error("--kind must be error_curves or dna_bars");
  }
  if (!input || !output) throw new Error("--in and --out are required");
  return { kind, input, output, logX };
}

export function run(argv: string[]): number {
  let args: Args;
  try {
    args = parseArgs(argv);
  } catch (err) {
    console.error(`usage error: ${(err as Error).message}`);
    return 2;
  }
  let text: string;
  try {
    text = readFileSync(args.input, "utf8");
  } catch (err) {
    console.error(`cannot read ${args.input}: ${(err as Error).message}`);
    return 3;
  }
  try {
    const figure = buildFigure(args.kind, parseCsv(text));
    writeFileSync(args.output, renderSvg(figure, { logX: args.logX }));
    writeFileSync(`${args.output}.json`, JSON.stringify(figure, null, 2) + "\n");
  } catch (err) {
    if (err instanceof SchemaError) {
      console.error(`schema mismatch: ${err.message}`);
      return 2;
    }
    throw err;
  }
  return 0;
}

const invokedDirectly =
  process.argv[1] !== undefined && import.meta.url === new URL(`file://${process.argv[1]}`).href;
if (invokedDirectly) {
  process.exit(run(process.argv.slice(2)));
}
