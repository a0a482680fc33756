#!/usr/bin/env node
/**
 * Render an SVG figure from simulator CSV output.
 *
 * Usage:
 *   spinet-plot profile      --in n_profile.csv [--columns n3,T] --out fig.svg
 *   spinet-plot overlay      --in a.csv --in2 b.csv --column n3
 *                            [--labels energy-transport,drift-diffusion] --out fig.svg
 *   spinet-plot sweep-family --in temperature_sweep.csv --out fig.svg
 *   spinet-plot entropy      --in entropy.csv --out fig.svg
 *
 * Exit codes: 0 written, 1 bad arguments or unreadable/invalid input.
 */

import { readFileSync, writeFileSync } from "node:fs";
import { parseCsv } from "./csv.js";
import {
  renderEntropy,
  renderOverlay,
  renderProfile,
  renderSweepFamily,
} from "./figures.js";

interface Args {
  kind: string;
  flags: Map<string, string>;
}

function parseArgs(argv: string[]): Args {
  if (argv.length === 0) throw new Error("missing figure kind");
  const [kind, ...rest] = argv;
  const flags = new Map<string, string>();
  for (let i = 0; i < rest.length; i += 2) {
    const key = rest[i];
    if (!key.startsWith("--") || i + 1 >= rest.length) {
      throw new Error(`bad flag ${JSON.stringify(key)}`);
    }
    flags.set(key.slice(2), rest[i + 1]);
  }
  return { kind, flags };
}

function need(flags: Map<string, string>, key: string): string {
  const v = flags.get(key);
  if (v === undefined) throw new Error(`--${key} is required`);
  return v;
}

function load(path: string) {
  return parseCsv(readFileSync(path, "utf8"));
}

export function run(argv: string[]): number {
  let args: Args;
  try {
    args = parseArgs(argv);
    const { kind, flags } = args;
    let svg: string;
    switch (kind) {
      case "profile": {
        const cols = (flags.get("columns") ?? "n3").split(",");
        svg = renderProfile(load(need(flags, "in")), cols, flags.get("title"));
        break;
      }
      case "overlay": {
        const labels = (flags.get("labels") ?? "run A,run B").split(",");
        svg = renderOverlay(
          load(need(flags, "in")),
          load(need(flags, "in2")),
          need(flags, "column"),
          [labels[0], labels[1] ?? "run B"],
          flags.get("title") ?? "",
        );
        break;
      }
      case "sweep-family":
        svg = renderSweepFamily(load(need(flags, "in")), flags.get("title"));
        break;
      case "entropy":
        svg = renderEntropy(load(need(flags, "in")), flags.get("title"));
        break;
      default:
        throw new Error(
          `unknown figure kind ${JSON.stringify(kind)}; ` +
            `expected profile | overlay | sweep-family | entropy`,
        );
    }
    writeFileSync(need(flags, "out"), svg);
    console.log(`wrote ${flags.get("out")}`);
    return 0;
  } catch (err) {
    console.error(`error: ${err instanceof Error ? err.message : err}`);
    return 1;
  }
}

if (process.argv[1] && /cli\.(ts|js)$/.test(process.argv[1])) {
  process.exit(run(process.argv.slice(2)));
}
