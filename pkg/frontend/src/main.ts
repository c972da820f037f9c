/**
 * CLI: render an experiment CSV into an SVG figure.
 *
 * Usage: node dist/src/main.js <results.csv> --figure {2|3|4} --out <file.svg>
 */

import { readFileSync, writeFileSync } from "node:fs";
import { renderFigure } from "./plot";

function parseArgs(argv: string[]): {
  csvPath: string;
  figure: string;
  out: string;
} {
  let csvPath = "";
  let figure = "";
  let out = "";
  for (let i = 0; i < argv.length; i++) {
    const arg = argv[i];
    if (arg === "--figure") {
      figure = argv[++i] ?? "";
    } else if (arg === "--out") {
      out = argv[++i] ?? "";
    } else if (!arg.startsWith("--") && csvPath === "") {
      csvPath = arg;
    } else {
      throw new Error(`unexpected argument ${arg}`);
    }
  }
  if (!csvPath || !figure || !out) {
    throw new Error(
      "usage: main.js <results.csv> --figure {2|3|4} --out <file.svg>",
    );
  }
  return { csvPath, figure, out };
}

export function main(argv: string[]): number {
  try {
    const { csvPath, figure, out } = parseArgs(argv);
    const svg = renderFigure(readFileSync(csvPath, "utf8"), figure);
    writeFileSync(out, svg);
    console.log(`wrote ${out}`);
    return 0;
  } catch (err) {
    console.error(`error: ${err instanceof Error ? err.message : err}`);
    return 1;
  }
}

if (require.main === module) {
  process.exitCode = main(process.argv.slice(2));
}
