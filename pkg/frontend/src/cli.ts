#!/usr/bin/env node
/** render_figure --spec PATH --out PATH */

import { writeFileSync } from "node:fs";
import { loadSpec } from "./figspec.js";
import { render } from "./render.js";

function parseArgs(argv: string[]): { spec?: string; out?: string } {
  const out: { spec?: string; out?: string } = {};
  for (let i = 0; i < argv.length; i++) {
    if (argv[i] === "--spec") out.spec = argv[++i];
    else if (argv[i] === "--out") out.out = argv[++i];
    else {
      console.error(`unknown argument: ${argv[i]}`);
      process.exit(2);
    }
  }
  return out;
}

const args = parseArgs(process.argv.slice(2));
if (!args.spec || !args.out) {
  console.error("usage: render_figure --spec SPEC.json --out FIGURE.svg");
  process.exit(2);
}

try {
  const spec = loadSpec(args.spec);
  const svg = render(spec);
  writeFileSync(args.out, svg, "utf-8");
  console.log(`wrote ${args.out}`);
} catch (err) {
  console.error(String(err));
  process.exit(1);
}
