/** Figure rendering: reads solver CSV outputs, emits a standalone SVG.
 *
 * Display only: no quantity is recomputed here beyond the documented
 * Model I energy display shift delta/2 * phi0^2 * |Omega|.
 */

import { column, groupBy, readCsv, Table, textColumn } from "./csv.js";
import { FigureSpec } from "./figspec.js";
import {
  axes,
  document,
  extent,
  linearScale,
  logScale,
  PLOT,
  polyline,
  Scale,
  warningText,
} from "./svg.js";

const BOLD = 2.4;
const THIN = 1.0;

class MissingInputError extends Error {
  constructor(key: string) {
    super(`figure input '${key}' missing from spec`);
    this.name = "MissingInputError";
  }
}

function input(spec: FigureSpec, key: string): Table {
  const path = spec.inputs[key];
  if (!path) {
    throw new MissingInputError(key);
  }
  return readCsv(path);
}

interface Segment {
  xs: number[];
  ys: number[];
  bold: boolean;
  dashed: boolean;
  color: string;
}

/** Split a branch polyline into solid/dotted runs by the stability flag. */
function stabilitySegments(
  xs: number[],
  ys: number[],
  stable: number[],
  bold: boolean,
  color: string,
): Segment[] {
  const out: Segment[] = [];
  let cur: Segment | null = null;
  for (let i = 0; i < xs.length; i++) {
    const dashed = stable[i] <= 0;
    if (!cur || cur.dashed !== dashed) {
      const next: Segment = { xs: [], ys: [], bold, dashed, color };
      if (cur && cur.xs.length > 0) {
        // close the previous run at the switch point so the curve is connected
        next.xs.push(xs[i - 1]);
        next.ys.push(ys[i - 1]);
      }
      out.push(next);
      cur = next;
    }
    cur.xs.push(xs[i]);
    cur.ys.push(ys[i]);
  }
  return out.filter((s) => s.xs.length > 1);
}

function drawSegments(segs: Segment[], sx: Scale, sy: Scale): string {
  return segs
    .map((s) =>
      polyline(s.xs.map(sx), s.ys.map(sy), {
        stroke: s.color,
        width: s.bold ? BOLD : THIN,
        dashed: s.dashed,
      }),
    )
    .join("\n");
}

function selector(vals: number[], idx: number[]): number[] {
  return idx.map((i) => vals[i]);
}

function diagramSegments(
  table: Table,
  xcol: string,
  ycol: string,
  yshift: (row: number) => number,
): { segs: Segment[]; xs: number[]; ys: number[] } {
  const x = column(table, xcol);
  const yRaw = column(table, ycol);
  const y = yRaw.map((v, i) => v + yshift(i));
  const stable = column(table, "stable_dyn");
  const groups = groupBy(table, "branch_id");
  const segs: Segment[] = [];
  const allX: number[] = [];
  const allY: number[] = [];
  for (const [key, idx] of groups) {
    const bold = !key.startsWith("const");
    const color = bold ? "#c62828" : "#333333";
    const xs = selector(x, idx);
    const ys = selector(y, idx);
    segs.push(...stabilitySegments(xs, ys, selector(stable, idx), bold, color));
    allX.push(...xs);
    allY.push(...ys);
  }
  return { segs, xs: allX, ys: allY };
}

function renderMassDiagram(spec: FigureSpec): string {
  const table = input(spec, "diagram");
  if (table.rows.length === 0) {
    const sx = linearScale({ min: 0, max: 1 }, PLOT.x0, PLOT.x1);
    const sy = linearScale({ min: 0, max: 1 }, PLOT.y0, PLOT.y1);
    return document(
      axes(sx, sy, "phi0", "mass") + "\n" + warningText("empty dataset"),
      spec.title ?? "mass diagram",
    );
  }
  const { segs, xs, ys } = diagramSegments(table, "phi0", "mass", () => 0);
  const sx = linearScale(extent(xs), PLOT.x0, PLOT.x1);
  const sy = spec.log_mass
    ? logScale(extent(ys.filter((v) => v > 0)), PLOT.y0, PLOT.y1)
    : linearScale(extent(ys), PLOT.y0, PLOT.y1);
  const body =
    axes(sx, sy, "phi0", spec.log_mass ? "mass (log)" : "mass") +
    "\n" +
    drawSegments(segs, sx, sy);
  return document(body, spec.title ?? "mass diagram");
}

function renderBranchesPhi0(spec: FigureSpec): string {
  const table = input(spec, "diagram");
  const { segs, xs, ys } = diagramSegments(table, "phi0", "a", () => 0);
  const sx = linearScale(extent(xs), PLOT.x0, PLOT.x1);
  const sy = linearScale(extent(ys), PLOT.y0, PLOT.y1);
  return document(
    axes(sx, sy, "phi0", "phi(0)") + "\n" + drawSegments(segs, sx, sy),
    spec.title ?? "solution branches",
  );
}

function renderConstantCurves(spec: FigureSpec): string {
  const table = input(spec, "constants");
  const phi0 = column(table, "phi0");
  const phi = column(table, "phi");
  const groups = groupBy(table, "branch_label");
  const segs: Segment[] = [];
  for (const [label, idx] of groups) {
    segs.push({
      xs: selector(phi0, idx),
      ys: selector(phi, idx),
      bold: label === "middle",
      dashed: false,
      color: "#333333",
    });
  }
  const sx = linearScale(extent(phi0), PLOT.x0, PLOT.x1);
  const sy = linearScale(extent(phi), PLOT.y0, PLOT.y1);
  return document(
    axes(sx, sy, "phi0", "phi") + "\n" + drawSegments(segs, sx, sy),
    spec.title ?? "constant solutions",
  );
}

function renderProfiles(spec: FigureSpec): string {
  const table = input(spec, "profiles");
  const r = column(table, "r");
  const phi = column(table, "phi");
  const groups = groupBy(table, "point");
  const segs: Segment[] = [];
  for (const [, idx] of groups) {
    segs.push({
      xs: selector(r, idx),
      ys: selector(phi, idx),
      bold: false,
      dashed: false,
      color: "#1565c0",
    });
  }
  const sx = linearScale({ min: 0, max: 1 }, PLOT.x0, PLOT.x1);
  const sy = linearScale(extent(phi), PLOT.y0, PLOT.y1);
  return document(
    axes(sx, sy, "r", "phi") + "\n" + drawSegments(segs, sx, sy),
    spec.title ?? "profiles",
  );
}

function renderStabilityCriteria(spec: FigureSpec): string {
  const table = input(spec, "diagram");
  const xcol = spec.x ?? "phi0";
  const branchRows: number[] = [];
  const ids = textColumn(table, "branch_id");
  ids.forEach((id, i) => {
    if (!id.startsWith("const")) branchRows.push(i);
  });
  const xs = selector(column(table, xcol), branchRows);
  const mu1 = selector(column(table, "mu1"), branchRows);
  const lam = selector(column(table, "lambda_var"), branchRows);
  const sx = linearScale(extent(xs), PLOT.x0, PLOT.x1);
  const sy = linearScale(extent([...mu1, ...lam, 0]), PLOT.y0, PLOT.y1);
  const zero = polyline([sx(sx.ticks[0] ?? 0), PLOT.x1], [sy(0), sy(0)], {
    stroke: "#999999",
    width: 0.8,
    dashed: true,
  });
  const body = [
    axes(sx, sy, xcol, "criterion"),
    zero,
    polyline(xs.map(sx), mu1.map(sy), { stroke: "#c62828", width: BOLD, dashed: false }),
    polyline(xs.map(sx), lam.map(sy), { stroke: "#1565c0", width: THIN, dashed: false }),
    `<text x="${PLOT.x1 - 8}" y="${PLOT.y1 + 14}" text-anchor="end" font-size="12" fill="#c62828">mu1</text>`,
    `<text x="${PLOT.x1 - 8}" y="${PLOT.y1 + 30}" text-anchor="end" font-size="12" fill="#1565c0">Lambda</text>`,
  ].join("\n");
  return document(body, spec.title ?? "stability criteria");
}

function renderEnergyComparison(spec: FigureSpec): string {
  const table = input(spec, "diagram");
  const kappa = column(table, "kappa");
  const delta = column(table, "delta");
  const dim = column(table, "dim");
  const phi0all = column(table, "phi0");
  const volume = (d: number): number => (d === 1 ? 1.0 : Math.PI);
  const shift = (i: number): number =>
    spec.energy_shift
      ? (delta[i] / 2) * phi0all[i] * phi0all[i] * volume(dim[i])
      : 0;
  const { segs, xs, ys } = diagramSegments(table, "phi0", "energy", shift);
  const sx = linearScale(extent(xs), PLOT.x0, PLOT.x1);
  const sy = linearScale(extent(ys), PLOT.y0, PLOT.y1);
  return document(
    axes(sx, sy, "phi0", spec.energy_shift ? "shifted energy" : "energy") +
      "\n" +
      drawSegments(segs, sx, sy),
    spec.title ?? "energy comparison",
  );
}

export function render(spec: FigureSpec): string {
  switch (spec.figure) {
    case "mass_diagram":
      return renderMassDiagram(spec);
    case "branches_phi0":
      return renderBranchesPhi0(spec);
    case "constant_curves":
      return renderConstantCurves(spec);
    case "profiles":
      return renderProfiles(spec);
    case "stability_criteria":
      return renderStabilityCriteria(spec);
    case "energy_comparison":
      return renderEnergyComparison(spec);
  }
}
