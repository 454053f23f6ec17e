/** Minimal SVG assembly: pure string templating so output is byte-stable. */

export interface Extent {
  min: number;
  max: number;
}

export interface Scale {
  (x: number): number;
  ticks: number[];
  label(value: number): string;
  log: boolean;
}

const WIDTH = 640;
const HEIGHT = 440;
const MARGIN = { left: 70, right: 20, top: 24, bottom: 46 };

export const PLOT = {
  width: WIDTH,
  height: HEIGHT,
  x0: MARGIN.left,
  x1: WIDTH - MARGIN.right,
  y0: HEIGHT - MARGIN.bottom,
  y1: MARGIN.top,
};

function fmtTick(v: number): string {
  if (v === 0) return "0";
  const a = Math.abs(v);
  if (a >= 0.01 && a < 10000) {
    return String(Number(v.toPrecision(4)));
  }
  return v.toExponential(1);
}

export function linearScale(ext: Extent, out0: number, out1: number): Scale {
  const pad = ext.max === ext.min ? Math.max(1e-12, Math.abs(ext.max) * 0.5) : 0;
  const lo = ext.min - pad;
  const hi = ext.max + pad;
  const f = ((x: number) => out0 + ((x - lo) / (hi - lo)) * (out1 - out0)) as Scale;
  const step = niceStep(hi - lo);
  const ticks: number[] = [];
  for (let t = Math.ceil(lo / step) * step; t <= hi + 1e-12 * step; t += step) {
    ticks.push(Math.abs(t) < 1e-12 * step ? 0 : t);
  }
  f.ticks = ticks;
  f.label = fmtTick;
  f.log = false;
  return f;
}

export function logScale(ext: Extent, out0: number, out1: number): Scale {
  const lo = Math.log10(Math.max(ext.min, 1e-300));
  const hi = Math.log10(Math.max(ext.max, ext.min * 10, 1e-299));
  const f = ((x: number) =>
    out0 + ((Math.log10(Math.max(x, 1e-300)) - lo) / (hi - lo)) * (out1 - out0)) as Scale;
  const ticks: number[] = [];
  for (let d = Math.ceil(lo); d <= Math.floor(hi); d += 1) {
    ticks.push(Math.pow(10, d));
  }
  if (ticks.length === 0) {
    ticks.push(Math.pow(10, Math.round((lo + hi) / 2)));
  }
  f.ticks = ticks;
  f.label = (v: number) => `1e${Math.round(Math.log10(v))}`;
  f.log = true;
  return f;
}

function niceStep(span: number): number {
  const raw = span / 6;
  const mag = Math.pow(10, Math.floor(Math.log10(raw)));
  const norm = raw / mag;
  const nice = norm < 1.5 ? 1 : norm < 3.5 ? 2 : norm < 7.5 ? 5 : 10;
  return nice * mag;
}

export function extent(values: number[]): Extent {
  let min = Infinity;
  let max = -Infinity;
  for (const v of values) {
    if (Number.isFinite(v)) {
      min = Math.min(min, v);
      max = Math.max(max, v);
    }
  }
  if (!Number.isFinite(min)) {
    return { min: 0, max: 1 };
  }
  return { min, max };
}

export interface PolylineStyle {
  stroke: string;
  width: number;
  dashed: boolean;
}

export function polyline(xs: number[], ys: number[], style: PolylineStyle): string {
  if (xs.length === 0) return "";
  const pts = xs
    .map((x, i) => `${x.toFixed(2)},${ys[i].toFixed(2)}`)
    .join(" ");
  const dash = style.dashed ? ' stroke-dasharray="4 4"' : "";
  return `<polyline fill="none" stroke="${style.stroke}" stroke-width="${style.width}"${dash} points="${pts}"/>`;
}

export function axes(
  sx: Scale,
  sy: Scale,
  xlabel: string,
  ylabel: string,
): string {
  const parts: string[] = [];
  parts.push(
    `<line x1="${PLOT.x0}" y1="${PLOT.y0}" x2="${PLOT.x1}" y2="${PLOT.y0}" stroke="black" stroke-width="1"/>`,
  );
  parts.push(
    `<line x1="${PLOT.x0}" y1="${PLOT.y0}" x2="${PLOT.x0}" y2="${PLOT.y1}" stroke="black" stroke-width="1"/>`,
  );
  for (const t of sx.ticks) {
    const x = sx(t);
    if (x < PLOT.x0 - 0.5 || x > PLOT.x1 + 0.5) continue;
    parts.push(
      `<line x1="${x.toFixed(2)}" y1="${PLOT.y0}" x2="${x.toFixed(2)}" y2="${PLOT.y0 + 5}" stroke="black" stroke-width="1"/>`,
    );
    parts.push(
      `<text x="${x.toFixed(2)}" y="${PLOT.y0 + 18}" text-anchor="middle" font-size="11">${sx.label(t)}</text>`,
    );
  }
  for (const t of sy.ticks) {
    const y = sy(t);
    if (y > PLOT.y0 + 0.5 || y < PLOT.y1 - 0.5) continue;
    parts.push(
      `<line x1="${PLOT.x0 - 5}" y1="${y.toFixed(2)}" x2="${PLOT.x0}" y2="${y.toFixed(2)}" stroke="black" stroke-width="1"/>`,
    );
    parts.push(
      `<text x="${PLOT.x0 - 8}" y="${(y + 4).toFixed(2)}" text-anchor="end" font-size="11">${sy.label(t)}</text>`,
    );
  }
  parts.push(
    `<text x="${(PLOT.x0 + PLOT.x1) / 2}" y="${PLOT.y0 + 36}" text-anchor="middle" font-size="13">${xlabel}</text>`,
  );
  parts.push(
    `<text x="16" y="${(PLOT.y0 + PLOT.y1) / 2}" text-anchor="middle" font-size="13" transform="rotate(-90 16 ${(PLOT.y0 + PLOT.y1) / 2})">${ylabel}</text>`,
  );
  return parts.join("\n");
}

export function document(body: string, title: string): string {
  return [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" viewBox="0 0 ${WIDTH} ${HEIGHT}">`,
    `<title>${title}</title>`,
    `<rect width="${WIDTH}" height="${HEIGHT}" fill="white"/>`,
    body,
    `</svg>`,
    ``,
  ].join("\n");
}

export function warningText(message: string): string {
  return `<text x="${(PLOT.x0 + PLOT.x1) / 2}" y="${(PLOT.y0 + PLOT.y1) / 2}" text-anchor="middle" font-size="13" fill="#888">${message}</text>`;
}
