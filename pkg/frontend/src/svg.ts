/**
 * Minimal hand-rolled SVG primitives: linear scales, axes, polyline series.
 *
 * Every series element embeds its exact source data in a `<metadata>` child
 * (`x,y` pairs in shortest round-trip notation), so a figure is always
 * traceable back to the numbers it was drawn from.
 */

export interface Scale {
  (v: number): number;
  domain: [number, number];
  range: [number, number];
}

export function makeLinearScale(
  d0: number,
  d1: number,
  r0: number,
  r1: number,
): Scale {
  const span = d1 - d0 === 0 ? 1 : d1 - d0;
  const f = ((v: number) => r0 + ((v - d0) / span) * (r1 - r0)) as Scale;
  f.domain = [d0, d1];
  f.range = [r0, r1];
  return f;
}

/** Nice round tick positions covering [lo, hi]. */
export function ticks(lo: number, hi: number, count = 6): number[] {
  if (!(hi > lo)) return [lo];
  const rawStep = (hi - lo) / Math.max(count - 1, 1);
  const mag = Math.pow(10, Math.floor(Math.log10(rawStep)));
  const norm = rawStep / mag;
  const step = (norm >= 5 ? 5 : norm >= 2 ? 2 : 1) * mag;
  const start = Math.ceil(lo / step) * step;
  const out: number[] = [];
  for (let v = start; v <= hi + step * 1e-9; v += step) {
    out.push(Math.abs(v) < step * 1e-9 ? 0 : v);
  }
  return out;
}

export function escapeXml(s: string): string {
  return s
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function formatTick(v: number): string {
  if (v === 0) return "0";
  const a = Math.abs(v);
  if (a >= 1e4 || a < 1e-3) return v.toExponential(1);
  return String(Number(v.toPrecision(6)));
}

/** Categorical palette (colorblind-safe Okabe-Ito subset). */
export const PALETTE = [
  "#0072b2",
  "#d55e00",
  "#009e73",
  "#cc79a7",
  "#e69f00",
  "#56b4e9",
  "#000000",
];

export interface SeriesOptions {
  color: string;
  label: string;
  dash?: string;
}

/**
 * Polyline for one (x, y) series plus a metadata child carrying the exact
 * input points (`x,y` space-separated, shortest round-trip number strings).
 */
export function renderSeries(
  xs: number[],
  ys: number[],
  sx: Scale,
  sy: Scale,
  opt: SeriesOptions,
): string {
  if (xs.length !== ys.length) throw new Error("series length mismatch");
  const pts = xs.map((x, i) => `${r(sx(x))},${r(sy(ys[i]))}`).join(" ");
  const exact = xs.map((x, i) => `${x},${ys[i]}`).join(" ");
  const dash = opt.dash ? ` stroke-dasharray="${opt.dash}"` : "";
  return [
    `<g class="series" data-label="${escapeXml(opt.label)}">`,
    `<metadata class="points">${exact}</metadata>`,
    `<polyline fill="none" stroke="${opt.color}" stroke-width="1.5"${dash} points="${pts}"/>`,
    `</g>`,
  ].join("\n");
}

export function r(v: number): string {
  return String(Math.round(v * 100) / 100);
}

export interface Frame {
  width: number;
  height: number;
  margin: { top: number; right: number; bottom: number; left: number };
  sx: Scale;
  sy: Scale;
}

export function makeFrame(
  xDomain: [number, number],
  yDomain: [number, number],
  width = 720,
  height = 420,
): Frame {
  const margin = { top: 36, right: 24, bottom: 48, left: 72 };
  const sx = makeLinearScale(
    xDomain[0],
    xDomain[1],
    margin.left,
    width - margin.right,
  );
  const sy = makeLinearScale(
    yDomain[0],
    yDomain[1],
    height - margin.bottom,
    margin.top,
  );
  return { width, height, margin, sx, sy };
}

export function renderAxes(
  frame: Frame,
  xLabel: string,
  yLabel: string,
  title: string,
): string {
  const { sx, sy, width, height, margin } = frame;
  const [x0, x1] = sx.range;
  const [yBottom, yTop] = sy.range;
  const parts: string[] = [];

  parts.push(
    `<rect x="${x0}" y="${yTop}" width="${x1 - x0}" height="${yBottom - yTop}" fill="none" stroke="#888" stroke-width="1"/>`,
  );
  for (const t of ticks(sx.domain[0], sx.domain[1])) {
    const px = r(sx(t));
    parts.push(
      `<line x1="${px}" y1="${yBottom}" x2="${px}" y2="${yBottom + 5}" stroke="#444"/>`,
      `<text x="${px}" y="${yBottom + 18}" text-anchor="middle" font-size="11">${formatTick(t)}</text>`,
    );
  }
  for (const t of ticks(sy.domain[0], sy.domain[1])) {
    const py = r(sy(t));
    parts.push(
      `<line x1="${x0 - 5}" y1="${py}" x2="${x0}" y2="${py}" stroke="#444"/>`,
      `<text x="${x0 - 8}" y="${py}" text-anchor="end" dominant-baseline="middle" font-size="11">${formatTick(t)}</text>`,
      `<line x1="${x0}" y1="${py}" x2="${x1}" y2="${py}" stroke="#eee"/>`,
    );
  }
  parts.push(
    `<text x="${(x0 + x1) / 2}" y="${height - 10}" text-anchor="middle" font-size="12">${escapeXml(xLabel)}</text>`,
    `<text transform="rotate(-90 16 ${(yTop + yBottom) / 2})" x="16" y="${(yTop + yBottom) / 2}" text-anchor="middle" font-size="12">${escapeXml(yLabel)}</text>`,
    `<text x="${width / 2}" y="${margin.top - 14}" text-anchor="middle" font-size="14" font-weight="bold">${escapeXml(title)}</text>`,
  );
  return parts.join("\n");
}

export function renderLegend(
  frame: Frame,
  entries: { label: string; color: string; dash?: string }[],
): string {
  const x = frame.sx.range[1] - 150;
  let y = frame.sy.range[1] + 14;
  const parts = [`<g class="legend" font-size="11">`];
  for (const e of entries) {
    const dash = e.dash ? ` stroke-dasharray="${e.dash}"` : "";
    parts.push(
      `<line x1="${x}" y1="${y - 4}" x2="${x + 22}" y2="${y - 4}" stroke="${e.color}" stroke-width="1.5"${dash}/>`,
      `<text x="${x + 28}" y="${y}">${escapeXml(e.label)}</text>`,
    );
    y += 16;
  }
  parts.push(`</g>`);
  return parts.join("\n");
}

export function svgDocument(
  width: number,
  height: number,
  body: string,
): string {
  return [
    `<?xml version="1.0" encoding="UTF-8"?>`,
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" viewBox="0 0 ${width} ${height}" font-family="sans-serif">`,
    `<rect width="${width}" height="${height}" fill="white"/>`,
    body,
    `</svg>`,
  ].join("\n");
}

export function dataExtent(values: number[], padFrac = 0.05): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const v of values) {
    if (v < lo) lo = v;
    if (v > hi) hi = v;
  }
  if (!Number.isFinite(lo)) throw new Error("empty extent");
  if (lo === hi) {
    const pad = Math.max(Math.abs(lo) * padFrac, 1e-12);
    return [lo - pad, hi + pad];
  }
  const pad = (hi - lo) * padFrac;
  return [lo - pad, hi + pad];
}
