/**
 * The four figure kinds rendered from simulator CSV files.
 *
 *   profile       one run's profile CSV: chosen columns against x
 *   overlay       the same column from two runs (e.g. two transport modes)
 *   sweep-family  temperature curves, one per polarization column
 *   entropy       H1 and entropy production against the step index
 *
 * Each renderer takes parsed tables (see csv.ts) and returns a standalone
 * SVG string; exact input points ride along in per-series metadata.
 */

import { CsvTable, column, columnsWithPrefix } from "./csv.js";
import {
  PALETTE,
  dataExtent,
  makeFrame,
  makeLinearScale,
  renderAxes,
  renderLegend,
  renderSeries,
  svgDocument,
} from "./svg.js";

export function renderProfile(
  table: CsvTable,
  columns: string[],
  title = "steady-state profile",
): string {
  const x = column(table, "x");
  const series = columns.map((name) => ({ name, y: column(table, name) }));
  const frame = makeFrame(
    dataExtent(x, 0),
    dataExtent(series.flatMap((s) => s.y)),
  );
  const body = [
    renderAxes(frame, "x", columns.join(", "), title),
    ...series.map((s, i) =>
      renderSeries(x, s.y, frame.sx, frame.sy, {
        color: PALETTE[i % PALETTE.length],
        label: s.name,
      }),
    ),
    renderLegend(
      frame,
      series.map((s, i) => ({ label: s.name, color: PALETTE[i % PALETTE.length] })),
    ),
  ].join("\n");
  return svgDocument(frame.width, frame.height, body);
}

export function renderOverlay(
  a: CsvTable,
  b: CsvTable,
  col: string,
  labels: [string, string],
  title = "",
): string {
  const xa = column(a, "x");
  const xb = column(b, "x");
  const ya = column(a, col);
  const yb = column(b, col);
  const frame = makeFrame(
    dataExtent(xa.concat(xb), 0),
    dataExtent(ya.concat(yb)),
  );
  const body = [
    renderAxes(frame, "x", col, title || `${col}: ${labels[0]} vs ${labels[1]}`),
    renderSeries(xa, ya, frame.sx, frame.sy, {
      color: PALETTE[0],
      label: labels[0],
    }),
    renderSeries(xb, yb, frame.sx, frame.sy, {
      color: PALETTE[1],
      label: labels[1],
      dash: "6 3",
    }),
    renderLegend(frame, [
      { label: labels[0], color: PALETTE[0] },
      { label: labels[1], color: PALETTE[1], dash: "6 3" },
    ]),
  ].join("\n");
  return svgDocument(frame.width, frame.height, body);
}

export function renderSweepFamily(
  table: CsvTable,
  title = "temperature profiles over polarization",
): string {
  const x = column(table, "x");
  const family = columnsWithPrefix(table, "T_p");
  if (family.length === 0) throw new Error("no T_p* columns in sweep CSV");
  const series = family.map((name) => ({ name, y: column(table, name) }));
  const frame = makeFrame(
    dataExtent(x, 0),
    dataExtent(series.flatMap((s) => s.y)),
  );
  const body = [
    renderAxes(frame, "x", "T", title),
    ...series.map((s, i) =>
      renderSeries(x, s.y, frame.sx, frame.sy, {
        color: PALETTE[i % PALETTE.length],
        label: s.name,
      }),
    ),
    renderLegend(
      frame,
      series.map((s, i) => ({
        label: "p = " + s.name.slice("T_p".length),
        color: PALETTE[i % PALETTE.length],
      })),
    ),
  ].join("\n");
  return svgDocument(frame.width, frame.height, body);
}

export function renderEntropy(
  table: CsvTable,
  title = "entropy decay along the trajectory",
): string {
  const step = column(table, "step");
  const H = column(table, "H1");
  const production = column(table, "production");

  // two stacked panels sharing the step axis
  const width = 720;
  const height = 560;
  const top = makeFrame(dataExtent(step, 0), dataExtent(H), width, 300);
  const botMargin = { top: 330, bottom: 48 };
  const sxB = top.sx;
  const syB = makeLinearScale(
    ...dataExtent(production),
    height - botMargin.bottom,
    botMargin.top,
  );
  const bottom = { ...top, sy: syB, height };

  const body = [
    renderAxes(top, "", "H1", title),
    renderSeries(step, H, top.sx, top.sy, {
      color: PALETTE[0],
      label: "H1",
    }),
    renderAxes(bottom, "step", "production", ""),
    renderSeries(step, production, sxB, syB, {
      color: PALETTE[2],
      label: "production",
    }),
  ].join("\n");
  return svgDocument(width, height, body);
}
