/** Scaling figure: log-log uncertainty versus pair budget for every
 * strategy series, with a slope -1/2 guide line. */
import {
  axes,
  decadeTicks,
  esc,
  frame,
  fmt,
  log10Scale,
  polylinePath,
  title,
} from "./chart.js";
import { CsvError, numeric, parseCsv, requireColumns, Table } from "./csv.js";

const COLORS = ["#4361ee", "#e63946", "#2d6a4f", "#b5179e", "#f3722c"];

export interface GuideLine {
  n0: number;
  d0: number;
  n1: number;
  d1: number;
}

export interface ScalingPlot {
  svg: string;
  series: string[];
  guide: GuideLine;
}

export function plotScaling(csvText: string): ScalingPlot {
  const table: Table = parseCsv(csvText);
  requireColumns(table, ["strategy", "covariance", "N", "delta_av"]);
  const n = numeric(table, "N");
  const delta = numeric(table, "delta_av");
  if (n.some((v) => v <= 0) || delta.some((v) => v <= 0)) {
    throw new CsvError("log-log plot needs positive N and delta_av");
  }

  const keys: string[] = [];
  const groups = new Map<string, { n: number[]; delta: number[] }>();
  table.rows.forEach((row, i) => {
    const key = `${row["strategy"]}/${row["covariance"]}`;
    if (!groups.has(key)) {
      groups.set(key, { n: [], delta: [] });
      keys.push(key);
    }
    const group = groups.get(key)!;
    group.n.push(n[i]);
    group.delta.push(delta[i]);
  });

  const f = frame();
  const x = log10Scale(Math.min(...n), Math.max(...n), f.plotLeft, f.plotRight);
  const y = log10Scale(Math.min(...delta) / 1.6, Math.max(...delta) * 1.6, f.plotBottom, f.plotTop);

  let s = f.svgOpen;
  const seedCell = table.rows[0]["seed"] ?? "?";
  s += title(
    f,
    "Uncertainty scaling with the pair budget",
    `isotropic ensemble average, M = ${table.rows[0]["M"] ?? "?"} states, seed ${seedCell}`
  );
  s += axes(
    f,
    decadeTicks(x.min, x.max),
    decadeTicks(y.min, y.max),
    x,
    y,
    "pair budget N",
    "delta_av",
    (v) => `1e${Math.round(Math.log10(v))}`,
    (v) => `1e${Math.round(Math.log10(v))}`
  );

  keys.forEach((key, k) => {
    const group = groups.get(key)!;
    const color = COLORS[k % COLORS.length];
    const xs = group.n.map(x);
    const ys = group.delta.map(y);
    s += `<path d="${polylinePath(xs, ys)}" fill="none" stroke="${color}" stroke-width="1.8"/>\n`;
    xs.forEach((px, i) => {
      s += `<circle cx="${px.toFixed(2)}" cy="${ys[i].toFixed(2)}" r="3" fill="${color}"/>\n`;
    });
    s += `<text x="${f.plotLeft + 10}" y="${f.plotTop + 18 + 16 * k}" font-size="11" fill="${color}">${esc(key)}</text>\n`;
  });

  // slope -1/2 guide line: one decade in N, half a decade down in delta
  const first = groups.get(keys[0])!;
  const guide: GuideLine = {
    n0: first.n[0],
    d0: first.delta[0] * 1.35,
    n1: first.n[0] * 10,
    d1: (first.delta[0] * 1.35) / Math.sqrt(10),
  };
  s += `<line id="slope-guide" x1="${x(guide.n0).toFixed(2)}" y1="${y(guide.d0).toFixed(2)}" x2="${x(guide.n1).toFixed(2)}" y2="${y(guide.d1).toFixed(2)}" stroke="#333" stroke-width="1.2" stroke-dasharray="6,3"/>\n`;
  s += `<text id="slope-guide-label" x="${(x(guide.n1) + 6).toFixed(2)}" y="${y(guide.d1).toFixed(2)}" font-size="11" fill="#333">slope -1/2 (${esc(fmt(guide.d0))} at N = ${esc(fmt(guide.n0))})</text>\n`;
  s += "</svg>\n";
  return { svg: s, series: keys, guide };
}
