/** Sweep figure: average uncertainty versus relative azimuth, with the
 * grid minimum annotated verbatim from the CSV argmin row. */
import {
  bandPath,
  axes,
  frame,
  fmt,
  esc,
  linearScale,
  niceTicks,
  polylinePath,
  title,
} from "./chart.js";
import { numeric, parseCsv, requireColumns, Table } from "./csv.js";

export interface SweepPlot {
  svg: string;
  minIndex: number;
  minRow: Record<string, string>;
}

export function plotSweep(csvText: string): SweepPlot {
  const table: Table = parseCsv(csvText);
  requireColumns(table, ["phi_nm", "delta_av", "stderr", "M", "N", "seed"]);
  const phi = numeric(table, "phi_nm");
  const delta = numeric(table, "delta_av");
  const err = numeric(table, "stderr");

  let minIndex = 0;
  for (let i = 1; i < delta.length; i++) {
    if (delta[i] < delta[minIndex]) minIndex = i;
  }
  const minRow = table.rows[minIndex];

  const upper = delta.map((d, i) => d + err[i]);
  const lower = delta.map((d, i) => d - err[i]);
  const f = frame();
  const x = linearScale(Math.min(...phi), Math.max(...phi), f.plotLeft, f.plotRight);
  const yMax = Math.max(...upper) * 1.05;
  const y = linearScale(0, yMax, f.plotBottom, f.plotTop);

  const xs = phi.map(x);
  let s = f.svgOpen;
  s += title(
    f,
    "Average uncertainty of the reduced-determinant estimate",
    `isotropic ensemble, M = ${minRow["M"]} states, N = ${minRow["N"]} pairs, seed ${minRow["seed"]}`
  );
  s += axes(f, niceTicks(x.min, x.max, 6), niceTicks(0, yMax, 6), x, y, "relative azimuth phi_nm (rad)", "delta_av");
  s += `<path d="${bandPath(xs, upper.map(y), lower.map(y))}" fill="#4361ee" opacity="0.18"/>\n`;
  s += `<path d="${polylinePath(xs, delta.map(y))}" fill="none" stroke="#4361ee" stroke-width="1.8"/>\n`;

  // minimum annotation, quoting the argmin row verbatim
  const mx = x(phi[minIndex]);
  const my = y(delta[minIndex]);
  const label = `min: phi_nm = ${minRow["phi_nm"]}, delta_av = ${minRow["delta_av"]}`;
  const anchor = mx > (f.plotLeft + f.plotRight) / 2 ? "end" : "start";
  const tx = anchor === "end" ? mx - 10 : mx + 10;
  s += `<circle id="minimum-marker" cx="${mx.toFixed(2)}" cy="${my.toFixed(2)}" r="4" fill="#e63946"/>\n`;
  s += `<line x1="${mx.toFixed(2)}" y1="${my.toFixed(2)}" x2="${mx.toFixed(2)}" y2="${(my - 26).toFixed(2)}" stroke="#e63946" stroke-width="1" stroke-dasharray="3,2"/>\n`;
  s += `<text id="minimum-label" x="${tx.toFixed(2)}" y="${(my - 32).toFixed(2)}" font-size="11" text-anchor="${anchor}" fill="#e63946">${esc(label)}</text>\n`;
  s += `<text x="${(f.plotRight - 6).toFixed(2)}" y="${(f.plotTop + 16).toFixed(2)}" font-size="11" text-anchor="end" fill="#4361ee">delta_av with +-1 standard error band (min marker at ${esc(fmt(phi[minIndex]))} rad)</text>\n`;
  s += "</svg>\n";
  return { svg: s, minIndex, minRow };
}
