/** Shared SVG chart scaffolding: layout, scales, ticks, path builders. */

export const WIDTH = 720;
export const HEIGHT = 420;
export const MARGIN = { left: 72, right: 24, top: 44, bottom: 56 };

export interface Scale {
  (value: number): number;
  min: number;
  max: number;
}

export function linearScale(min: number, max: number, from: number, to: number): Scale {
  const span = max - min || 1;
  const scale = ((value: number) => from + ((value - min) / span) * (to - from)) as Scale;
  scale.min = min;
  scale.max = max;
  return scale;
}

export function log10Scale(min: number, max: number, from: number, to: number): Scale {
  const lo = Math.log10(min);
  const hi = Math.log10(max);
  const span = hi - lo || 1;
  const scale = ((value: number) =>
    from + ((Math.log10(value) - lo) / span) * (to - from)) as Scale;
  scale.min = min;
  scale.max = max;
  return scale;
}

/** Round ticks covering [min, max], at most `count + 1` of them. */
export function niceTicks(min: number, max: number, count: number): number[] {
  const span = max - min || 1;
  const rawStep = span / count;
  const power = Math.pow(10, Math.floor(Math.log10(rawStep)));
  const candidates = [1, 2, 2.5, 5, 10].map((m) => m * power);
  const step = candidates.find((s) => span / s <= count) ?? candidates[candidates.length - 1];
  const ticks: number[] = [];
  for (let v = Math.ceil(min / step) * step; v <= max + step * 1e-9; v += step) {
    ticks.push(Number(v.toPrecision(12)));
  }
  return ticks;
}

export function decadeTicks(min: number, max: number): number[] {
  const ticks: number[] = [];
  for (let e = Math.ceil(Math.log10(min) - 1e-9); e <= Math.log10(max) + 1e-9; e++) {
    ticks.push(Math.pow(10, e));
  }
  return ticks;
}

export function esc(text: string): string {
  return text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

export function fmt(value: number): string {
  if (value === 0) return "0";
  const magnitude = Math.abs(value);
  if (magnitude >= 1000 || magnitude < 0.001) return value.toExponential(1);
  return String(Number(value.toPrecision(4)));
}

export function polylinePath(xs: number[], ys: number[]): string {
  return xs
    .map((x, i) => `${i === 0 ? "M" : "L"}${x.toFixed(2)},${ys[i].toFixed(2)}`)
    .join(" ");
}

/** Closed band between an upper and a lower trace (for error bands). */
export function bandPath(xs: number[], upper: number[], lower: number[]): string {
  const forward = xs.map((x, i) => `${i === 0 ? "M" : "L"}${x.toFixed(2)},${upper[i].toFixed(2)}`);
  const backward = xs
    .map((x, i) => `L${x.toFixed(2)},${lower[i].toFixed(2)}`)
    .reverse();
  return `${forward.join(" ")} ${backward.join(" ")} Z`;
}

export interface Frame {
  svgOpen: string;
  plotLeft: number;
  plotRight: number;
  plotTop: number;
  plotBottom: number;
}

export function frame(): Frame {
  return {
    svgOpen:
      `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" ` +
      `viewBox="0 0 ${WIDTH} ${HEIGHT}" font-family="Helvetica, Arial, sans-serif">\n` +
      `<rect width="${WIDTH}" height="${HEIGHT}" fill="#ffffff"/>\n`,
    plotLeft: MARGIN.left,
    plotRight: WIDTH - MARGIN.right,
    plotTop: MARGIN.top,
    plotBottom: HEIGHT - MARGIN.bottom,
  };
}

export function axes(
  f: Frame,
  xTicks: number[],
  yTicks: number[],
  xScale: Scale,
  yScale: Scale,
  xLabel: string,
  yLabel: string,
  xFmt: (v: number) => string = fmt,
  yFmt: (v: number) => string = fmt
): string {
  let s = "";
  for (const v of yTicks) {
    const y = yScale(v);
    s += `<line x1="${f.plotLeft}" y1="${y.toFixed(2)}" x2="${f.plotRight}" y2="${y.toFixed(2)}" stroke="#e8e8e8" stroke-width="1"/>\n`;
    s += `<text x="${f.plotLeft - 8}" y="${(y + 3.5).toFixed(2)}" font-size="11" text-anchor="end" fill="#444">${esc(yFmt(v))}</text>\n`;
  }
  for (const v of xTicks) {
    const x = xScale(v);
    s += `<line x1="${x.toFixed(2)}" y1="${f.plotTop}" x2="${x.toFixed(2)}" y2="${f.plotBottom}" stroke="#f2f2f2" stroke-width="1"/>\n`;
    s += `<text x="${x.toFixed(2)}" y="${f.plotBottom + 18}" font-size="11" text-anchor="middle" fill="#444">${esc(xFmt(v))}</text>\n`;
  }
  s += `<rect x="${f.plotLeft}" y="${f.plotTop}" width="${f.plotRight - f.plotLeft}" height="${f.plotBottom - f.plotTop}" fill="none" stroke="#999" stroke-width="1"/>\n`;
  s += `<text x="${(f.plotLeft + f.plotRight) / 2}" y="${f.plotBottom + 40}" font-size="13" text-anchor="middle" fill="#222">${esc(xLabel)}</text>\n`;
  s += `<text x="18" y="${(f.plotTop + f.plotBottom) / 2}" font-size="13" text-anchor="middle" fill="#222" transform="rotate(-90 18 ${(f.plotTop + f.plotBottom) / 2})">${esc(yLabel)}</text>\n`;
  return s;
}

export function title(f: Frame, text: string, subtitle: string): string {
  return (
    `<text x="${f.plotLeft}" y="20" font-size="15" font-weight="600" fill="#111">${esc(text)}</text>\n` +
    `<text x="${f.plotLeft}" y="36" font-size="11" fill="#777">${esc(subtitle)}</text>\n`
  );
}
