import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

import { describe, expect, it } from "vitest";

import { CsvError } from "../src/csv.js";
import { plotScaling } from "../src/scaling.js";

const FIXTURES = join(dirname(fileURLToPath(import.meta.url)), "fixtures");
const scalingCsv = readFileSync(join(FIXTURES, "scaling_small.csv"), "utf-8");

describe("plotScaling", () => {
  it("renders one series per strategy/covariance pair", () => {
    const { svg, series } = plotScaling(scalingCsv);
    expect(series).toEqual(["local/binomial", "cc/multinomial", "cc/independent"]);
    for (const key of series) {
      expect(svg).toContain(key);
    }
  });

  it("includes a slope minus one half guide line on log-log axes", () => {
    const { svg, guide } = plotScaling(scalingCsv);
    expect(svg).toContain('id="slope-guide"');
    const slope =
      (Math.log10(guide.d1) - Math.log10(guide.d0)) /
      (Math.log10(guide.n1) - Math.log10(guide.n0));
    expect(slope).toBeCloseTo(-0.5, 12);
  });

  it("fixture data itself scales as one over sqrt(N)", () => {
    // the fixture is real pipeline output: rescaled values are constant
    const lines = scalingCsv.trim().split("\n").slice(1);
    const local = lines
      .map((l) => l.split(","))
      .filter((c) => c[0] === "local")
      .map((c) => ({ n: Number(c[2]), d: Number(c[3]) }));
    const rescaled = local.map((p) => p.d * Math.sqrt(p.n));
    for (const value of rescaled) {
      expect(value / rescaled[0]).toBeCloseTo(1.0, 9);
    }
  });

  it("rejects non-positive values for the log axes", () => {
    const bad = "strategy,covariance,N,delta_av\nlocal,binomial,100,0\n";
    expect(() => plotScaling(bad)).toThrow(CsvError);
  });
});
