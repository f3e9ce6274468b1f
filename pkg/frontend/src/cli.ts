/** plot <sweep|scaling> --in <csv> --out <image>
 *
 * Renders a simulation CSV as a figure. Both vector and raster files are
 * written: the requested path plus a sibling with the other extension.
 * Exit codes: 0 success, 1 usage error or unreadable/malformed input.
 */
import { readFileSync, writeFileSync } from "node:fs";
import { parseArgs } from "node:util";

import { Resvg } from "@resvg/resvg-js";

import { CsvError } from "./csv.js";
import { plotScaling } from "./scaling.js";
import { plotSweep } from "./sweep.js";

const USAGE = "usage: plot <sweep|scaling> --in <csv> --out <image.svg|.png>";

function outputPaths(out: string): { svg: string; png: string } {
  if (out.endsWith(".svg")) return { svg: out, png: out.slice(0, -4) + ".png" };
  if (out.endsWith(".png")) return { svg: out.slice(0, -4) + ".svg", png: out };
  return { svg: out + ".svg", png: out + ".png" };
}

export function main(argv: string[]): number {
  let parsed;
  try {
    parsed = parseArgs({
      args: argv,
      allowPositionals: true,
      options: {
        in: { type: "string" },
        out: { type: "string" },
      },
    });
  } catch (error) {
    console.error(`plot: ${(error as Error).message}`);
    console.error(USAGE);
    return 1;
  }
  const [kind] = parsed.positionals;
  const input = parsed.values.in;
  const output = parsed.values.out;
  if (!kind || !input || !output || parsed.positionals.length !== 1) {
    console.error(USAGE);
    return 1;
  }
  if (kind !== "sweep" && kind !== "scaling") {
    console.error(`plot: unknown plot kind ${kind}`);
    console.error(USAGE);
    return 1;
  }

  let csvText: string;
  try {
    csvText = readFileSync(input, "utf-8");
  } catch (error) {
    console.error(`plot: cannot read ${input}: ${(error as Error).message}`);
    return 1;
  }

  let svg: string;
  try {
    if (kind === "sweep") {
      const result = plotSweep(csvText);
      svg = result.svg;
      console.error(
        `minimum row ${result.minIndex}: phi_nm = ${result.minRow["phi_nm"]}, ` +
          `delta_av = ${result.minRow["delta_av"]}`
      );
    } else {
      const result = plotScaling(csvText);
      svg = result.svg;
      console.error(`series: ${result.series.join(", ")}`);
    }
  } catch (error) {
    if (error instanceof CsvError) {
      console.error(`plot: ${input}: ${error.message}`);
      return 1;
    }
    throw error;
  }

  const paths = outputPaths(output);
  try {
    writeFileSync(paths.svg, svg);
    writeFileSync(paths.png, new Resvg(svg).render().asPng());
  } catch (error) {
    console.error(`plot: cannot write output: ${(error as Error).message}`);
    return 1;
  }
  console.error(`wrote ${paths.svg} and ${paths.png}`);
  return 0;
}
