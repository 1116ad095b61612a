/**
 * zaremba-figures <kind> <input.csv> <output.svg> [--summary summary.json]
 *
 * With --summary the re-fitted scaling slope is cross-checked against the
 * runner's reported value; disagreement beyond two decimals exits nonzero.
 */

import { readFileSync } from "fs";
import { MissingColumn, MissingData, SchemaMismatch } from "./errors";
import { matchesTwoDecimals } from "./fit";
import { PlotKind, PlotSpec, render } from "./render";

const KINDS: PlotKind[] = [
  "scaling_loglog",
  "meyers_stability",
  "comparability_band",
  "cen_scatter",
  "potential_heatmap",
];

export function main(argv: string[]): number {
  const rest = [...argv];
  let summaryPath: string | null = null;
  const summaryIdx = rest.indexOf("--summary");
  if (summaryIdx >= 0) {
    summaryPath = rest[summaryIdx + 1] ?? null;
    rest.splice(summaryIdx, 2);
  }
  const args = rest.filter((a) => !a.startsWith("--"));
  if (args.length !== 3 || !KINDS.includes(args[0] as PlotKind)) {
    console.error(
      `usage: zaremba-figures <${KINDS.join("|")}> <input.csv> <output.svg> ` +
        "[--summary summary.json]",
    );
    return 2;
  }
  const spec: PlotSpec = {
    kind: args[0] as PlotKind,
    input: args[1],
    output: args[2],
  };
  try {
    const result = render(spec);
    const parts = Object.entries(result.annotations)
      .map(([k, v]) => `${k}=${v}`)
      .join(" ");
    console.log(`${spec.output}: ${parts}`);
    if (summaryPath && spec.kind === "scaling_loglog") {
      const summary = JSON.parse(readFileSync(summaryPath, "utf8"));
      const reported = summary.results?.fitted_slope;
      if (typeof reported !== "number") {
        console.error("summary has no results.fitted_slope");
        return 4;
      }
      if (!matchesTwoDecimals(result.annotations.slope, reported)) {
        console.error(
          `slope mismatch: refit ${result.annotations.slope} vs ` +
            `summary ${reported}`,
        );
        return 4;
      }
      console.log(`slope agrees with summary to 2 decimals (${reported})`);
    }
    return 0;
  } catch (err) {
    if (
      err instanceof SchemaMismatch ||
      err instanceof MissingColumn ||
      err instanceof MissingData
    ) {
      console.error(`${err.constructor.name}: ${err.message}`);
      return 3;
    }
    throw err;
  }
}

if (require.main === module) {
  process.exit(main(process.argv.slice(2)));
}
