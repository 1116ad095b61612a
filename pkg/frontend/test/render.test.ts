import assert from "node:assert/strict";
import { existsSync, mkdtempSync, readFileSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { test } from "node:test";
import { main } from "../src/cli";
import { column, readCsv } from "../src/csv";
import { MissingData } from "../src/errors";
import { fitLogLog } from "../src/fit";
import { render } from "../src/render";

const FIXTURES = join(__dirname, "..", "..", "fixtures");
const OUT = mkdtempSync(join(tmpdir(), "zaremba-figs-"));

function scalingSpec(name: string) {
  return {
    kind: "scaling_loglog" as const,
    input: join(FIXTURES, "scaling", "scaling.csv"),
    output: join(OUT, name),
  };
}

test("scaling annotation equals an independent re-fit and the runner JSON", () => {
  const result = render(scalingSpec("scaling.svg"));
  const table = readCsv(join(FIXTURES, "scaling", "scaling.csv"));
  const refit = fitLogLog(column(table, "r"), column(table, "capacity"));
  assert.equal(result.annotations.slope, refit.slope);
  const summary = JSON.parse(
    readFileSync(join(FIXTURES, "scaling", "summary.json"), "utf8"),
  );
  assert.ok(
    Math.abs(result.annotations.slope - summary.results.fitted_slope) <= 0.005,
    "re-fitted slope must match the runner's slope to 2 decimals",
  );
  const svg = readFileSync(join(OUT, "scaling.svg"), "utf8");
  assert.ok(svg.includes(`fitted slope = ${refit.slope.toFixed(3)}`));
  assert.ok(svg.includes("theory n + s - q"));
});

test("golden image: two renders are byte-identical", () => {
  render(scalingSpec("g1.svg"));
  render(scalingSpec("g2.svg"));
  assert.deepEqual(
    readFileSync(join(OUT, "g1.svg")),
    readFileSync(join(OUT, "g2.svg")),
  );
});

test("rendering never mutates the input CSV", () => {
  const path = join(FIXTURES, "scaling", "scaling.csv");
  const before = readFileSync(path);
  render(scalingSpec("mut.svg"));
  assert.deepEqual(readFileSync(path), before);
});

test("meyers stability curves, stable columns highlighted", () => {
  const result = render({
    kind: "meyers_stability",
    input: join(FIXTURES, "meyers", "meyers.csv"),
    output: join(OUT, "meyers.svg"),
  });
  assert.equal(result.annotations.curves, 3);
  const svg = readFileSync(join(OUT, "meyers.svg"), "utf8");
  assert.ok(svg.includes("(stable)"));
});

test("comparability band annotates the spread", () => {
  const result = render({
    kind: "comparability_band",
    input: join(FIXTURES, "comparability", "comparability.csv"),
    output: join(OUT, "comp.svg"),
  });
  const table = readCsv(join(FIXTURES, "comparability", "comparability.csv"));
  const ratios = column(table, "ratio");
  const spread = Math.max(...ratios) / Math.min(...ratios);
  assert.equal(result.annotations.spread, spread);
});

test("cen scatter draws the min-ratio line", () => {
  const result = render({
    kind: "cen_scatter",
    input: join(FIXTURES, "cen", "cen.csv"),
    output: join(OUT, "cen.svg"),
  });
  const table = readCsv(join(FIXTURES, "cen", "cen.csv"));
  assert.equal(result.annotations.min_ratio,
    Math.min(...column(table, "ratio")));
  const svg = readFileSync(join(OUT, "cen.svg"), "utf8");
  assert.ok(svg.includes("min ratio (c0 candidate)"));
  assert.ok(svg.includes("stroke-dasharray"));
});

test("potential heatmap covers the nodal range", () => {
  const result = render({
    kind: "potential_heatmap",
    input: join(FIXTURES, "solve", "solution.csv"),
    output: join(OUT, "heat.svg"),
  });
  const table = readCsv(join(FIXTURES, "solve", "solution.csv"));
  const u = column(table, "u");
  assert.equal(result.annotations.u_min, Math.min(...u));
  assert.equal(result.annotations.u_max, Math.max(...u));
});

test("empty-but-valid CSV: MissingData, no file written", () => {
  const empty = join(OUT, "empty.csv");
  writeFileSync(
    empty,
    "# schema_version=1\n# config_hash=deadbeef\nr,m,q,s,capacity,mu_Q,ratio,iterations\n",
  );
  const out = join(OUT, "empty.svg");
  assert.throws(
    () => render({ kind: "scaling_loglog", input: empty, output: out }),
    MissingData,
  );
  assert.ok(!existsSync(out));
});

test("cli exit codes", () => {
  assert.equal(
    main([
      "scaling_loglog",
      join(FIXTURES, "scaling", "scaling.csv"),
      join(OUT, "cli.svg"),
      "--summary",
      join(FIXTURES, "scaling", "summary.json"),
    ]),
    0,
  );
  assert.equal(main(["bogus_kind", "a.csv", "b.svg"]), 2);
  const empty = join(OUT, "empty2.csv");
  writeFileSync(
    empty,
    "# schema_version=1\nr,m,q,s,capacity,mu_Q,ratio,iterations\n",
  );
  assert.equal(
    main(["scaling_loglog", empty, join(OUT, "never.svg")]),
    3,
  );
  // a summary whose slope disagrees is flagged
  const badSummary = join(OUT, "bad_summary.json");
  writeFileSync(badSummary,
    JSON.stringify({ results: { fitted_slope: 0.42 } }));
  assert.equal(
    main([
      "scaling_loglog",
      join(FIXTURES, "scaling", "scaling.csv"),
      join(OUT, "cli2.svg"),
      "--summary",
      badSummary,
    ]),
    4,
  );
});
