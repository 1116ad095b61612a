/**
 * Figure kinds over the experiment CSV schemas.
 *
 * Every renderer re-derives whatever it annotates from the CSV itself (the
 * log-log slope is re-fitted here, never copied from a summary), so the
 * figures double as an independent check of the runner's reported values.
 */

import { writeFileSync } from "fs";
import { column, readCsv, Table } from "./csv";
import { MissingData } from "./errors";
import { fitLogLog } from "./fit";
import { Figure, heatColor, num, PALETTE, tickLabel } from "./svg";

export type PlotKind =
  | "scaling_loglog"
  | "meyers_stability"
  | "comparability_band"
  | "cen_scatter"
  | "potential_heatmap";

export interface PlotSpec {
  kind: PlotKind;
  input: string;
  output: string;
  title?: string;
}

export interface RenderResult {
  svg: string;
  /** kind-specific scalars, e.g. the re-fitted slope */
  annotations: Record<string, number>;
}

function requireRows(table: Table): void {
  if (table.rows.length === 0) {
    throw new MissingData("CSV has a valid header but no data rows");
  }
}

export function renderScalingLoglog(table: Table, title: string): RenderResult {
  requireRows(table);
  const r = column(table, "r");
  const cap = column(table, "capacity");
  const s = column(table, "s")[0];
  const q = column(table, "q")[0];
  const fit = fitLogLog(r, cap);
  const theory = 2 + s - q;
  const fig = new Figure(r, cap, { logX: true, logY: true });
  fig.axes("r", "capacity", title);
  // fitted line across the data range
  const rLine = [Math.min(...r), Math.max(...r)];
  const capLine = rLine.map((x) =>
    Math.exp(fit.intercept + fit.slope * Math.log(x)),
  );
  fig.polyline(rLine, capLine, PALETTE[4], 1.0);
  r.forEach((x, i) => fig.circle(fig.xs(x), fig.ys(cap[i]), 3.5, PALETTE[0]));
  fig.text(
    90,
    52,
    `fitted slope = ${fit.slope.toFixed(3)}`,
    `fill="${PALETTE[1]}"`,
  );
  fig.text(90, 68, `theory n + s - q = ${theory.toFixed(3)}`);
  return { svg: fig.render(), annotations: { slope: fit.slope, theory } };
}

export function renderMeyersStability(table: Table, title: string): RenderResult {
  requireRows(table);
  const delta = column(table, "delta");
  const m = column(table, "m");
  const ratio = column(table, "ratio");
  const stable = column(table, "stable");
  const deltas = [...new Set(delta)].sort((a, b) => a - b);
  const fig = new Figure(m, ratio, { logX: true });
  fig.axes("cells per axis m", "N_u / N_G", title);
  deltas.forEach((d, k) => {
    const idx = delta
      .map((v, i) => (v === d ? i : -1))
      .filter((i) => i >= 0)
      .sort((a, b) => m[a] - m[b]);
    const xs = idx.map((i) => m[i]);
    const ys = idx.map((i) => ratio[i]);
    const isStable = stable[idx[idx.length - 1]] === 1;
    const color = PALETTE[k % PALETTE.length];
    fig.polyline(xs, ys, color, isStable ? 2.5 : 1.0);
    xs.forEach((x, i) => fig.circle(fig.xs(x), fig.ys(ys[i]), 3, color));
    fig.text(
      90,
      52 + 16 * k,
      `delta=${num(d)}${isStable ? " (stable)" : ""}`,
      `fill="${color}"`,
    );
  });
  return { svg: fig.render(), annotations: { curves: deltas.length } };
}

export function renderComparabilityBand(
  table: Table,
  title: string,
): RenderResult {
  requireRows(table);
  const r = column(table, "r");
  const ratio = column(table, "ratio");
  const lo = Math.min(...ratio);
  const hi = Math.max(...ratio);
  const fig = new Figure(r, [lo * 0.8, hi * 1.2], { logX: true });
  fig.axes("r", "C r (Cap/mu)^(1/q)", title);
  const yLo = fig.ys(hi); // larger value maps to the smaller pixel y
  const yHi = fig.ys(lo);
  fig.rect(fig.xs(fig.xs.min), yLo, fig.xs(fig.xs.max) - fig.xs(fig.xs.min),
    yHi - yLo, "#e8eef4", 'stroke="none"');
  r.forEach((x, i) => fig.circle(fig.xs(x), fig.ys(ratio[i]), 4, PALETTE[0]));
  const spread = hi / lo;
  fig.text(90, 52, `spread max/min = ${spread.toFixed(4)}`,
    `fill="${PALETTE[1]}"`);
  return { svg: fig.render(), annotations: { spread } };
}

export function renderCenScatter(table: Table, title: string): RenderResult {
  requireRows(table);
  const r = column(table, "r");
  const ratio = column(table, "ratio");
  const minRatio = Math.min(...ratio);
  const fig = new Figure(r, ratio.concat([0]), { logX: true });
  fig.axes("r", "r^q Cap / mu(Q_r)", title);
  r.forEach((x, i) => fig.circle(fig.xs(x), fig.ys(ratio[i]), 3.5, PALETTE[2]));
  const y = fig.ys(minRatio);
  fig.line(fig.xs(fig.xs.min), y, fig.xs(fig.xs.max), y,
    `stroke="${PALETTE[1]}" stroke-width="1.5" stroke-dasharray="6,4"`);
  fig.text(90, 52, `min ratio (c0 candidate) = ${tickLabel(minRatio)}`,
    `fill="${PALETTE[1]}"`);
  return { svg: fig.render(), annotations: { min_ratio: minRatio } };
}

export function renderPotentialHeatmap(
  table: Table,
  title: string,
): RenderResult {
  requireRows(table);
  const x1 = column(table, "x1");
  const x2 = column(table, "x2");
  const u = column(table, "u");
  const xsUnique = [...new Set(x1)].sort((a, b) => a - b);
  const ysUnique = [...new Set(x2)].sort((a, b) => a - b);
  const uMin = Math.min(...u);
  const uMax = Math.max(...u);
  const span = uMax - uMin || 1;
  const fig = new Figure(x1, x2);
  fig.axes("x1", "x2", title);
  const w = Math.abs(fig.xs(xsUnique[1]) - fig.xs(xsUnique[0]));
  const h = Math.abs(fig.ys(ysUnique[1]) - fig.ys(ysUnique[0]));
  for (let i = 0; i < u.length; i++) {
    const px = fig.xs(x1[i]) - w / 2;
    const py = fig.ys(x2[i]) - h / 2;
    fig.rect(px, py, w, h, heatColor((u[i] - uMin) / span));
  }
  fig.text(90, 52, `u in [${tickLabel(uMin)}, ${tickLabel(uMax)}]`);
  return { svg: fig.render(), annotations: { u_min: uMin, u_max: uMax } };
}

const RENDERERS: Record<PlotKind, (t: Table, title: string) => RenderResult> = {
  scaling_loglog: renderScalingLoglog,
  meyers_stability: renderMeyersStability,
  comparability_band: renderComparabilityBand,
  cen_scatter: renderCenScatter,
  potential_heatmap: renderPotentialHeatmap,
};

/** Render a spec to its SVG file; the input CSV is never modified. */
export function render(spec: PlotSpec): RenderResult {
  const table = readCsv(spec.input);
  const title = spec.title ?? spec.kind;
  const result = RENDERERS[spec.kind](table, title);
  writeFileSync(spec.output, result.svg);
  return result;
}
