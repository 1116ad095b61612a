/**
 * Minimal deterministic SVG builder: fixed canvas, fixed fonts, fixed
 * palette, stable number formatting, no timestamps or random ids, so a
 * rendered figure is byte-identical across runs (golden-image testable).
 */

export const WIDTH = 640;
export const HEIGHT = 480;
export const MARGIN = { left: 70, right: 24, top: 40, bottom: 52 };

export const PALETTE = ["#1b6ca8", "#d1495b", "#66a182", "#edae49", "#8d96a3"];

/** Stable short formatting for coordinates and labels. */
export function num(x: number): string {
  if (!isFinite(x)) return "0";
  if (x === 0) return "0";
  const s = x.toPrecision(6);
  return s.includes(".") || s.includes("e")
    ? s.replace(/\.?0+($|e)/, "$1")
    : s;
}

export interface Scale {
  (v: number): number;
  min: number;
  max: number;
  log: boolean;
}

function makeScale(
  min: number,
  max: number,
  outMin: number,
  outMax: number,
  log: boolean,
): Scale {
  const lo = log ? Math.log(min) : min;
  const hi = log ? Math.log(max) : max;
  const span = hi - lo || 1;
  const fn = ((v: number) => {
    const t = ((log ? Math.log(v) : v) - lo) / span;
    return outMin + t * (outMax - outMin);
  }) as Scale;
  fn.min = min;
  fn.max = max;
  fn.log = log;
  return fn;
}

function pad(min: number, max: number, log: boolean): [number, number] {
  if (log) return [min / 1.25, max * 1.25];
  const span = max - min || Math.abs(max) || 1;
  return [min - 0.08 * span, max + 0.08 * span];
}

export class Figure {
  private parts: string[] = [];
  xs: Scale;
  ys: Scale;

  constructor(
    xValues: number[],
    yValues: number[],
    opts: { logX?: boolean; logY?: boolean } = {},
  ) {
    const [x0, x1] = pad(Math.min(...xValues), Math.max(...xValues), !!opts.logX);
    const [y0, y1] = pad(Math.min(...yValues), Math.max(...yValues), !!opts.logY);
    this.xs = makeScale(x0, x1, MARGIN.left, WIDTH - MARGIN.right, !!opts.logX);
    this.ys = makeScale(y0, y1, HEIGHT - MARGIN.bottom, MARGIN.top, !!opts.logY);
  }

  add(element: string): void {
    this.parts.push(element);
  }

  text(x: number, y: number, content: string, opts = ""): void {
    this.add(
      `<text x="${num(x)}" y="${num(y)}" font-family="monospace" ` +
        `font-size="12" ${opts}>${escapeXml(content)}</text>`,
    );
  }

  line(x1: number, y1: number, x2: number, y2: number, style: string): void {
    this.add(
      `<line x1="${num(x1)}" y1="${num(y1)}" x2="${num(x2)}" ` +
        `y2="${num(y2)}" ${style}/>`,
    );
  }

  circle(cx: number, cy: number, r: number, fill: string): void {
    this.add(`<circle cx="${num(cx)}" cy="${num(cy)}" r="${r}" fill="${fill}"/>`);
  }

  rect(x: number, y: number, w: number, h: number, fill: string, extra = ""): void {
    this.add(
      `<rect x="${num(x)}" y="${num(y)}" width="${num(w)}" ` +
        `height="${num(h)}" fill="${fill}" ${extra}/>`,
    );
  }

  polyline(xs: number[], ys: number[], stroke: string, width = 1.5): void {
    const pts = xs
      .map((x, i) => `${num(this.xs(x))},${num(this.ys(ys[i]))}`)
      .join(" ");
    this.add(
      `<polyline points="${pts}" fill="none" stroke="${stroke}" ` +
        `stroke-width="${width}"/>`,
    );
  }

  axes(xLabel: string, yLabel: string, title: string): void {
    const x0 = MARGIN.left;
    const x1 = WIDTH - MARGIN.right;
    const y0 = HEIGHT - MARGIN.bottom;
    const y1 = MARGIN.top;
    const stroke = 'stroke="#222" stroke-width="1"';
    this.line(x0, y0, x1, y0, stroke);
    this.line(x0, y0, x0, y1, stroke);
    for (let i = 0; i <= 4; i++) {
      const t = i / 4;
      const vx = this.tickValue(this.xs, t);
      const vy = this.tickValue(this.ys, t);
      const px = x0 + t * (x1 - x0);
      const py = y0 + t * (y1 - y0);
      this.line(px, y0, px, y0 + 4, stroke);
      this.text(px - 14, y0 + 18, tickLabel(vx));
      this.line(x0 - 4, py, x0, py, stroke);
      this.text(8, py + 4, tickLabel(vy));
    }
    this.text((x0 + x1) / 2 - 4 * xLabel.length, HEIGHT - 12, xLabel);
    this.text(
      14,
      y1 - 10,
      yLabel,
    );
    this.text((x0 + x1) / 2 - 4 * title.length, 22, title, 'font-size="14"');
  }

  private tickValue(scale: Scale, t: number): number {
    if (scale.log) {
      const lo = Math.log(scale.min);
      const hi = Math.log(scale.max);
      return Math.exp(lo + t * (hi - lo));
    }
    return scale.min + t * (scale.max - scale.min);
  }

  render(): string {
    return (
      `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" ` +
      `height="${HEIGHT}" viewBox="0 0 ${WIDTH} ${HEIGHT}">\n` +
      `<rect width="${WIDTH}" height="${HEIGHT}" fill="#ffffff"/>\n` +
      this.parts.join("\n") +
      "\n</svg>\n"
    );
  }
}

export function tickLabel(v: number): string {
  if (v === 0) return "0";
  const a = Math.abs(v);
  if (a >= 0.01 && a < 10000) {
    return String(Number(v.toPrecision(3)));
  }
  return v.toExponential(1);
}

function escapeXml(s: string): string {
  return s
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;");
}

/** Five-stop diverging-free sequential colormap, interpolated in RGB. */
const STOPS: [number, number, number][] = [
  [13, 8, 135],
  [126, 3, 168],
  [204, 71, 120],
  [248, 149, 64],
  [240, 249, 33],
];

export function heatColor(t: number): string {
  const clamped = Math.max(0, Math.min(1, t));
  const pos = clamped * (STOPS.length - 1);
  const i = Math.min(Math.floor(pos), STOPS.length - 2);
  const f = pos - i;
  const c = STOPS[i].map((a, k) => Math.round(a + f * (STOPS[i + 1][k] - a)));
  return `rgb(${c[0]},${c[1]},${c[2]})`;
}
