/** Least-squares line fit; the slope re-fits are independent of any summary. */

export interface LineFit {
  slope: number;
  intercept: number;
}

export function fitLine(xs: number[], ys: number[]): LineFit {
  const n = xs.length;
  if (n < 2 || ys.length !== n) {
    throw new Error("need at least two paired samples");
  }
  const mx = xs.reduce((a, b) => a + b, 0) / n;
  const my = ys.reduce((a, b) => a + b, 0) / n;
  let sxx = 0;
  let sxy = 0;
  for (let i = 0; i < n; i++) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  const slope = sxy / sxx;
  return { slope, intercept: my - slope * mx };
}

export function fitLogLog(xs: number[], ys: number[]): LineFit {
  return fitLine(xs.map(Math.log), ys.map(Math.log));
}

/** Agreement to two decimal places. */
export function matchesTwoDecimals(a: number, b: number): boolean {
  return Math.abs(a - b) <= 0.005;
}
