/**
 * Minimal deterministic SVG line charts. No DOM, no timestamps: the same
 * inputs always produce the same bytes.
 */

export interface Series {
  label: string;
  x: ArrayLike<number>;
  y: ArrayLike<number>;
  color: string;
  dash?: string;
}

export interface HLine {
  y: number;
  color: string;
  label?: string;
}

export interface ChartSpec {
  title: string;
  xLabel: string;
  yLabel: string;
  series: Series[];
  hlines?: HLine[];
  width?: number;
  height?: number;
  equalAspect?: boolean;
}

const MARGIN = { left: 62, right: 16, top: 34, bottom: 44 };

const fmt = (v: number): string => {
  const s = v.toFixed(3);
  return s === "-0.000" ? "0.000" : s;
};

function niceTicks(lo: number, hi: number, n = 6): number[] {
  if (!(hi > lo)) {
    hi = lo + 1;
  }
  const span = hi - lo;
  const step0 = span / n;
  const mag = Math.pow(10, Math.floor(Math.log10(step0)));
  const candidates = [1, 2, 2.5, 5, 10].map((m) => m * mag);
  const step = candidates.find((c) => c >= step0) ?? candidates[candidates.length - 1];
  const first = Math.ceil(lo / step) * step;
  const ticks: number[] = [];
  for (let v = first; v <= hi + 1e-12 * span; v += step) {
    ticks.push(Math.abs(v) < 1e-12 * span ? 0 : v);
  }
  return ticks;
}

function extent(values: ArrayLike<number>[]): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const arr of values) {
    for (let i = 0; i < arr.length; i++) {
      const v = arr[i];
      if (v < lo) lo = v;
      if (v > hi) hi = v;
    }
  }
  if (!Number.isFinite(lo)) {
    lo = 0;
    hi = 1;
  }
  if (lo === hi) {
    lo -= 0.5;
    hi += 0.5;
  }
  return [lo, hi];
}

function esc(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

/** Render a chart to an SVG string. */
export function renderChart(spec: ChartSpec): string {
  const width = spec.width ?? 720;
  const height = spec.height ?? 440;
  const plotW = width - MARGIN.left - MARGIN.right;
  const plotH = height - MARGIN.top - MARGIN.bottom;

  let [xLo, xHi] = extent(spec.series.map((s) => s.x));
  let [yLo, yHi] = extent(spec.series.map((s) => s.y));
  for (const h of spec.hlines ?? []) {
    yLo = Math.min(yLo, h.y);
    yHi = Math.max(yHi, h.y);
  }
  const yPad = 0.06 * (yHi - yLo);
  yLo -= yPad;
  yHi += yPad;
  if (spec.equalAspect) {
    const xSpan = xHi - xLo;
    const ySpan = yHi - yLo;
    const perX = xSpan / plotW;
    const perY = ySpan / plotH;
    const per = Math.max(perX, perY);
    const xMid = 0.5 * (xLo + xHi);
    const yMid = 0.5 * (yLo + yHi);
    xLo = xMid - 0.5 * per * plotW;
    xHi = xMid + 0.5 * per * plotW;
    yLo = yMid - 0.5 * per * plotH;
    yHi = yMid + 0.5 * per * plotH;
  }

  const sx = (v: number) => MARGIN.left + ((v - xLo) / (xHi - xLo)) * plotW;
  const sy = (v: number) => MARGIN.top + plotH - ((v - yLo) / (yHi - yLo)) * plotH;

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" ` +
    `viewBox="0 0 ${width} ${height}" font-family="Helvetica, Arial, sans-serif">`);
  parts.push(`<rect width="${width}" height="${height}" fill="white"/>`);
  parts.push(`<text x="${width / 2}" y="20" text-anchor="middle" font-size="15">` +
    `${esc(spec.title)}</text>`);

  for (const tv of niceTicks(xLo, xHi)) {
    const x = sx(tv);
    parts.push(`<line x1="${fmt(x)}" y1="${MARGIN.top}" x2="${fmt(x)}" ` +
      `y2="${MARGIN.top + plotH}" stroke="#dddddd" stroke-width="1"/>`);
    parts.push(`<text x="${fmt(x)}" y="${MARGIN.top + plotH + 18}" ` +
      `text-anchor="middle" font-size="11">${+tv.toPrecision(6)}</text>`);
  }
  for (const tv of niceTicks(yLo, yHi)) {
    const y = sy(tv);
    parts.push(`<line x1="${MARGIN.left}" y1="${fmt(y)}" ` +
      `x2="${MARGIN.left + plotW}" y2="${fmt(y)}" stroke="#dddddd" stroke-width="1"/>`);
    parts.push(`<text x="${MARGIN.left - 8}" y="${fmt(y + 4)}" ` +
      `text-anchor="end" font-size="11">${+tv.toPrecision(6)}</text>`);
  }
  parts.push(`<rect x="${MARGIN.left}" y="${MARGIN.top}" width="${plotW}" ` +
    `height="${plotH}" fill="none" stroke="#333333"/>`);

  for (const h of spec.hlines ?? []) {
    const y = sy(h.y);
    parts.push(`<line x1="${MARGIN.left}" y1="${fmt(y)}" ` +
      `x2="${MARGIN.left + plotW}" y2="${fmt(y)}" stroke="${h.color}" ` +
      `stroke-width="1.2" stroke-dasharray="6 4"/>`);
    if (h.label) {
      parts.push(`<text x="${MARGIN.left + plotW - 4}" y="${fmt(y - 4)}" ` +
        `text-anchor="end" font-size="10" fill="${h.color}">${esc(h.label)}</text>`);
    }
  }

  for (const s of spec.series) {
    const pts: string[] = [];
    for (let i = 0; i < s.x.length; i++) {
      pts.push(`${fmt(sx(s.x[i]))},${fmt(sy(s.y[i]))}`);
    }
    const dash = s.dash ? ` stroke-dasharray="${s.dash}"` : "";
    parts.push(`<polyline points="${pts.join(" ")}" fill="none" ` +
      `stroke="${s.color}" stroke-width="1.6"${dash}/>`);
  }

  let ly = MARGIN.top + 14;
  for (const s of spec.series) {
    const lx = MARGIN.left + 10;
    parts.push(`<line x1="${lx}" y1="${ly - 4}" x2="${lx + 22}" y2="${ly - 4}" ` +
      `stroke="${s.color}" stroke-width="2"/>`);
    parts.push(`<text x="${lx + 28}" y="${ly}" font-size="11">${esc(s.label)}</text>`);
    ly += 15;
  }

  parts.push(`<text x="${MARGIN.left + plotW / 2}" y="${height - 8}" ` +
    `text-anchor="middle" font-size="12">${esc(spec.xLabel)}</text>`);
  parts.push(`<text x="16" y="${MARGIN.top + plotH / 2}" text-anchor="middle" ` +
    `font-size="12" transform="rotate(-90 16 ${MARGIN.top + plotH / 2})">` +
    `${esc(spec.yLabel)}</text>`);
  parts.push("</svg>");
  return parts.join("\n") + "\n";
}
