/** Static SVG rendering for the aggregated figures. One sub-plot per panel,
 * shared y-scale inside a panel, series lines with translucent bands. */

import { FigureData, Panel, Point, Series } from "./figures.js";

export interface RenderOptions {
  logX?: boolean;
  width?: number;
  height?: number;
}

const COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];
const MARGIN = { top: 34, right: 16, bottom: 42, left: 64 };

function fmt(x: number): string {
  if (!Number.isFinite(x)) return "0";
  return Number(x.toPrecision(6)).toString();
}

function niceTicks(lo: number, hi: number, count: number): number[] {
  if (!(hi > lo)) return [lo];
  const span = hi - lo;
  const step = 10 ** Math.floor(Math.log10(span / count));
  const candidates = [step, 2 * step, 5 * step, 10 * step];
  const chosen = candidates.find((s) => span / s <= count) ?? 10 * step;
  const first = Math.ceil(lo / chosen) * chosen;
  const ticks: number[] = [];
  for (let v = first; v <= hi + 1e-12 * span; v += chosen) ticks.push(v);
  return ticks;
}

interface Scale {
  (v: number): number;
}

function makeScale(lo: number, hi: number, outLo: number, outHi: number, log: boolean): Scale {
  const t = (v: number) => (log ? Math.log10(v) : v);
  const a = t(lo);
  const b = t(hi);
  const span = b - a || 1;
  return (v: number) => outLo + ((t(v) - a) / span) * (outHi - outLo);
}

function panelExtent(panel: Panel): { xs: number[]; lo: number; hi: number } {
  const xs: number[] = [];
  let lo = Infinity;
  let hi = -Infinity;
  for (const s of panel.series) {
    for (const p of s.points) {
      xs.push(p.n);
      lo = Math.min(lo, p.lo);
      hi = Math.max(hi, p.hi);
    }
  }
  if (!Number.isFinite(lo)) {
    lo = 0;
    hi = 1;
  }
  if (lo === hi) {
    lo -= 1;
    hi += 1;
  }
  return { xs, lo, hi };
}

function renderSeries(s: Series, color: string, sx: Scale, sy: Scale): string {
  if (s.points.length === 0) return "";
  const band =
    s.points.map((p) => `${fmt(sx(p.n))},${fmt(sy(p.hi))}`).join(" ") +
    " " +
    [...s.points].reverse().map((p) => `${fmt(sx(p.n))},${fmt(sy(p.lo))}`).join(" ");
  const line = s.points.map((p) => `${fmt(sx(p.n))},${fmt(sy(p.y))}`).join(" ");
  const dots = s.points
    .map((p) => `<circle cx="${fmt(sx(p.n))}" cy="${fmt(sy(p.y))}" r="2.5" fill="${color}"/>`)
    .join("");
  return (
    `<polygon points="${band}" fill="${color}" fill-opacity="0.15" stroke="none"/>` +
    `<polyline points="${line}" fill="none" stroke="${color}" stroke-width="1.6"/>` +
    dots
  );
}

function renderPanel(
  panel: Panel,
  x0: number,
  y0: number,
  w: number,
  h: number,
  logX: boolean,
  yLabel: string,
  drawZeroLine: boolean,
): string {
  const innerX0 = x0 + MARGIN.left;
  const innerX1 = x0 + w - MARGIN.right;
  const innerY0 = y0 + MARGIN.top;
  const innerY1 = y0 + h - MARGIN.bottom;
  let { xs, lo, hi } = panelExtent(panel);
  if (drawZeroLine) {
    // the zero line is the decision threshold; keep it in view
    lo = Math.min(lo, 0);
    hi = Math.max(hi, 0);
  }
  const xLo = Math.min(...(xs.length ? xs : [1]));
  const xHi = Math.max(...(xs.length ? xs : [2]));
  const pad = 0.05 * (hi - lo);
  const sx = makeScale(xLo, xHi === xLo ? xLo + 1 : xHi, innerX0, innerX1, logX);
  const sy = makeScale(lo - pad, hi + pad, innerY1, innerY0, false);

  const parts: string[] = [];
  parts.push(
    `<rect x="${innerX0}" y="${innerY0}" width="${innerX1 - innerX0}" height="${innerY1 - innerY0}" fill="none" stroke="#444"/>`,
  );
  parts.push(
    `<text x="${(innerX0 + innerX1) / 2}" y="${y0 + 18}" text-anchor="middle" font-size="13" font-family="sans-serif">${escapeXml(panel.key)}</text>`,
  );
  const xTicks = [...new Set(xs)].sort((a, b) => a - b);
  const shown = xTicks.length > 8 ? xTicks.filter((_, i) => i % Math.ceil(xTicks.length / 8) === 0) : xTicks;
  for (const t of shown) {
    const px = sx(t);
    parts.push(`<line x1="${fmt(px)}" y1="${innerY1}" x2="${fmt(px)}" y2="${innerY1 + 4}" stroke="#444"/>`);
    parts.push(
      `<text x="${fmt(px)}" y="${innerY1 + 16}" text-anchor="middle" font-size="10" font-family="sans-serif">${t}</text>`,
    );
  }
  for (const t of niceTicks(lo - pad, hi + pad, 6)) {
    const py = sy(t);
    parts.push(`<line x1="${innerX0 - 4}" y1="${fmt(py)}" x2="${innerX0}" y2="${fmt(py)}" stroke="#444"/>`);
    parts.push(
      `<text x="${innerX0 - 7}" y="${fmt(py + 3)}" text-anchor="end" font-size="10" font-family="sans-serif">${fmt(t)}</text>`,
    );
  }
  if (drawZeroLine) {
    const zy = sy(0);
    parts.push(
      `<line x1="${innerX0}" y1="${fmt(zy)}" x2="${innerX1}" y2="${fmt(zy)}" stroke="#000" stroke-dasharray="5,4" stroke-width="1"/>`,
    );
  }
  parts.push(
    `<text x="${x0 + 14}" y="${(innerY0 + innerY1) / 2}" transform="rotate(-90 ${x0 + 14} ${(innerY0 + innerY1) / 2})" text-anchor="middle" font-size="11" font-family="sans-serif">${escapeXml(yLabel)}</text>`,
  );
  parts.push(
    `<text x="${(innerX0 + innerX1) / 2}" y="${y0 + h - 8}" text-anchor="middle" font-size="11" font-family="sans-serif">sample size N per side</text>`,
  );
  panel.series.forEach((s, idx) => {
    parts.push(renderSeries(s, COLORS[idx % COLORS.length], sx, sy));
  });
  // legend
  panel.series.forEach((s, idx) => {
    const ly = innerY0 + 14 + 14 * idx;
    const color = COLORS[idx % COLORS.length];
    parts.push(`<line x1="${innerX0 + 8}" y1="${ly - 4}" x2="${innerX0 + 30}" y2="${ly - 4}" stroke="${color}" stroke-width="2"/>`);
    parts.push(
      `<text x="${innerX0 + 34}" y="${ly}" font-size="10" font-family="sans-serif">${escapeXml(s.key)}</text>`,
    );
  });
  return parts.join("\n");
}

function escapeXml(s: string): string {
  return s
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function renderSvg(figure: FigureData, options: RenderOptions = {}): string {
  const panelWidth = options.width ?? 420;
  const panelHeight = options.height ?? 320;
  const count = Math.max(figure.panels.length, 1);
  const width = panelWidth * count;
  const height = panelHeight;
  const body = figure.panels
    .map((panel, idx) =>
      renderPanel(
        panel,
        idx * panelWidth,
        0,
        panelWidth,
        panelHeight,
        options.logX ?? false,
        figure.yLabel,
        figure.kind === "dna_bars",
      ),
    )
    .join("\n");
  return (
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" viewBox="0 0 ${width} ${height}">\n` +
    `<rect width="${width}" height="${height}" fill="white"/>\n${body}\n</svg>\n`
  );
}
