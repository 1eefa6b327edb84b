import type { TracePoint } from './types.js';

// Hand-rolled SVG so the bundle stays dependency-free. Both charts draw the
// same value multiset; only the x ordering differs. Highlighting comes from
// the server's index set, never from a local threshold comparison.

export interface ChartOptions {
  width?: number;
  height?: number;
  padding?: number;
}

const DEFAULTS: Required<ChartOptions> = { width: 640, height: 220, padding: 28 };

interface Scaled {
  x: number;
  y: number;
  index: number;
  hot: boolean;
}

function scale(
  values: { index: number; sim: number }[],
  threshold: number,
  highlighted: Set<number>,
  opts: Required<ChartOptions>,
) {
  const sims = values.map((v) => v.sim).concat([threshold]);
  const lo = Math.min(...sims);
  const hi = Math.max(...sims);
  const span = hi - lo || 1;
  const innerW = opts.width - 2 * opts.padding;
  const innerH = opts.height - 2 * opts.padding;
  const step = values.length > 1 ? innerW / (values.length - 1) : 0;
  const pts: Scaled[] = values.map((v, pos) => ({
    x: opts.padding + pos * step,
    y: opts.padding + innerH * (1 - (v.sim - lo) / span),
    index: v.index,
    hot: highlighted.has(v.index),
  }));
  const thresholdY = opts.padding + innerH * (1 - (threshold - lo) / span);
  return { pts, thresholdY };
}

function render(pts: Scaled[], thresholdY: number, opts: Required<ChartOptions>, cssClass: string): string {
  const path = pts.map((p) => `${p.x.toFixed(1)},${p.y.toFixed(1)}`).join(' ');
  const circles = pts
    .map(
      (p) =>
        `<circle class="pt${p.hot ? ' hot' : ''}" data-index="${p.index}" ` +
        `cx="${p.x.toFixed(1)}" cy="${p.y.toFixed(1)}" r="3"></circle>`,
    )
    .join('');
  return (
    `<svg class="${cssClass}" viewBox="0 0 ${opts.width} ${opts.height}" ` +
    `xmlns="http://www.w3.org/2000/svg">` +
    `<polyline class="curve" fill="none" points="${path}"></polyline>` +
    `<line class="cutline" x1="${opts.padding}" x2="${opts.width - opts.padding}" ` +
    `y1="${thresholdY.toFixed(1)}" y2="${thresholdY.toFixed(1)}"></line>` +
    circles +
    `</svg>`
  );
}

function emptyState(cssClass: string, opts: Required<ChartOptions>): string {
  return (
    `<svg class="${cssClass} empty" viewBox="0 0 ${opts.width} ${opts.height}" ` +
    `xmlns="http://www.w3.org/2000/svg">` +
    `<text x="${opts.width / 2}" y="${opts.height / 2}" text-anchor="middle">no trace</text></svg>`
  );
}

/** Similarity over time, one marker per frame, cutting line overlaid. */
export function chronologicalChart(
  points: TracePoint[],
  threshold: number,
  highlighted: Set<number>,
  options?: ChartOptions,
): string {
  const opts = { ...DEFAULTS, ...options };
  if (!points.length) return emptyState('chart-chrono', opts);
  const values = points.map((p) => ({ index: p.i, sim: p.sim }));
  const { pts, thresholdY } = scale(values, threshold, highlighted, opts);
  return render(pts, thresholdY, opts, 'chart-chrono');
}

/** The same values ascending by similarity; ties keep frame order. */
export function sortedChart(
  points: TracePoint[],
  threshold: number,
  highlighted: Set<number>,
  options?: ChartOptions,
): string {
  const opts = { ...DEFAULTS, ...options };
  if (!points.length) return emptyState('chart-sorted', opts);
  const values = points
    .map((p) => ({ index: p.i, sim: p.sim }))
    .sort((a, b) => a.sim - b.sim || a.index - b.index);
  const { pts, thresholdY } = scale(values, threshold, highlighted, opts);
  return render(pts, thresholdY, opts, 'chart-sorted');
}

/** Marker count helper used by tests and the summary strip. */
export function markerCount(svg: string): number {
  return (svg.match(/<circle /g) ?? []).length;
}

export function hotMarkerCount(svg: string): number {
  return (svg.match(/class="pt hot"/g) ?? []).length;
}
