// SVG decay chart: raw remaining-count points plus the server-fitted
// geometric curve. Pure string/DOM-free helpers so the scaling logic is
// unit-testable; rendering lives in ui.ts.

import type { ChartView } from "./state.js";

export interface ChartGeometry {
  width: number;
  height: number;
  pad: number;
}

export const DEFAULT_GEOMETRY: ChartGeometry = { width: 420, height: 180, pad: 28 };

export function xScale(k: number, view: ChartView, geo: ChartGeometry): number {
  return geo.pad + (k / Math.max(view.maxK, 1)) * (geo.width - 2 * geo.pad);
}

export function yScale(n: number, view: ChartView, geo: ChartGeometry): number {
  const top = Math.max(view.maxN, 1);
  return geo.height - geo.pad - (n / top) * (geo.height - 2 * geo.pad);
}

export function curvePath(view: ChartView, geo: ChartGeometry): string | null {
  if (!view.curve || view.curve.length === 0) return null;
  return view.curve
    .map((p, i) => `${i === 0 ? "M" : "L"}${xScale(p.x, view, geo).toFixed(1)},${yScale(p.y, view, geo).toFixed(1)}`)
    .join(" ");
}

export function pointMarkers(
  view: ChartView,
  geo: ChartGeometry,
): { cx: number; cy: number; k: number; n: number }[] {
  return view.points.map((p) => ({
    cx: xScale(p.k, view, geo),
    cy: yScale(p.n, view, geo),
    k: p.k,
    n: p.n,
  }));
}
