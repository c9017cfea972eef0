/**
 * Pure view-model helpers: everything here derives display geometry from
 * service responses with no DOM access, so it is unit-testable.  No labels,
 * scores, or sampling decisions are ever computed client-side.
 */

import type { ProjectedPoint, SessionState, Tracker } from "./api.js";

/** Map a keyboard key to a label, or null if the key is not a shortcut. */
export function labelFromKey(key: string): number | null {
  switch (key) {
    case "p":
    case "P":
    case "ArrowUp":
    case "ArrowRight":
      return 1;
    case "n":
    case "N":
    case "ArrowDown":
    case "ArrowLeft":
      return -1;
    default:
      return null;
  }
}

/** Gauge needle position for rho in [0, 1], as a percentage of the track. */
export function gaugePercent(rho: number): number {
  return 100 * Math.min(1, Math.max(0, rho));
}

export interface Bar {
  key: string;
  label: string;
  value: number;
  /** Width as a percentage; bars of one chart sum to 100 (or 0 if empty). */
  percent: number;
}

const TRACKER_LABELS: Array<[keyof Tracker, string]> = [
  ["p_pos_fplus", "F+ / +1"],
  ["p_neg_fplus", "F+ / −1"],
  ["p_pos_fzero", "F0 / +1"],
  ["p_neg_fzero", "F0 / −1"],
];

/** Four tracker likelihood bars whose widths total the full chart width. */
export function trackerBars(tracker: Tracker): Bar[] {
  const total = TRACKER_LABELS.reduce((s, [k]) => s + tracker[k], 0);
  return TRACKER_LABELS.map(([key, label]) => ({
    key,
    label,
    value: tracker[key],
    percent: total > 0 ? (100 * tracker[key]) / total : 0,
  }));
}

const ZONE_LABELS: Array<[string, string]> = [
  ["F_minus", "F−"],
  ["F_zero", "F0"],
  ["F_plus", "F+"],
];

/** Zone occupancy bars scaled so the fullest zone spans the chart. */
export function zoneBars(hist: Record<string, number>): Bar[] {
  const peak = Math.max(1, ...ZONE_LABELS.map(([k]) => hist[k] ?? 0));
  return ZONE_LABELS.map(([key, label]) => ({
    key,
    label,
    value: hist[key] ?? 0,
    percent: (100 * (hist[key] ?? 0)) / peak,
  }));
}

export interface ChartPoint {
  x: number;
  y: number;
  t: number;
  ap: number;
}

/**
 * Learning-curve points in a width x height viewport (y grows downward,
 * AP mapped to [0, 1] of the height).  Null APs are skipped.
 */
export function curvePoints(
  curve: Array<[number, number | null]>,
  width: number,
  height: number,
): ChartPoint[] {
  const known = curve.filter((p): p is [number, number] => p[1] !== null);
  if (known.length === 0) {
    return [];
  }
  const tMax = Math.max(1, ...known.map(([t]) => t));
  return known.map(([t, ap]) => ({
    x: (width * t) / tMax,
    y: height * (1 - ap),
    t,
    ap,
  }));
}

/** SVG polyline "points" attribute for the learning curve. */
export function curvePolyline(
  curve: Array<[number, number | null]>,
  width: number,
  height: number,
): string {
  return curvePoints(curve, width, height)
    .map((p) => `${p.x.toFixed(2)},${p.y.toFixed(2)}`)
    .join(" ");
}

export interface ScatterPoint {
  x: number;
  y: number;
  kind: "pos" | "neg" | "query";
}

/**
 * Fit the server-side 2-D projection (labeled points plus the pending
 * query) into a viewport, preserving aspect ratio, with a small margin.
 */
export function scatterPoints(
  projection: { labeled: ProjectedPoint[]; query: ProjectedPoint | null },
  width: number,
  height: number,
): ScatterPoint[] {
  const raw: Array<{ x: number; y: number; kind: ScatterPoint["kind"] }> = [];
  for (const p of projection.labeled) {
    raw.push({ x: p.x, y: p.y, kind: p.label === 1 ? "pos" : "neg" });
  }
  if (projection.query !== null) {
    raw.push({ x: projection.query.x, y: projection.query.y, kind: "query" });
  }
  if (raw.length === 0) {
    return [];
  }
  const xs = raw.map((p) => p.x);
  const ys = raw.map((p) => p.y);
  const xMin = Math.min(...xs);
  const yMin = Math.min(...ys);
  const span = Math.max(Math.max(...xs) - xMin, Math.max(...ys) - yMin, 1e-9);
  const margin = 0.08;
  const scale = (1 - 2 * margin) * Math.min(width, height);
  return raw.map((p) => ({
    x: margin * width + (scale * (p.x - xMin)) / span,
    y: margin * height + (scale * (p.y - yMin)) / span,
    kind: p.kind,
  }));
}

/** Badge text + css class for a zone name from the service. */
export function zoneBadge(zone: string): { text: string; cssClass: string } {
  switch (zone) {
    case "F_plus":
      return { text: "F+", cssClass: "zone-fplus" };
    case "F_zero":
      return { text: "F0", cssClass: "zone-fzero" };
    case "F_minus":
      return { text: "F−", cssClass: "zone-fminus" };
    default:
      return { text: zone, cssClass: "zone-unknown" };
  }
}

export function isFinished(state: Pick<SessionState, "status">): boolean {
  return state.status === "finished";
}

export function formatScore(score: number): string {
  return (score >= 0 ? "+" : "") + score.toFixed(4);
}
