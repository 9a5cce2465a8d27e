import type { QueryPayload, StateRow } from "./types.js";

export interface Point {
  x: number;
  y: number;
}

export interface Range {
  min: number;
  max: number;
}

export type ChartKind = "altitude" | "groundSpeed" | "verticalRate" | "profile";

export const CHART_KINDS: ChartKind[] = [
  "altitude",
  "groundSpeed",
  "verticalRate",
  "profile",
];

export const CHART_LABELS: Record<ChartKind, { title: string; x: string; y: string }> = {
  altitude: { title: "Altitude", x: "time (s)", y: "altitude (ft)" },
  groundSpeed: { title: "Ground speed", x: "time (s)", y: "ground speed (ft/s)" },
  verticalRate: { title: "Vertical rate", x: "time (s)", y: "vertical rate (ft/s)" },
  profile: { title: "Approach profile", x: "ground distance (ft)", y: "altitude (ft)" },
};

/** Ground distance is the running integral of ground speed over the time step. */
function groundDistance(rollout: StateRow[], timeStep: number): number[] {
  const distances: number[] = [0];
  for (let i = 1; i < rollout.length; i++) {
    distances.push(distances[i - 1] + rollout[i - 1].x_dot_fps * timeStep);
  }
  return distances;
}

/** One polyline per rollout; no resampling, every state row becomes a vertex. */
export function chartSeries(
  rollouts: StateRow[][],
  kind: ChartKind,
  timeStep: number,
): Point[][] {
  return rollouts.map((rollout) => {
    if (kind === "profile") {
      const dist = groundDistance(rollout, timeStep);
      return rollout.map((row, i) => ({ x: dist[i], y: row.h_ft }));
    }
    const field =
      kind === "altitude" ? "h_ft" : kind === "groundSpeed" ? "x_dot_fps" : "h_dot_fps";
    return rollout.map((row) => ({ x: row.time_s, y: row[field] }));
  });
}

function spanOf(series: Point[][], pick: (p: Point) => number): Range {
  let min = Infinity;
  let max = -Infinity;
  for (const line of series) {
    for (const p of line) {
      const v = pick(p);
      if (v < min) min = v;
      if (v > max) max = v;
    }
  }
  return { min, max };
}

/** Pad a range by 5% of its span (or half a unit when degenerate). */
export function padRange(range: Range, fraction = 0.05): Range {
  const span = range.max - range.min;
  const pad = span > 0 ? span * fraction : 0.5;
  return { min: range.min - pad, max: range.max + pad };
}

export interface Axes {
  x: Range;
  y: Range;
}

/**
 * Shared axes for one chart kind: the union of both panels' data ranges,
 * padded 5%, so the two policies are visually comparable.
 */
export function sharedAxes(query: QueryPayload, kind: ChartKind): Axes {
  const both = [
    ...chartSeries(query.rollouts_a, kind, query.time_step),
    ...chartSeries(query.rollouts_b, kind, query.time_step),
  ];
  return {
    x: padRange(spanOf(both, (p) => p.x)),
    y: padRange(spanOf(both, (p) => p.y)),
  };
}
