import type { Axes, Point } from "./series.js";

export interface PlotBox {
  width: number;
  height: number;
  marginLeft: number;
  marginBottom: number;
  marginTop: number;
  marginRight: number;
}

export const DEFAULT_BOX: PlotBox = {
  width: 320,
  height: 200,
  marginLeft: 46,
  marginBottom: 30,
  marginTop: 10,
  marginRight: 10,
};

export function scaleX(x: number, axes: Axes, box: PlotBox): number {
  const inner = box.width - box.marginLeft - box.marginRight;
  return box.marginLeft + ((x - axes.x.min) / (axes.x.max - axes.x.min)) * inner;
}

export function scaleY(y: number, axes: Axes, box: PlotBox): number {
  const inner = box.height - box.marginTop - box.marginBottom;
  return box.marginTop + (1 - (y - axes.y.min) / (axes.y.max - axes.y.min)) * inner;
}

/** SVG path string for one polyline in data coordinates. */
export function linePath(points: Point[], axes: Axes, box: PlotBox): string {
  if (points.length === 0) return "";
  const parts = points.map((p, i) => {
    const cmd = i === 0 ? "M" : "L";
    return `${cmd}${scaleX(p.x, axes, box).toFixed(2)},${scaleY(p.y, axes, box).toFixed(2)}`;
  });
  return parts.join(" ");
}

/** Round tick positions covering the range, at most `count` of them. */
export function ticks(range: { min: number; max: number }, count = 5): number[] {
  const span = range.max - range.min;
  if (!(span > 0)) return [range.min];
  const rawStep = span / Math.max(count - 1, 1);
  const magnitude = 10 ** Math.floor(Math.log10(rawStep));
  const step = [1, 2, 5, 10]
    .map((m) => m * magnitude)
    .find((s) => span / s <= count) ?? 10 * magnitude;
  const first = Math.ceil(range.min / step) * step;
  const out: number[] = [];
  for (let v = first; v <= range.max + 1e-9; v += step) {
    out.push(Math.abs(v) < step * 1e-9 ? 0 : Number(v.toFixed(10)));
  }
  return out;
}
