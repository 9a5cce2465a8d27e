import type { PosteriorPayload } from "./types.js";

/** Linear blue-to-yellow color scale over [0, 1]. */
export function densityColor(t: number): [number, number, number] {
  const clamped = Math.min(Math.max(t, 0), 1);
  const r = Math.round(20 + 235 * clamped);
  const g = Math.round(24 + 200 * clamped);
  const b = Math.round(96 + (60 - 96) * clamped);
  return [r, g, b];
}

/**
 * Normalized cell intensities for the (alpha, beta) grid; cells outside the
 * simplex (alpha + beta > 1) are null so they render as background.
 */
export function heatmapCells(posterior: PosteriorPayload): (number | null)[][] {
  const { alpha, beta, density } = posterior.grid;
  let max = 0;
  for (let i = 0; i < alpha.length; i++) {
    for (let j = 0; j < beta.length; j++) {
      if (alpha[i] + beta[j] <= 1 && density[i][j] > max) max = density[i][j];
    }
  }
  return alpha.map((a, i) =>
    beta.map((b, j) => (a + b <= 1 ? (max > 0 ? density[i][j] / max : 0) : null)),
  );
}

/**
 * Concentration statistic: max density over its mean inside the simplex.
 * A flat prior scores near 1; a peaked posterior scores much higher.
 */
export function concentrationRatio(posterior: PosteriorPayload): number {
  const { alpha, beta, density } = posterior.grid;
  let max = 0;
  let total = 0;
  let count = 0;
  for (let i = 0; i < alpha.length; i++) {
    for (let j = 0; j < beta.length; j++) {
      if (alpha[i] + beta[j] > 1) continue;
      const value = density[i][j];
      if (value > max) max = value;
      total += value;
      count += 1;
    }
  }
  return count > 0 && total > 0 ? max / (total / count) : 0;
}
