import { concentrationRatio, densityColor, heatmapCells } from "./heatmap.js";
import { CHART_KINDS, CHART_LABELS, chartSeries, sharedAxes } from "./series.js";
import type { Axes } from "./series.js";
import { DEFAULT_BOX, linePath, ticks } from "./svg.js";
import type { SessionController, ViewState } from "./state.js";
import type { PosteriorPayload, QueryPayload, StateRow } from "./types.js";

const SVG_NS = "http://www.w3.org/2000/svg";

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function chartSvg(rollouts: StateRow[][], kind: (typeof CHART_KINDS)[number],
                  axes: Axes, timeStep: number): SVGSVGElement {
  const box = DEFAULT_BOX;
  const svg = document.createElementNS(SVG_NS, "svg");
  svg.setAttribute("viewBox", `0 0 ${box.width} ${box.height}`);
  svg.setAttribute("class", "chart");

  for (const tick of ticks(axes.y)) {
    const y = ((): number => {
      const inner = box.height - box.marginTop - box.marginBottom;
      return box.marginTop + (1 - (tick - axes.y.min) / (axes.y.max - axes.y.min)) * inner;
    })();
    const line = document.createElementNS(SVG_NS, "line");
    line.setAttribute("x1", String(box.marginLeft));
    line.setAttribute("x2", String(box.width - box.marginRight));
    line.setAttribute("y1", y.toFixed(2));
    line.setAttribute("y2", y.toFixed(2));
    line.setAttribute("class", "gridline");
    svg.appendChild(line);
    const label = document.createElementNS(SVG_NS, "text");
    label.setAttribute("x", String(box.marginLeft - 4));
    label.setAttribute("y", (y + 3).toFixed(2));
    label.setAttribute("class", "tick-label tick-y");
    label.textContent = String(tick);
    svg.appendChild(label);
  }
  for (const tick of ticks(axes.x)) {
    const inner = box.width - box.marginLeft - box.marginRight;
    const x = box.marginLeft + ((tick - axes.x.min) / (axes.x.max - axes.x.min)) * inner;
    const label = document.createElementNS(SVG_NS, "text");
    label.setAttribute("x", x.toFixed(2));
    label.setAttribute("y", String(box.height - box.marginBottom + 14));
    label.setAttribute("class", "tick-label tick-x");
    label.textContent = String(tick);
    svg.appendChild(label);
  }
  for (const line of chartSeries(rollouts, kind, timeStep)) {
    const path = document.createElementNS(SVG_NS, "path");
    path.setAttribute("d", linePath(line, axes, box));
    path.setAttribute("class", "series");
    svg.appendChild(path);
  }
  return svg;
}

function panel(label: string, rollouts: StateRow[][], query: QueryPayload,
               axesByKind: Map<string, Axes>): HTMLElement {
  const root = el("section", "panel");
  root.appendChild(el("h2", "panel-title", `Policy ${label}`));
  const grid = el("div", "chart-grid");
  for (const kind of CHART_KINDS) {
    const cell = el("figure", "chart-cell");
    cell.appendChild(el("figcaption", "chart-title", CHART_LABELS[kind].title));
    cell.appendChild(chartSvg(rollouts, kind, axesByKind.get(kind)!, query.time_step));
    cell.appendChild(el("div", "chart-axis-label", CHART_LABELS[kind].x));
    grid.appendChild(cell);
  }
  root.appendChild(grid);
  return root;
}

function heatmapCanvas(posterior: PosteriorPayload): HTMLElement {
  const wrap = el("div", "posterior");
  wrap.appendChild(
    el("h3", undefined,
       `Posterior after ${posterior.iteration} answer(s) ` +
       `(concentration ${concentrationRatio(posterior).toFixed(1)}x)`),
  );
  const cells = heatmapCells(posterior);
  const n = cells.length;
  const canvas = el("canvas", "heatmap");
  canvas.width = n;
  canvas.height = n;
  const ctx = canvas.getContext("2d");
  if (ctx) {
    for (let i = 0; i < n; i++) {
      for (let j = 0; j < n; j++) {
        const value = cells[i][j];
        if (value === null) continue;
        const [r, g, b] = densityColor(value);
        ctx.fillStyle = `rgb(${r},${g},${b})`;
        // alpha on the x axis, beta upward on the y axis
        ctx.fillRect(i, n - 1 - j, 1, 1);
      }
    }
  }
  wrap.appendChild(canvas);
  wrap.appendChild(el("div", "heatmap-caption", "alpha (x) vs beta (y)"));
  return wrap;
}

export function renderView(root: HTMLElement, view: ViewState,
                           controller: SessionController): void {
  root.textContent = "";
  if (view.phase === "loading") {
    root.appendChild(el("p", "status", "Loading query..."));
    return;
  }
  if (view.phase === "error") {
    const banner = el("div", "banner error");
    banner.appendChild(el("p", undefined, `Request failed: ${view.message}`));
    if (view.bugReport) {
      banner.appendChild(
        el("p", undefined,
           "This looks like a client bug (the service rejected the request " +
           "body). Please file a report with the console contents."),
      );
    }
    if (view.canRetry) {
      const retry = el("button", "retry", "Retry");
      retry.addEventListener("click", () => void controller.retry());
      banner.appendChild(retry);
    }
    root.appendChild(banner);
    return;
  }
  if (view.phase === "done") {
    const done = el("div", "completion");
    done.appendChild(el("h2", undefined, "Session complete"));
    done.appendChild(
      el("p", undefined, `${view.iteration} preferences recorded. Thank you!`),
    );
    if (view.estimate) {
      const [a, b, g] = view.estimate;
      done.appendChild(
        el("p", "estimate",
           `Learned weights: jerk ${a.toFixed(3)}, speed-near-ground ${b.toFixed(3)}, ` +
           `acceleration ${g.toFixed(3)}`),
      );
    }
    root.appendChild(done);
    return;
  }

  const { query, submitting, posterior } = view;
  root.appendChild(el("h1", "counter", `Query ${query.iteration}`));
  root.appendChild(
    el("p", "hint",
       "Pick the policy whose landings look more realistic " +
       "(left/right arrow keys work too)."),
  );

  const axesByKind = new Map<string, Axes>();
  for (const kind of CHART_KINDS) axesByKind.set(kind, sharedAxes(query, kind));

  const panels = el("div", "panels");
  panels.appendChild(panel("A", query.rollouts_a, query, axesByKind));
  panels.appendChild(panel("B", query.rollouts_b, query, axesByKind));
  root.appendChild(panels);

  const buttons = el("div", "choices");
  const chooseA = el("button", "choose", "Prefer A (←)");
  const chooseB = el("button", "choose", "Prefer B (→)");
  chooseA.disabled = submitting;
  chooseB.disabled = submitting;
  chooseA.addEventListener("click", () => void controller.submit("a"));
  chooseB.addEventListener("click", () => void controller.submit("b"));
  buttons.appendChild(chooseA);
  buttons.appendChild(chooseB);
  root.appendChild(buttons);
  if (submitting) {
    root.appendChild(el("p", "status", "Recording preference and preparing the next query..."));
  }
  if (posterior) root.appendChild(heatmapCanvas(posterior));
}

export function bindKeyboard(controller: SessionController): void {
  window.addEventListener("keydown", (event) => {
    if (event.key === "ArrowLeft") void controller.submit("a");
    if (event.key === "ArrowRight") void controller.submit("b");
  });
}
