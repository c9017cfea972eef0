/** DOM rendering: translates a ConsoleView into the static page skeleton. */

import type { SessionState } from "./api.js";
import type { ConsoleView } from "./controller.js";
import {
  curvePolyline,
  formatScore,
  gaugePercent,
  scatterPoints,
  trackerBars,
  zoneBadge,
  zoneBars,
} from "./view.js";
import type { Bar } from "./view.js";

const SVG_NS = "http://www.w3.org/2000/svg";

function el(root: Document, id: string): HTMLElement {
  const node = root.getElementById(id);
  if (node === null) {
    throw new Error(`missing element #${id}`);
  }
  return node;
}

function renderBars(container: HTMLElement, bars: Bar[], digits: number): void {
  container.textContent = "";
  for (const bar of bars) {
    const row = container.ownerDocument.createElement("div");
    row.className = "bar-row";
    const label = container.ownerDocument.createElement("span");
    label.className = "bar-label";
    label.textContent = bar.label;
    const track = container.ownerDocument.createElement("div");
    track.className = "bar-track";
    const fill = container.ownerDocument.createElement("div");
    fill.className = `bar-fill bar-${bar.key}`;
    fill.style.width = `${bar.percent}%`;
    track.appendChild(fill);
    const value = container.ownerDocument.createElement("span");
    value.className = "bar-value";
    value.textContent = bar.value.toFixed(digits);
    row.append(label, track, value);
    container.appendChild(row);
  }
}

function renderCurve(svg: SVGSVGElement, curve: Array<[number, number | null]>): void {
  const width = 320;
  const height = 120;
  svg.setAttribute("viewBox", `0 0 ${width} ${height}`);
  svg.textContent = "";
  const line = svg.ownerDocument.createElementNS(SVG_NS, "polyline");
  line.setAttribute("points", curvePolyline(curve, width, height));
  line.setAttribute("class", "curve-line");
  line.setAttribute("fill", "none");
  svg.appendChild(line);
}

function renderScatter(
  svg: SVGSVGElement,
  projection: SessionState["projection"],
): void {
  const width = 200;
  const height = 200;
  svg.setAttribute("viewBox", `0 0 ${width} ${height}`);
  svg.textContent = "";
  for (const p of scatterPoints(projection, width, height)) {
    const dot = svg.ownerDocument.createElementNS(SVG_NS, "circle");
    dot.setAttribute("cx", p.x.toFixed(2));
    dot.setAttribute("cy", p.y.toFixed(2));
    dot.setAttribute("r", p.kind === "query" ? "5" : "3");
    dot.setAttribute("class", `dot-${p.kind}`);
    svg.appendChild(dot);
  }
}

export function render(root: Document, view: ConsoleView): void {
  const setup = el(root, "setup-pane");
  const session = el(root, "session-pane");
  setup.hidden = view.sessionId !== null;
  session.hidden = view.sessionId === null;

  const error = el(root, "error-banner");
  error.hidden = view.error === null;
  error.textContent = view.error ?? "";

  el(root, "complete-banner").hidden = !view.finished;
  for (const id of ["label-pos", "label-neg"]) {
    (el(root, id) as HTMLButtonElement).disabled = view.finished || view.busy;
  }

  const image = el(root, "query-image") as HTMLImageElement;
  const scatter = el(root, "query-scatter") as unknown as SVGSVGElement;
  if (view.query !== null) {
    el(root, "query-id").textContent = `#${view.query.sample_id}`;
    el(root, "query-score").textContent = formatScore(view.query.score);
    const badge = zoneBadge(view.query.intended_zone);
    const badgeEl = el(root, "query-zone");
    badgeEl.textContent = badge.text;
    badgeEl.className = `zone-badge ${badge.cssClass}`;
    if (view.query.display_uri !== "") {
      image.hidden = false;
      (scatter as unknown as HTMLElement).setAttribute("hidden", "");
      image.src = view.query.display_uri;
    } else {
      image.hidden = true;
      (scatter as unknown as HTMLElement).removeAttribute("hidden");
    }
  } else {
    el(root, "query-id").textContent = "—";
    el(root, "query-score").textContent = "—";
    el(root, "query-zone").textContent = "";
    image.hidden = true;
  }

  const state = view.state;
  if (state === null) {
    return;
  }
  el(root, "stat-t").textContent = String(state.t);
  el(root, "stat-pos").textContent = String(state.n_pos);
  el(root, "stat-neg").textContent = String(state.n_neg);
  el(root, "stat-rho").textContent = state.rho.toFixed(3);
  const last = state.curve.length > 0 ? state.curve[state.curve.length - 1][1] : null;
  el(root, "stat-ap").textContent = last === null ? "n/a" : last.toFixed(4);

  el(root, "gauge-needle").style.left = `${gaugePercent(state.rho)}%`;
  el(root, "gauge-threshold").style.left = `${gaugePercent(state.rho_prime)}%`;

  renderBars(el(root, "zone-hist"), zoneBars(state.zone_histogram), 0);
  renderBars(el(root, "tracker-bars"), trackerBars(state.tracker), 3);
  renderCurve(el(root, "curve-chart") as unknown as SVGSVGElement, state.curve);
  if (view.query === null || view.query.display_uri === "") {
    renderScatter(scatter, state.projection);
  }
}
