// DOM rendering. Every displayed number is taken verbatim from an API
// payload (formatted with String(...)); the console never computes
// diagnosis quantities itself.

import type { ModelInfo, Snapshot } from "./api.js";
import { DEFAULT_GEOMETRY, curvePath, pointMarkers } from "./chart.js";
import type { CardView, ChartView, GridView, TriState } from "./state.js";

const SVG_NS = "http://www.w3.org/2000/svg";

export function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  children: (Node | string)[] = [],
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [k, v] of Object.entries(attrs)) node.setAttribute(k, v);
  for (const child of children) node.append(child);
  return node;
}

export function renderModelOptions(select: HTMLSelectElement, models: ModelInfo[]): void {
  select.replaceChildren(
    ...models.map((m) => el("option", { value: m.name }, [`${m.name} (${m.gates} gates)`])),
  );
}

export function renderTriStateTable(
  container: HTMLElement,
  variables: string[],
  idPrefix: string,
): void {
  const rows = variables.map((name) => {
    const select = el("select", { id: `${idPrefix}-${name}`, "data-variable": name });
    for (const v of ["unread", "0", "1"]) select.append(el("option", { value: v }, [v]));
    return el("tr", {}, [el("td", {}, [name]), el("td", {}, [select])]);
  });
  container.replaceChildren(el("table", { class: "tristate" }, rows));
}

export function readTriStateTable(container: HTMLElement): Record<string, TriState> {
  const out: Record<string, TriState> = {};
  for (const select of container.querySelectorAll<HTMLSelectElement>("select[data-variable]")) {
    out[select.dataset.variable as string] = select.value as TriState;
  }
  return out;
}

export function renderGrid(container: HTMLElement, grid: GridView): void {
  const header = el("tr", {}, [
    el("th", {}, ["#"]),
    ...grid.components.map((c) => el("th", {}, [c])),
  ]);
  const rows = grid.rows.map((row, i) =>
    el("tr", {}, [
      el("td", {}, [String(i + 1)]),
      ...row.marks.map((faulty) =>
        el("td", { class: faulty ? "mark faulty" : "mark" }, [faulty ? "x" : ""]),
      ),
    ]),
  );
  container.replaceChildren(
    el("table", { class: "grid", "data-rows": String(grid.rows.length) }, [header, ...rows]),
  );
}

export function renderStatus(container: HTMLElement, grid: GridView): void {
  const badge =
    grid.outcome === null
      ? el("span", { class: "badge active" }, ["active"])
      : el("span", { class: `badge ${grid.outcome}` }, [grid.outcome.replace("_", " ")]);
  container.replaceChildren(
    el("span", { id: "remaining-count" }, [String(grid.remaining)]),
    ` hypotheses after ${grid.step} step${grid.step === 1 ? "" : "s"} `,
    badge,
  );
}

export function renderCard(container: HTMLElement, card: CardView | null): void {
  if (!card) {
    container.replaceChildren();
    return;
  }
  container.replaceChildren(
    el("div", { class: "card", "data-kind": card.kind }, [
      el("h3", {}, [card.title]),
      el("p", { class: "expect" }, [
        "expect ",
        el("strong", { id: "expected-remaining" }, [card.expected]),
        " remaining",
      ]),
      el("p", { class: "detail" }, [`${card.policy}: ${card.detail}`]),
    ]),
  );
}

export function renderChart(container: HTMLElement, view: ChartView): void {
  const geo = DEFAULT_GEOMETRY;
  const svg = document.createElementNS(SVG_NS, "svg");
  svg.setAttribute("viewBox", `0 0 ${geo.width} ${geo.height}`);
  svg.setAttribute("width", String(geo.width));
  svg.setAttribute("height", String(geo.height));

  const axis = document.createElementNS(SVG_NS, "path");
  axis.setAttribute(
    "d",
    `M${geo.pad},${geo.pad} L${geo.pad},${geo.height - geo.pad} L${geo.width - geo.pad},${geo.height - geo.pad}`,
  );
  axis.setAttribute("class", "axis");
  axis.setAttribute("fill", "none");
  axis.setAttribute("stroke", "#888");
  svg.append(axis);

  const path = curvePath(view, geo);
  if (path) {
    const curve = document.createElementNS(SVG_NS, "path");
    curve.setAttribute("d", path);
    curve.setAttribute("class", "fit-curve");
    curve.setAttribute("fill", "none");
    curve.setAttribute("stroke", "#2a7");
    svg.append(curve);
  }
  for (const marker of pointMarkers(view, geo)) {
    const dot = document.createElementNS(SVG_NS, "circle");
    dot.setAttribute("cx", marker.cx.toFixed(1));
    dot.setAttribute("cy", marker.cy.toFixed(1));
    dot.setAttribute("r", "3");
    dot.setAttribute("class", "obs-point");
    dot.setAttribute("data-k", String(marker.k));
    dot.setAttribute("data-n", String(marker.n));
    svg.append(dot);
  }
  const caption = view.fitLabel ? [el("p", { class: "fit-label" }, [view.fitLabel])] : [];
  container.replaceChildren(svg, ...caption);
}

export function renderError(container: HTMLElement, message: string | null): void {
  container.replaceChildren(...(message ? [el("p", { class: "error" }, [message])] : []));
}

export function snapshotSummary(snapshot: Snapshot): string {
  return `${snapshot.model} / ${snapshot.policy} / ${snapshot.mode}`;
}
