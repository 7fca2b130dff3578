// DOM rendering: every function builds elements from (doc, state) alone.

import {
  AppState,
  canMerge,
  canSplit,
  errorSeries,
  highlightedClusters,
} from "./state.js";
import type { ClusterSummary } from "./types.js";

export interface Handlers {
  onToggle(cid: number): void;
  onSplit(): void;
  onMerge(): void;
  onPage(page: number): void;
}

const CHART_W = 640;
const CHART_H = 220;
const PAD = 28;

function el<K extends keyof HTMLElementTagNameMap>(
  doc: Document,
  tag: K,
  attrs: Record<string, string> = {},
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = doc.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) node.setAttribute(key, value);
  if (text !== undefined) node.textContent = text;
  return node;
}

function heatColor(value: number): string {
  const light = 96 - Math.round(value * 58); // 0 -> near white, 1 -> deep blue
  return `hsl(214, 70%, ${light}%)`;
}

function renderStatus(doc: Document, state: AppState): HTMLElement {
  const bar = el(doc, "div", { id: "status-bar" });
  if (!state.reachable) {
    bar.appendChild(
      el(doc, "span", { class: "degraded", id: "degraded-banner" }, "service unreachable - read-only"),
    );
  }
  if (state.session) {
    bar.appendChild(el(doc, "span", { class: "session-id" }, `session ${state.session.id}`));
    bar.appendChild(
      el(
        doc,
        "span",
        { class: "session-meta" },
        `${state.session.clusters} clusters / ${state.session.n} points / ${state.session.edits} edits / ` +
          `model ${state.session.config.model}(eta=${state.session.config.eta})`,
      ),
    );
    if (state.session.converged === true) {
      bar.appendChild(el(doc, "span", { class: "converged" }, "target reached"));
    }
  }
  return bar;
}

function renderClusterRow(
  doc: Document,
  cluster: ClusterSummary,
  state: AppState,
  handlers: Handlers,
): HTMLElement {
  const highlighted = highlightedClusters(state).has(cluster.id);
  const row = el(doc, "tr", {
    class: `cluster-row${highlighted ? " highlight" : ""}`,
    "data-cluster-id": String(cluster.id),
  });
  const pick = el(doc, "input", { type: "checkbox", class: "pick" }) as HTMLInputElement;
  pick.checked = state.selection.includes(cluster.id);
  pick.addEventListener("change", () => handlers.onToggle(cluster.id));
  row.appendChild(el(doc, "td")).appendChild(pick);
  row.appendChild(el(doc, "td", { class: "cluster-id" }, String(cluster.id)));
  row.appendChild(el(doc, "td", { class: "cluster-size" }, String(cluster.size)));
  row.appendChild(el(doc, "td", { class: "cluster-purity" }, cluster.pure ? "pure" : "impure"));
  row.appendChild(el(doc, "td", { class: "cluster-reps" }, cluster.representatives.join(" ")));
  return row;
}

function renderClusterList(doc: Document, state: AppState, handlers: Handlers): HTMLElement {
  const panel = el(doc, "section", { id: "cluster-list" });
  panel.appendChild(el(doc, "h2", {}, "Clusters"));
  if (!state.clusters) {
    panel.appendChild(el(doc, "p", { class: "placeholder" }, "no session attached"));
    return panel;
  }
  const table = el(doc, "table");
  const head = el(doc, "tr");
  for (const label of ["", "id", "size", "purity", "representatives"]) {
    head.appendChild(el(doc, "th", {}, label));
  }
  table.appendChild(head);
  for (const cluster of state.clusters.clusters) {
    table.appendChild(renderClusterRow(doc, cluster, state, handlers));
  }
  panel.appendChild(table);

  const pages = Math.max(1, Math.ceil(state.clusters.total / state.clusters.page_size));
  const pager = el(doc, "div", { class: "pager" });
  pager.appendChild(
    el(doc, "span", {}, `page ${state.clusters.page + 1}/${pages} (${state.clusters.total} clusters)`),
  );
  if (state.clusters.page > 0) {
    const prev = el(doc, "button", { class: "page-prev" }, "prev");
    prev.addEventListener("click", () => handlers.onPage(state.clusters!.page - 1));
    pager.appendChild(prev);
  }
  if (state.clusters.page + 1 < pages) {
    const next = el(doc, "button", { class: "page-next" }, "next");
    next.addEventListener("click", () => handlers.onPage(state.clusters!.page + 1));
    pager.appendChild(next);
  }
  panel.appendChild(pager);
  return panel;
}

function renderDetail(doc: Document, state: AppState): HTMLElement {
  const panel = el(doc, "section", { id: "cluster-detail" });
  panel.appendChild(el(doc, "h2", {}, "Selected cluster"));
  const detail = state.detail;
  if (state.selection.length !== 1 || !detail) {
    panel.appendChild(el(doc, "p", { class: "placeholder" }, "select one cluster to inspect"));
    return panel;
  }
  panel.appendChild(
    el(doc, "p", {}, `cluster ${detail.id}: ${detail.size} points, ${detail.pure ? "pure" : "impure"}`),
  );
  const members = el(doc, "p", { class: "members" }, detail.members.join(" "));
  panel.appendChild(members);
  const strip = el(doc, "div", { class: "heat-strip" });
  const shown = Math.min(detail.members.length, 40);
  for (let a = 0; a < shown; a++) {
    const rowEl = el(doc, "div", { class: "heat-row" });
    for (let b = 0; b < shown; b++) {
      const value = detail.similarity[a][b];
      const cell = el(doc, "span", {
        class: "heat-cell",
        title: `${detail.members[a]}-${detail.members[b]}: ${value.toFixed(3)}`,
      });
      cell.style.backgroundColor = heatColor(value);
      rowEl.appendChild(cell);
    }
    strip.appendChild(rowEl);
  }
  panel.appendChild(strip);
  return panel;
}

function renderEditConsole(doc: Document, state: AppState, handlers: Handlers): HTMLElement {
  const panel = el(doc, "section", { id: "edit-console" });
  panel.appendChild(el(doc, "h2", {}, "Edits"));
  const split = el(doc, "button", { id: "split-button" }, "Split selected") as HTMLButtonElement;
  split.disabled = !canSplit(state);
  split.addEventListener("click", () => handlers.onSplit());
  const merge = el(doc, "button", { id: "merge-button" }, "Merge selected") as HTMLButtonElement;
  merge.disabled = !canMerge(state);
  merge.addEventListener("click", () => handlers.onMerge());
  panel.appendChild(split);
  panel.appendChild(merge);
  if (state.message) {
    panel.appendChild(el(doc, "p", { class: "edit-message", role: "alert" }, state.message));
  }
  if (state.lastEdit) {
    const diff = el(doc, "div", { class: "edit-diff" });
    diff.appendChild(el(doc, "h3", {}, `last edit: ${state.lastEdit.result.kind}`));
    const removed = el(doc, "p", { class: "diff-removed" }, `removed: ${state.lastEdit.result.removed.join(", ") || "none"}`);
    diff.appendChild(removed);
    const added = el(doc, "ul", { class: "diff-added" });
    for (const [cid, members, pure] of state.lastEdit.result.added) {
      added.appendChild(
        el(doc, "li", {}, `cluster ${cid} (${pure ? "pure" : "impure"}): ${members.join(" ")}`),
      );
    }
    diff.appendChild(added);
    diff.appendChild(
      el(doc, "p", { class: "diff-touched" }, `touched points: ${state.lastEdit.result.touched.join(" ")}`),
    );
    panel.appendChild(diff);
  }
  return panel;
}

function polylinePoints(values: number[], maxY: number): string {
  const n = values.length;
  const xs = (i: number) =>
    n === 1 ? [PAD, CHART_W - PAD][i] : PAD + (i * (CHART_W - 2 * PAD)) / (n - 1);
  const ys = (v: number) => CHART_H - PAD - (maxY === 0 ? 0 : (v / maxY) * (CHART_H - 2 * PAD));
  const series = n === 1 ? [values[0], values[0]] : values; // flat line for a lone point
  return series.map((v, i) => `${xs(i).toFixed(1)},${ys(v).toFixed(1)}`).join(" ");
}

function renderChart(doc: Document, state: AppState): HTMLElement {
  const panel = el(doc, "section", { id: "error-chart" });
  panel.appendChild(el(doc, "h2", {}, "Errors per edit"));
  if (!state.session || !state.session.has_target) {
    panel.setAttribute("hidden", "hidden");
    return panel;
  }
  const series = errorSeries(state.log);
  const maxY = Math.max(1, ...series.delta_cc, ...series.delta_u, ...series.delta_o);
  const svg = doc.createElementNS("http://www.w3.org/2000/svg", "svg");
  svg.setAttribute("viewBox", `0 0 ${CHART_W} ${CHART_H}`);
  svg.setAttribute("id", "error-chart-svg");
  const lines: [string, number[]][] = [
    ["delta-u", series.delta_u],
    ["delta-o", series.delta_o],
    ["delta-cc", series.delta_cc],
  ];
  for (const [name, values] of lines) {
    if (values.length === 0) continue;
    const poly = doc.createElementNS("http://www.w3.org/2000/svg", "polyline");
    poly.setAttribute("class", `series ${name}`);
    poly.setAttribute("data-values", values.join(","));
    poly.setAttribute("points", polylinePoints(values, maxY));
    poly.setAttribute("fill", "none");
    svg.appendChild(poly);
  }
  panel.appendChild(svg);
  const legend = el(doc, "p", { class: "legend" });
  for (const [name] of lines) {
    legend.appendChild(el(doc, "span", { class: `key ${name}` }, name.replace("-", "_")));
  }
  panel.appendChild(legend);
  return panel;
}

function renderLog(doc: Document, state: AppState): HTMLElement {
  const panel = el(doc, "section", { id: "log-panel" });
  panel.appendChild(el(doc, "h2", {}, "Request log"));
  const list = el(doc, "ol", { class: "log-entries" });
  for (const entry of state.log) {
    let text: string;
    if (entry.type === "edit" && entry.request && entry.result) {
      const req =
        entry.request.kind === "split"
          ? `split(${entry.request.i})`
          : `merge(${entry.request.i}, ${entry.request.j})`;
      text = `${req} -> ${entry.result.kind}`;
    } else {
      text = entry.type;
    }
    list.appendChild(el(doc, "li", { class: `log-${entry.type}` }, text));
  }
  panel.appendChild(list);
  return panel;
}

/** Replace `container`'s content with the UI for `state`. */
export function renderApp(
  doc: Document,
  container: HTMLElement,
  state: AppState,
  handlers: Handlers,
): void {
  container.textContent = "";
  container.appendChild(renderStatus(doc, state));
  const grid = el(doc, "div", { class: "grid" });
  grid.appendChild(renderClusterList(doc, state, handlers));
  grid.appendChild(renderDetail(doc, state));
  grid.appendChild(renderEditConsole(doc, state, handlers));
  grid.appendChild(renderChart(doc, state));
  grid.appendChild(renderLog(doc, state));
  container.appendChild(grid);
}
