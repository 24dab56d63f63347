/**
 * Score history for one site: a line chart of every recorded scan
 * under the active scheme. Hovering a point reveals which facts
 * changed relative to the previous scan.
 */

import { getExport, getHistory } from "../api";
import { clear, el } from "../dom";
import { tokenFor } from "../state";
import type { CheckResultDoc, HistoryPointDoc, RecordDoc } from "../types";
import { gradeBadge, guard, lightBadge, loading, scoreText } from "./common";

const SVG_NS = "http://www.w3.org/2000/svg";

function svg<K extends keyof SVGElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
): SVGElementTagNameMap[K] {
  const node = document.createElementNS(SVG_NS, tag);
  for (const [key, value] of Object.entries(attrs)) node.setAttribute(key, value);
  return node;
}

function describe(result: CheckResultDoc): string {
  if (result.status === "success" || result.status === "failure") {
    return JSON.stringify(result.value);
  }
  return result.status;
}

/** Human-readable fact changes between two scans of the same site. */
export function factDeltas(previous: RecordDoc, next: RecordDoc): string[] {
  const deltas: string[] = [];
  const before = previous.results;
  const after = next.results;
  const keys = [...new Set([...Object.keys(before), ...Object.keys(after)])].sort();
  for (const key of keys) {
    const old = before[key];
    const now = after[key];
    if (old === undefined && now !== undefined) {
      deltas.push(`+ ${key} = ${describe(now)}`);
    } else if (old !== undefined && now === undefined) {
      deltas.push(`- ${key}`);
    } else if (old !== undefined && now !== undefined) {
      if (old.status !== now.status || JSON.stringify(old.value) !== JSON.stringify(now.value)) {
        deltas.push(`${key}: ${describe(old)} -> ${describe(now)}`);
      }
    }
  }
  return deltas;
}

export async function renderHistoryView(root: HTMLElement, listId: string,
                                        index: number,
                                        params: URLSearchParams): Promise<void> {
  clear(root);
  root.append(loading());
  await guard(root, listId, async () => {
    const token = tokenFor(listId);
    const scheme = params.get("scheme") ?? undefined;
    const history = await getHistory(listId, index, token, scheme);
    const exportDoc = await getExport(listId, token, scheme);
    const records = new Map(
      exportDoc.records.filter((record) => record.site_url === history.url)
        .map((record) => [record.started_at, record]));
    clear(root);
    render(root, listId, index, history.url, history.points, records);
  });
}

function render(root: HTMLElement, listId: string, index: number, url: string,
                points: HistoryPointDoc[],
                records: Map<string, RecordDoc>): void {
  root.append(
    el("p", { class: "crumbs" },
      el("a", { href: `#/lists/${encodeURIComponent(listId)}/sites/${index}` },
        "← site detail")),
    el("h2", {}, "Score history"),
    el("p", { class: "mono" }, url),
  );

  if (points.length === 0) {
    root.append(el("p", {}, "No scans recorded yet."));
    return;
  }

  const tooltip = el("div", { class: "chart-tooltip", "data-role": "tooltip" });
  root.append(chart(points, records, tooltip), tooltip);

  const rows = points.map((point, i) => el("tr", { "data-index": String(i) },
    el("td", { class: "mono" }, point.started_at),
    el("td", { class: "num" }, scoreText(point.score)),
    el("td", {}, gradeBadge(point.grade)),
    el("td", {}, lightBadge(point.light)),
  ));
  root.append(el("table", { class: "data" },
    el("thead", {}, el("tr", {},
      el("th", {}, "started"), el("th", {}, "score"),
      el("th", {}, "grade"), el("th", {}, "light"))),
    el("tbody", {}, ...rows),
  ));
}

function chart(points: HistoryPointDoc[], records: Map<string, RecordDoc>,
               tooltip: HTMLElement): SVGSVGElement {
  const width = 640;
  const height = 220;
  const pad = 32;
  const innerW = width - 2 * pad;
  const innerH = height - 2 * pad;
  const x = (i: number) =>
    pad + (points.length === 1 ? innerW / 2 : (i / (points.length - 1)) * innerW);
  const y = (score: number) => pad + (1 - score) * innerH;

  const root = svg("svg", {
    viewBox: `0 0 ${width} ${height}`, class: "history-chart",
    role: "img", "aria-label": "score over time",
  });

  for (const grid of [0, 0.5, 1]) {
    root.append(svg("line", {
      x1: String(pad), x2: String(width - pad),
      y1: String(y(grid)), y2: String(y(grid)), class: "grid",
    }));
    const label = svg("text", {
      x: String(4), y: String(y(grid) + 4), class: "axis",
    });
    label.textContent = grid.toFixed(1);
    root.append(label);
  }

  const scored = points
    .map((point, i) => ({ point, i }))
    .filter(({ point }) => point.score !== null);
  if (scored.length > 1) {
    const path = scored
      .map(({ point, i }, n) =>
        `${n === 0 ? "M" : "L"}${x(i).toFixed(1)},${y(point.score!).toFixed(1)}`)
      .join(" ");
    root.append(svg("path", { d: path, class: "score-line" }));
  }

  points.forEach((point, i) => {
    const cy = point.score === null ? height - pad : y(point.score);
    const dot = svg("circle", {
      cx: x(i).toFixed(1), cy: cy.toFixed(1), r: "5",
      class: point.score === null ? "point unscored" : "point",
      "data-index": String(i),
    });
    dot.addEventListener("mouseenter", () => {
      showTooltip(tooltip, points, records, i);
    });
    dot.addEventListener("mouseleave", () => {
      tooltip.hidden = true;
    });
    root.append(dot);
  });

  const first = svg("text", {
    x: String(pad), y: String(height - 8), class: "axis",
  });
  first.textContent = points[0]!.started_at;
  root.append(first);
  if (points.length > 1) {
    const last = svg("text", {
      x: String(width - pad), y: String(height - 8),
      class: "axis", "text-anchor": "end",
    });
    last.textContent = points[points.length - 1]!.started_at;
    root.append(last);
  }
  return root;
}

function showTooltip(tooltip: HTMLElement, points: HistoryPointDoc[],
                     records: Map<string, RecordDoc>, index: number): void {
  clear(tooltip);
  const point = points[index]!;
  tooltip.hidden = false;
  tooltip.append(
    el("p", {}, el("strong", {}, point.started_at)),
    el("p", {}, `score ${scoreText(point.score)}, grade ${point.grade}, ${point.light}`),
  );
  if (index === 0) {
    tooltip.append(el("p", {}, "first recorded scan"));
    return;
  }
  const current = records.get(point.started_at);
  const previous = records.get(points[index - 1]!.started_at);
  if (current === undefined || previous === undefined) {
    tooltip.append(el("p", {}, "fact records unavailable for this scan"));
    return;
  }
  const deltas = factDeltas(previous, current);
  if (deltas.length === 0) {
    tooltip.append(el("p", {}, "no fact changes since the previous scan"));
    return;
  }
  tooltip.append(el("ul", { class: "deltas" },
    ...deltas.map((line) => el("li", { class: "mono" }, line))));
}
