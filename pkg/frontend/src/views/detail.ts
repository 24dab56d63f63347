/**
 * Site detail: one member of a benchmark, its grouped facts, and the
 * criteria it violates with threat, remediation, and self-defense
 * guidance.
 */

import { getSiteDetail } from "../api";
import { clear, el } from "../dom";
import { tokenFor } from "../state";
import type { CheckResultDoc, GuidanceDoc, SiteDetailDoc } from "../types";
import {
  flagMarker,
  gradeBadge,
  guard,
  lightBadge,
  loading,
  scoreText,
} from "./common";

export async function renderDetailView(root: HTMLElement, listId: string,
                                       index: number,
                                       params: URLSearchParams): Promise<void> {
  clear(root);
  root.append(loading());
  await guard(root, listId, async () => {
    const detail = await getSiteDetail(listId, index, tokenFor(listId),
                                       params.get("scheme") ?? undefined);
    clear(root);
    render(root, listId, index, detail);
  });
}

function render(root: HTMLElement, listId: string, index: number,
                detail: SiteDetailDoc): void {
  root.append(
    el("p", { class: "crumbs" },
      el("a", { href: `#/lists/${encodeURIComponent(listId)}` }, "← ranking")),
    el("h2", { class: "mono" }, detail.url),
    el("p", {}, `registrable domain: ${detail.registrable_domain}`),
  );

  const attributePairs = Object.entries(detail.attributes);
  if (attributePairs.length) {
    root.append(el("p", {}, ...attributePairs.flatMap(([key, value], i) => [
      i > 0 ? " · " : "",
      el("span", { class: "attribute" }, `${key}: ${value}`),
    ])));
  }

  if (!detail.scanned || detail.rating === null || detail.record === null) {
    root.append(el("p", {}, "This site has not been scanned yet."));
    return;
  }

  root.append(el("div", { class: "rating-summary" },
    el("span", {}, "score ", el("strong", {}, scoreText(detail.rating.score))),
    gradeBadge(detail.rating.grade),
    lightBadge(detail.rating.light),
    flagMarker(detail.rating.flagged_for_review),
    el("a", {
      href: `#/lists/${encodeURIComponent(listId)}/sites/${index}/history`,
      class: "button",
    }, "score history"),
  ));

  const violated = detail.rating.criteria.filter((c) => c.outcome === "violated");
  if (violated.length) {
    const byKey = new Map(detail.guidance.map((g) => [g.check_key, g]));
    root.append(el("h3", {}, `Violated criteria (${violated.length})`));
    for (const outcome of violated) {
      root.append(violationCard(outcome.check_key, outcome.weight,
                                outcome.critical, byKey.get(outcome.check_key)));
    }
  } else {
    root.append(el("p", {}, "No criteria of the active scheme are violated."));
  }

  root.append(el("h3", {}, "Facts"));
  const groups = new Map<string, [string, CheckResultDoc][]>();
  for (const [key, result] of Object.entries(detail.record.results).sort()) {
    const family = key.split(".")[0] ?? "";
    if (!groups.has(family)) groups.set(family, []);
    groups.get(family)!.push([key, result]);
  }
  for (const [family, facts] of groups) {
    root.append(el("h4", { class: "family" }, family));
    root.append(el("table", { class: "data facts" },
      el("thead", {}, el("tr", {},
        el("th", {}, "check"), el("th", {}, "status"),
        el("th", {}, "value"), el("th", {}, "detail"))),
      el("tbody", {}, ...facts.map(([key, result]) => el("tr", {},
        el("td", { class: "mono" }, key),
        el("td", { class: `status-${result.status}` }, result.status),
        el("td", { class: "mono" },
          result.value === null ? "" : JSON.stringify(result.value)),
        el("td", {}, result.detail),
      ))),
    ));
  }
}

function violationCard(checkKey: string, weight: number, critical: boolean,
                       guidance: GuidanceDoc | undefined): HTMLElement {
  const card = el("div", { class: "violation-card", "data-check-key": checkKey },
    el("p", { class: "violation-head" },
      el("code", {}, checkKey),
      ` weight ${weight}`,
      critical ? el("span", { class: "critical-tag" }, "critical") : null),
  );
  if (guidance) {
    card.append(
      el("p", {}, el("strong", {}, "Threat: "), guidance.threat),
      el("p", {}, el("strong", {}, "Remediation: "), guidance.remediation),
      el("p", {}, el("strong", {}, "Self-defense: "), guidance.self_defense),
    );
  }
  return card;
}
