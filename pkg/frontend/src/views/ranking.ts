/**
 * Ranking view plus scheme editor.
 *
 * The export document is fetched once; every scheme edit re-ranks it
 * locally through the rating mirror, so moving a weight slider
 * reorders the table without any scan request. Saved schemes change
 * only when explicitly written back through the scheme API.
 */

import {
  ApiFailure,
  Offline,
  catalog as fetchCatalog,
  createScheme,
  getExport,
  getScheme,
  listSchemes,
  triggerListScan,
  updateScheme,
} from "../api";
import { startCountdown } from "../countdown";
import { clear, el } from "../dom";
import { buildRanking, jsonEqual } from "../rating";
import { draftFor, dropDraft, holdDraft, tokenFor } from "../state";
import type {
  CatalogDoc,
  CriterionDoc,
  ExportDoc,
  Predicate,
  RankingDoc,
  RankingEntryDoc,
  SchemeDoc,
  SchemeSummary,
} from "../types";
import { validateScheme } from "../validate";
import {
  errorBox,
  flagMarker,
  gradeBadge,
  guard,
  lightBadge,
  loading,
  offlineBox,
  scoreText,
} from "./common";

type SortKey = "rank" | "url" | "domain" | "score" | "grade" | `attr:${string}`;

function copyScheme(scheme: SchemeDoc): SchemeDoc {
  return JSON.parse(JSON.stringify(scheme)) as SchemeDoc;
}

export async function renderRankingView(root: HTMLElement, listId: string,
                                        params: URLSearchParams): Promise<void> {
  clear(root);
  root.append(loading());
  await guard(root, listId, async () => {
    const token = tokenFor(listId);
    const schemeParam = params.get("scheme") ?? undefined;
    const exportDoc = await getExport(listId, token, schemeParam);
    const catalogDoc = await fetchCatalog();
    let saved: SchemeSummary[] = [];
    try {
      saved = (await listSchemes()).schemes;
    } catch {
      // the dropdown is a convenience; the view works without it
    }
    const baseScheme = exportDoc.scheme ??
      await getScheme(exportDoc.list.default_scheme_id);

    clear(root);
    mount(root, listId, token, exportDoc, baseScheme, catalogDoc, saved);
  });
}

function mount(root: HTMLElement, listId: string, token: string | null,
               initialExport: ExportDoc, initialScheme: SchemeDoc,
               catalogDoc: CatalogDoc, saved: SchemeSummary[]): void {
  let exportDoc = initialExport;
  let baseScheme = initialScheme;
  let draft = draftFor(listId) ?? copyScheme(baseScheme);
  let ranking: RankingDoc = buildRanking(exportDoc, draft);
  let sortKey: SortKey = "rank";
  let sortAsc = true;
  const filters = new Map<string, string>();
  const siteIndex = new Map(exportDoc.list.sites.map((site, i) => [site.url, i]));

  const scanBox = el("div", { class: "scan-status", "data-role": "scan-status" });
  const filterBox = el("div", { class: "filters" });
  const tableBox = el("div", { class: "table-box" });
  const schemeBox = el("aside", { class: "scheme-panel", "data-role": "scheme-panel" });
  const schemeErrors = el("ul", { class: "violations", "data-role": "scheme-errors" });
  let saveButton: HTMLButtonElement | null = null;
  let savedNote = "";

  const rescanButton = el("button", { type: "button", "data-role": "rescan" },
    "rescan all sites");
  rescanButton.addEventListener("click", () => void rescan());

  root.append(
    el("section", { class: "list-header" },
      el("h2", {}, exportDoc.list.name || listId),
      exportDoc.list.description
        ? el("p", { class: "description" }, exportDoc.list.description)
        : null,
      el("div", { class: "actions" }, rescanButton),
      scanBox,
    ),
    el("div", { class: "ranking-layout" },
      el("div", { class: "ranking-main" }, filterBox, tableBox),
      schemeBox,
    ),
  );

  renderFilters();
  renderTable();
  renderSchemePanel();

  /**
   * Adopt an edited scheme: validate, re-rank the already-loaded
   * export when valid handiwork, and refresh the error list. Only
   * structural edits rebuild the editor widgets, so typing in a
   * weight field never loses focus.
   */
  function applyDraft(next: SchemeDoc, rebuildPanel = false): void {
    draft = next;
    holdDraft(listId, draft);
    const errors = validateScheme(draft, catalogDoc);
    if (errors.length === 0) {
      ranking = buildRanking(exportDoc, draft);
      renderTable();
    }
    if (rebuildPanel) renderSchemePanel(errors);
    else updateErrors(errors);
  }

  function updateErrors(errors: string[]): void {
    clear(schemeErrors);
    schemeErrors.append(...errors.map((message) => el("li", {}, message)));
    if (saveButton) saveButton.disabled = errors.length > 0;
  }

  // -- table ----------------------------------------------------------------

  function visibleEntries(): RankingEntryDoc[] {
    const entries = ranking.entries.filter((entry) =>
      [...filters.entries()].every(([column, value]) =>
        value === "" || entry.attributes[column] === value));
    const direction = sortAsc ? 1 : -1;
    return [...entries].sort((a, b) => direction * compareBy(sortKey, a, b));
  }

  function compareBy(key: SortKey, a: RankingEntryDoc, b: RankingEntryDoc): number {
    if (key === "rank") return a.rank - b.rank;
    if (key === "score") {
      if ((a.score === null) !== (b.score === null)) return a.score === null ? 1 : -1;
      return (b.score ?? 0) - (a.score ?? 0);
    }
    if (key === "grade") return a.grade < b.grade ? -1 : a.grade > b.grade ? 1 : 0;
    const left = key === "url" ? a.url : key === "domain"
      ? a.registrable_domain : a.attributes[key.slice(5)] ?? "";
    const right = key === "url" ? b.url : key === "domain"
      ? b.registrable_domain : b.attributes[key.slice(5)] ?? "";
    return left < right ? -1 : left > right ? 1 : 0;
  }

  function header(label: string, key: SortKey): HTMLElement {
    const cell = el("th", { class: "sortable", "data-sort": key },
      label, sortKey === key ? (sortAsc ? " ▴" : " ▾") : "");
    cell.addEventListener("click", () => {
      if (sortKey === key) sortAsc = !sortAsc;
      else {
        sortKey = key;
        sortAsc = true;
      }
      renderTable();
    });
    return cell;
  }

  function renderTable(): void {
    clear(tableBox);
    const columns = exportDoc.list.columns;
    const head = el("tr", {},
      header("rank", "rank"),
      header("site", "url"),
      header("domain", "domain"),
      header("score", "score"),
      header("grade", "grade"),
      el("th", {}, "light"),
      el("th", {}, "review"),
      ...columns.map((column) => header(column, `attr:${column}`)),
    );
    const rows = visibleEntries().map((entry) => {
      const index = siteIndex.get(entry.url);
      const link = index === undefined
        ? el("span", {}, entry.url)
        : el("a", {
            href: `#/lists/${encodeURIComponent(listId)}/sites/${index}`,
          }, entry.url);
      return el("tr", { "data-url": entry.url },
        el("td", { class: "num", "data-role": "rank" }, String(entry.rank)),
        el("td", { class: "mono" }, link),
        el("td", {}, entry.registrable_domain),
        el("td", { class: "num", "data-role": "score" }, scoreText(entry.score)),
        el("td", {}, gradeBadge(entry.grade)),
        el("td", {}, lightBadge(entry.light)),
        el("td", {}, entry.scanned ? flagMarker(entry.flagged_for_review) : "not scanned"),
        ...columns.map((column) => el("td", {}, entry.attributes[column] ?? "")),
      );
    });
    tableBox.append(
      el("p", { class: "meta" },
        `scheme ${ranking.scheme_id} v${ranking.scheme_version}`,
        jsonEqual(draft, baseScheme) ? "" : " (draft, unsaved)"),
      el("table", { class: "data ranking", "data-role": "ranking-table" },
        el("thead", {}, head), el("tbody", {}, ...rows)),
    );
  }

  function renderFilters(): void {
    clear(filterBox);
    for (const column of exportDoc.list.columns) {
      const values = [...new Set(
        ranking.entries.map((entry) => entry.attributes[column] ?? ""))].sort();
      const select = el("select", { "data-filter": column },
        el("option", { value: "" }, `${column}: all`),
        ...values.filter((v) => v !== "").map((value) =>
          el("option", { value }, value)),
      );
      select.addEventListener("change", () => {
        filters.set(column, select.value);
        renderTable();
      });
      filterBox.append(select);
    }
  }

  // -- scans ----------------------------------------------------------------

  async function rescan(): Promise<void> {
    clear(scanBox);
    rescanButton.disabled = true;
    try {
      const trigger = await triggerListScan(listId, token);
      const lines = trigger.outcomes.outcomes.map((outcome) =>
        el("li", {},
          el("code", {}, outcome.url), ` ${outcome.status}`,
          outcome.status === "denied" && outcome.retry_after_s !== null
            ? ` (retry in ${outcome.retry_after_s}s)` : "",
          outcome.detail ? `: ${outcome.detail}` : ""));
      scanBox.append(
        el("p", {},
          `admitted ${trigger.outcomes.admitted}, denied ${trigger.outcomes.denied}`),
        el("ul", { class: "outcomes" }, ...lines),
      );
      if (trigger.throttled) {
        const ticker = el("span", { class: "countdown", "data-role": "countdown" });
        scanBox.append(el("p", {}, "every site was scanned recently; ", ticker));
        startCountdown(ticker, trigger.retryAfterS ?? minDenied(trigger.outcomes.outcomes));
      } else if (trigger.outcomes.admitted > 0) {
        exportDoc = await getExport(listId, token);
        ranking = buildRanking(exportDoc, draft);
        renderTable();
      }
    } catch (exc) {
      if (exc instanceof ApiFailure) scanBox.append(errorBox(exc));
      else if (exc instanceof Offline) scanBox.append(offlineBox());
      else throw exc;
    } finally {
      rescanButton.disabled = false;
    }
  }

  function minDenied(outcomes: { retry_after_s: number | null }[]): number {
    const waits = outcomes.map((o) => o.retry_after_s)
      .filter((wait): wait is number => wait !== null);
    return waits.length ? Math.min(...waits) : 0;
  }

  // -- scheme editor --------------------------------------------------------

  function renderSchemePanel(errors: string[] = validateScheme(draft, catalogDoc)): void {
    clear(schemeBox);
    schemeBox.append(el("h3", {}, "Rating scheme"));

    if (saved.length) {
      const select = el("select", { "data-role": "scheme-select" },
        ...saved.map((summary) => {
          const option = el("option", { value: summary.id },
            `${summary.name} (v${summary.version})`);
          if (summary.id === draft.id) option.setAttribute("selected", "");
          return option;
        }));
      select.addEventListener("change", () => {
        void getScheme(select.value)
          .then((scheme) => applyDraft(copyScheme(scheme), true))
          .catch(() => renderSchemePanel());
      });
      schemeBox.append(el("label", {}, "saved schemes ", select));
    }

    const criteriaBox = el("div", { class: "criteria" });
    draft.criteria.forEach((criterion, index) => {
      criteriaBox.append(criterionRow(criterion, index));
    });
    schemeBox.append(criteriaBox, addCriterionRow(), thresholdsBox(), schemeErrors);
    schemeBox.append(saveControls());
    updateErrors(errors);
  }

  function criterionRow(criterion: CriterionDoc, index: number): HTMLElement {
    const weightNumber = el("input", {
      type: "number", min: "0", step: "0.01",
      "data-role": "weight", "data-check-key": criterion.check_key,
    });
    weightNumber.value = String(criterion.weight);
    const weightSlider = el("input", {
      type: "range", min: "0", max: "3", step: "0.05",
      "data-role": "weight-slider", "data-check-key": criterion.check_key,
    });
    weightSlider.value = String(criterion.weight);

    const setWeight = (text: string) => {
      const weight = Number(text);
      if (!Number.isFinite(weight)) return;
      weightNumber.value = text;
      weightSlider.value = text;
      const next = copyScheme(draft);
      next.criteria[index]!.weight = weight;
      applyDraft(next);
    };
    weightNumber.addEventListener("input", () => setWeight(weightNumber.value));
    weightSlider.addEventListener("input", () => setWeight(weightSlider.value));

    const critical = el("input", {
      type: "checkbox", "data-role": "critical", "data-check-key": criterion.check_key,
    });
    critical.checked = criterion.critical;
    critical.addEventListener("change", () => {
      const next = copyScheme(draft);
      next.criteria[index]!.critical = critical.checked;
      applyDraft(next);
    });

    const predicate = el("select", { "data-role": "predicate" },
      ...catalogDoc.predicates.map((name) => {
        const option = el("option", { value: name }, name);
        if (name === criterion.predicate) option.setAttribute("selected", "");
        return option;
      }));
    predicate.addEventListener("change", () => {
      const next = copyScheme(draft);
      next.criteria[index]!.predicate = predicate.value as Predicate;
      next.criteria[index]!.value = defaultValue(
        predicate.value, catalogDoc.checks[criterion.check_key]?.type ?? "boolean");
      applyDraft(next, true);
    });

    const remove = el("button", { type: "button", title: "remove criterion" }, "×");
    remove.addEventListener("click", () => {
      const next = copyScheme(draft);
      next.criteria.splice(index, 1);
      applyDraft(next, true);
    });

    return el("div", { class: "criterion", "data-check-key": criterion.check_key },
      el("div", { class: "criterion-head" },
        el("code", {}, criterion.check_key), remove),
      el("div", { class: "criterion-predicate" },
        predicate, valueWidget(criterion, index)),
      el("label", { class: "criterion-weight" },
        "weight", weightSlider, weightNumber),
      el("label", { class: "inline" }, critical, " critical"),
    );
  }

  function valueWidget(criterion: CriterionDoc, index: number): HTMLElement | null {
    if (criterion.predicate === "absent") return null;
    const declared = catalogDoc.checks[criterion.check_key]?.type ?? "string";

    const update = (value: unknown) => {
      const next = copyScheme(draft);
      next.criteria[index]!.value = value;
      applyDraft(next);
    };

    if (criterion.predicate === "equals" && declared === "boolean") {
      const select = el("select", { "data-role": "value" },
        el("option", { value: "true" }, "true"),
        el("option", { value: "false" }, "false"));
      select.value = criterion.value === true ? "true" : "false";
      select.addEventListener("change", () => update(select.value === "true"));
      return select;
    }
    if (criterion.predicate === "at_least" ||
        (criterion.predicate === "equals" && declared === "integer")) {
      const input = el("input", { type: "number", step: "1", "data-role": "value" });
      input.value = String(criterion.value ?? 0);
      input.addEventListener("input", () => {
        const parsed = Number(input.value);
        update(Number.isInteger(parsed) ? parsed : input.value);
      });
      return input;
    }
    if (criterion.predicate === "equals" && declared === "string") {
      const input = el("input", { "data-role": "value" });
      input.value = typeof criterion.value === "string" ? criterion.value : "";
      input.addEventListener("input", () => update(input.value));
      return input;
    }
    // list-shaped values: comma-separated members
    const input = el("input", {
      "data-role": "value", placeholder: "comma-separated values",
    });
    input.value = Array.isArray(criterion.value) ? criterion.value.join(", ") : "";
    input.addEventListener("input", () => {
      const members = input.value.split(",").map((part) => part.trim())
        .filter((part) => part !== "");
      if (declared === "integer") {
        update(members.map((part) => (/^-?\d+$/.test(part) ? parseInt(part, 10) : part)));
      } else {
        update(members);
      }
    });
    return input;
  }

  function defaultValue(predicate: string, declared: string): unknown {
    if (predicate === "absent") return null;
    if (predicate === "at_least") return 1;
    if (predicate === "in_set") return [];
    return { boolean: true, integer: 0, string: "", "string-list": [] }[declared] ?? "";
  }

  function addCriterionRow(): HTMLElement {
    const select = el("select", { "data-role": "add-check" },
      ...Object.keys(catalogDoc.checks).sort().map((key) =>
        el("option", { value: key }, key)));
    const button = el("button", { type: "button", "data-role": "add-criterion" },
      "add criterion");
    button.addEventListener("click", () => {
      const key = select.value;
      const declared = catalogDoc.checks[key]?.type ?? "boolean";
      const next = copyScheme(draft);
      next.criteria.push({
        check_key: key,
        predicate: "equals",
        value: defaultValue("equals", declared),
        weight: 1,
        critical: false,
      });
      applyDraft(next, true);
    });
    return el("div", { class: "add-criterion" }, select, button);
  }

  function thresholdsBox(): HTMLElement {
    const box = el("div", { class: "thresholds" }, el("h4", {}, "Thresholds"));
    const group = (label: string, values: number[],
                   write: (index: number, value: number) => void) => {
      const row = el("div", { class: "threshold-row" }, el("span", {}, label));
      values.forEach((value, index) => {
        const input = el("input", {
          type: "number", step: "0.01", min: "0", max: "1",
          "data-role": `${label}-threshold`,
        });
        input.value = String(value);
        input.addEventListener("input", () => {
          const parsed = Number(input.value);
          if (Number.isFinite(parsed)) write(index, parsed);
        });
        row.append(input);
      });
      return row;
    };
    box.append(
      group("grade", draft.grade_thresholds, (index, value) => {
        const next = copyScheme(draft);
        next.grade_thresholds[index] = value;
        applyDraft(next);
      }),
      group("light", draft.light_thresholds, (index, value) => {
        const next = copyScheme(draft);
        next.light_thresholds[index] = value;
        applyDraft(next);
      }),
    );
    return box;
  }

  function saveControls(): HTMLElement {
    const box = el("div", { class: "scheme-save" });
    const status = el("div", { class: "save-status" });
    if (savedNote) status.append(el("p", {}, savedNote));

    const discard = el("button", { type: "button" }, "discard draft");
    discard.addEventListener("click", () => {
      dropDraft(listId);
      applyDraft(copyScheme(baseScheme), true);
    });

    const idInput = el("input", { placeholder: "scheme id", "data-role": "save-id" });
    idInput.value = draft.id;
    saveButton = el("button", { type: "button", "data-role": "save-scheme" }, "save");
    saveButton.addEventListener("click", () => void save());

    async function save(): Promise<void> {
      clear(status);
      const target = idInput.value.trim();
      if (!target) {
        status.append(el("p", { class: "error-text" }, "a scheme id is required"));
        return;
      }
      const doc = copyScheme(draft);
      doc.id = target;
      const existing = saved.find((summary) => summary.id === target);
      try {
        let stored: SchemeDoc;
        if (existing) {
          doc.version = existing.version;
          stored = await updateScheme(doc);
        } else {
          stored = await createScheme(doc);
        }
        saved = saved.filter((summary) => summary.id !== stored.id).concat([{
          id: stored.id, name: stored.name, version: stored.version,
          criteria_count: stored.criteria.length,
        }]);
        dropDraft(listId);
        baseScheme = copyScheme(stored);
        savedNote = `saved ${stored.id} v${stored.version}`;
        applyDraft(copyScheme(stored), true);
      } catch (exc) {
        if (exc instanceof ApiFailure) status.append(errorBox(exc));
        else if (exc instanceof Offline) status.append(offlineBox());
        else throw exc;
      }
    }

    box.append(
      el("div", { class: "save-row" }, idInput, saveButton, discard),
      status,
      el("p", { class: "hint" },
        "Edits re-rank this page instantly and stay local until saved."),
    );
    return box;
  }
}
