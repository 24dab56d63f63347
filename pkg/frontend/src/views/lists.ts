/** Landing view: public benchmarks, private list opener, quick scan. */

import { ApiFailure, Offline, listLists, scanSingle } from "../api";
import { startCountdown } from "../countdown";
import { clear, el } from "../dom";
import { navigate, rememberToken } from "../state";
import { errorBox, gradeBadge, lightBadge, loading, offlineBox, scoreText } from "./common";

export async function renderListsView(root: HTMLElement): Promise<void> {
  clear(root);
  root.append(loading());

  let index;
  try {
    index = await listLists();
  } catch (exc) {
    clear(root);
    if (exc instanceof Offline) root.append(offlineBox());
    else if (exc instanceof ApiFailure) root.append(errorBox(exc));
    else throw exc;
    return;
  }

  clear(root);
  root.append(el("h2", {}, "Benchmarks"));

  if (index.lists.length === 0) {
    root.append(el("p", {}, "No public benchmarks yet."));
  } else {
    const rows = index.lists.map((entry) =>
      el("tr", {},
        el("td", {}, el("a", { href: `#/lists/${encodeURIComponent(entry.id)}` }, entry.name)),
        el("td", {}, entry.description),
        el("td", { class: "num" }, String(entry.site_count)),
        el("td", {}, entry.columns.join(", ")),
      ));
    root.append(el("table", { class: "data" },
      el("thead", {}, el("tr", {},
        el("th", {}, "name"), el("th", {}, "description"),
        el("th", {}, "sites"), el("th", {}, "attributes"))),
      el("tbody", {}, ...rows),
    ));
  }

  root.append(el("p", {},
    el("a", { href: "#/new", class: "button" }, "create a benchmark")));

  root.append(privateOpener());
  root.append(quickScan());
}

function privateOpener(): HTMLElement {
  const idInput = el("input", { placeholder: "list id", autocomplete: "off" });
  const tokenInput = el("input", {
    type: "password", placeholder: "access token", autocomplete: "off",
  });
  const form = el("form", { class: "panel" },
    el("h3", {}, "Open a private benchmark"),
    idInput, tokenInput,
    el("button", { type: "submit" }, "open"),
  );
  form.addEventListener("submit", (event) => {
    event.preventDefault();
    const listId = idInput.value.trim();
    if (!listId) return;
    if (tokenInput.value.trim()) rememberToken(listId, tokenInput.value.trim());
    navigate(`#/lists/${encodeURIComponent(listId)}`);
  });
  return form;
}

function quickScan(): HTMLElement {
  const input = el("input", { placeholder: "https://example.org", autocomplete: "off" });
  const button = el("button", { type: "submit" }, "scan");
  const status = el("div", { class: "scan-status" });
  const form = el("form", { class: "panel", "data-role": "quick-scan" },
    el("h3", {}, "Scan a single site"),
    el("p", { class: "hint" },
      "One-off scan outside any benchmark, rated with the default scheme."),
    input, button, status,
  );
  form.addEventListener("submit", (event) => {
    event.preventDefault();
    void runScan();
  });

  async function runScan(): Promise<void> {
    clear(status);
    button.disabled = true;
    try {
      const result = await scanSingle(input.value);
      status.append(
        el("p", {}, `scanned ${result.url}`),
        el("p", {},
          "score ", scoreText(result.rating.score), " ",
          gradeBadge(result.rating.grade), " ",
          lightBadge(result.rating.light)),
      );
    } catch (exc) {
      if (exc instanceof ApiFailure && exc.status === 429) {
        const ticker = el("span", { class: "countdown", "data-role": "countdown" });
        status.append(el("p", {}, "scanned too recently; ", ticker));
        startCountdown(ticker, exc.retryAfterS ?? 0);
      } else if (exc instanceof ApiFailure) {
        status.append(errorBox(exc));
      } else if (exc instanceof Offline) {
        status.append(offlineBox());
      } else {
        throw exc;
      }
    } finally {
      button.disabled = false;
    }
  }
  return form;
}
