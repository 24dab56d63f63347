/** Saved rating schemes. Editing happens inside a benchmark's ranking
 * view, where changes re-rank real results as they are made. */

import { ApiFailure, Offline, listSchemes } from "../api";
import { clear, el } from "../dom";
import { errorBox, loading, offlineBox } from "./common";

export async function renderSchemesView(root: HTMLElement): Promise<void> {
  clear(root);
  root.append(loading());
  let schemes;
  try {
    schemes = (await listSchemes()).schemes;
  } catch (exc) {
    clear(root);
    if (exc instanceof Offline) root.append(offlineBox());
    else if (exc instanceof ApiFailure) root.append(errorBox(exc));
    else throw exc;
    return;
  }

  clear(root);
  root.append(el("h2", {}, "Rating schemes"));
  if (!schemes.length) {
    root.append(el("p", {}, "No schemes stored."));
    return;
  }
  root.append(el("table", { class: "data" },
    el("thead", {}, el("tr", {},
      el("th", {}, "id"), el("th", {}, "name"),
      el("th", {}, "version"), el("th", {}, "criteria"))),
    el("tbody", {}, ...schemes.map((scheme) => el("tr", {},
      el("td", { class: "mono" }, scheme.id),
      el("td", {}, scheme.name),
      el("td", { class: "num" }, String(scheme.version)),
      el("td", { class: "num" }, String(scheme.criteria_count)),
    ))),
  ));
  root.append(el("p", { class: "hint" },
    "Open a benchmark and use its scheme panel to edit or derive a scheme; ",
    "edits re-rank the benchmark live and are saved only on request."));
}
