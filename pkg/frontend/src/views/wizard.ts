/**
 * Benchmark wizard: paste URLs, declare attribute columns, fill
 * per-site values, set the privacy flag. The draft is validated
 * client-side with the same codes the service uses, and nothing is
 * POSTed until the draft is clean.
 */

import { ApiFailure, Offline, createList } from "../api";
import { clear, el } from "../dom";
import { navigate, rememberToken } from "../state";
import { normalizeUrl, validateScanList, type ListDraft } from "../validate";
import { errorBox, offlineBox, violationItem } from "./common";

export function renderWizardView(root: HTMLElement): void {
  clear(root);

  const nameInput = el("input", { placeholder: "benchmark name", autocomplete: "off" });
  const descriptionInput = el("textarea", {
    placeholder: "what this benchmark compares and why", rows: "2",
  });
  const privateInput = el("input", { type: "checkbox", id: "wizard-private" });
  const intervalInput = el("input", {
    type: "number", min: "0", value: "0", id: "wizard-interval",
  });
  const urlsInput = el("textarea", {
    placeholder: "one URL per line", rows: "8", "data-role": "urls",
  });

  let columns: string[] = [];
  const attributeValues: Record<string, string>[] = [];

  const columnsBox = el("div", { class: "columns-box" });
  const gridBox = el("div", { class: "grid-box" });
  const validationBox = el("div", { class: "validation-box", "data-role": "violations" });
  const resultBox = el("div", { class: "result-box" });
  const submitButton = el("button", { type: "submit" }, "create benchmark");

  function lines(): string[] {
    return urlsInput.value.split("\n").map((line) => line.trim()).filter(Boolean);
  }

  function buildDraft(): ListDraft {
    const sites = lines().map((line, index) => {
      let url = line;
      try {
        url = normalizeUrl(line);
      } catch {
        // left raw so validation points at this line
      }
      const attributes: Record<string, string> = {};
      for (const column of columns) {
        attributes[column] = attributeValues[index]?.[column] ?? "";
      }
      return { url, attributes };
    });
    return {
      name: nameInput.value,
      description: descriptionInput.value,
      private: privateInput.checked,
      columns: [...columns],
      sites,
      rescan_interval_s: Number(intervalInput.value || "0"),
    };
  }

  function renderColumns(): void {
    clear(columnsBox);
    columns.forEach((column, index) => {
      const input = el("input", { value: column, placeholder: "column name" });
      input.value = column;
      input.addEventListener("input", () => {
        columns[index] = input.value;
        refresh({ keepColumns: true });
      });
      const remove = el("button", { type: "button" }, "remove");
      remove.addEventListener("click", () => {
        columns.splice(index, 1);
        for (const row of attributeValues) delete row[column];
        refresh({});
      });
      columnsBox.append(el("div", { class: "column-row" }, input, remove));
    });
    const add = el("button", { type: "button", "data-role": "add-column" }, "add attribute column");
    add.addEventListener("click", () => {
      columns.push("");
      refresh({});
    });
    columnsBox.append(add);
  }

  function renderGrid(): void {
    clear(gridBox);
    const urls = lines();
    if (!urls.length || !columns.length) return;
    const head = el("tr", {}, el("th", {}, "url"),
      ...columns.map((column) => el("th", {}, column || "(unnamed)")));
    const rows = urls.map((line, index) => {
      attributeValues[index] ??= {};
      const cells = columns.map((column) => {
        const input = el("input", { "data-column": column });
        input.value = attributeValues[index]?.[column] ?? "";
        input.addEventListener("input", () => {
          attributeValues[index]![column] = input.value;
          renderValidation();
        });
        return el("td", {}, input);
      });
      return el("tr", {}, el("td", { class: "mono" }, line), ...cells);
    });
    gridBox.append(el("table", { class: "data" },
      el("thead", {}, head), el("tbody", {}, ...rows)));
  }

  function renderValidation(): void {
    clear(validationBox);
    const violations = validateScanList(buildDraft());
    submitButton.disabled = violations.length > 0;
    if (!violations.length) return;
    validationBox.append(el("ul", { class: "violations" },
      ...violations.map((v) => violationItem(v))));
  }

  function refresh(options: { keepColumns?: boolean }): void {
    if (!options.keepColumns) renderColumns();
    renderGrid();
    renderValidation();
  }

  const form = el("form", { class: "wizard" },
    el("h2", {}, "New benchmark"),
    el("label", {}, "Name", nameInput),
    el("label", {}, "Description", descriptionInput),
    el("label", { class: "inline" }, privateInput,
      " private (an access token is issued on creation)"),
    el("label", {}, "Rescan interval in seconds (0 disables)", intervalInput),
    el("h3", {}, "Attribute columns"),
    columnsBox,
    el("h3", {}, "Sites"),
    urlsInput,
    gridBox,
    validationBox,
    submitButton,
    resultBox,
  );

  urlsInput.addEventListener("input", () => refresh({ keepColumns: true }));
  nameInput.addEventListener("input", renderValidation);
  intervalInput.addEventListener("input", renderValidation);

  form.addEventListener("submit", (event) => {
    event.preventDefault();
    void submit();
  });

  async function submit(): Promise<void> {
    clear(resultBox);
    const draft = buildDraft();
    const violations = validateScanList(draft);
    if (violations.length) {
      renderValidation();
      return;
    }
    submitButton.disabled = true;
    try {
      const created = await createList(draft);
      if (created.private && created.access_token) {
        rememberToken(created.id, created.access_token);
        resultBox.append(
          el("p", {}, `created '${created.name}'.`),
          el("p", { class: "token-reveal" },
            "Access token (shown only once): ",
            el("code", {}, created.access_token)),
          el("p", {}, el("a", { href: `#/lists/${encodeURIComponent(created.id)}` },
            "open the benchmark")),
        );
      } else {
        navigate(`#/lists/${encodeURIComponent(created.id)}`);
      }
    } catch (exc) {
      if (exc instanceof ApiFailure) resultBox.append(errorBox(exc));
      else if (exc instanceof Offline) resultBox.append(offlineBox());
      else throw exc;
    } finally {
      submitButton.disabled = false;
    }
  }

  refresh({});
  root.append(form);
}
