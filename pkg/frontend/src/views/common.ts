/** Shared fragments: error boxes, badges, lights, token prompts. */

import { ApiFailure, Offline } from "../api";
import { clear, el } from "../dom";
import { rememberToken } from "../state";
import type { Light, Violation } from "../types";

export function errorBox(failure: ApiFailure): HTMLElement {
  const box = el("div", { class: "error-box", role: "alert" },
    el("strong", {}, failure.code),
    " ",
    failure.message,
  );
  if (failure.violations.length) {
    const items = failure.violations.map((v) => violationItem(v));
    box.append(el("ul", { class: "violations" }, ...items));
  }
  return box;
}

export function violationItem(v: Violation): HTMLElement {
  const where = v.site_index !== undefined ? ` (site ${v.site_index})` : "";
  return el("li", { "data-code": v.code },
    el("code", {}, v.code), `${where}: ${v.message}`);
}

export function offlineBox(): HTMLElement {
  return el("div", { class: "error-box", role: "alert" },
    el("strong", {}, "offline"), " the service is unreachable");
}

/** Grade badge; the undefined grade renders as a dash. */
export function gradeBadge(grade: string): HTMLElement {
  const safe = /^[1-6]$/.test(grade) ? grade : "none";
  return el("span", { class: `badge grade-${safe}` }, grade);
}

/** Traffic light, always paired with its text label. */
export function lightBadge(light: Light): HTMLElement {
  return el("span", { class: `light light-${light}` },
    el("span", { class: "light-dot", "aria-hidden": "true" }),
    light,
  );
}

export function flagMarker(flagged: boolean): HTMLElement | null {
  if (!flagged) return null;
  return el("span", { class: "flagged", title: "a critical criterion is violated" },
    "⚑ review");
}

export function scoreText(score: number | null): string {
  return score === null ? "–" : score.toFixed(3);
}

/**
 * Render either the view produced by `load` or, on failure, an error
 * box; a 403 renders a token prompt that stores the entered token for
 * the list and retries.
 */
export async function guard(root: HTMLElement, listId: string,
                            load: () => Promise<void>): Promise<void> {
  try {
    await load();
  } catch (exc) {
    clear(root);
    if (exc instanceof Offline) {
      root.append(offlineBox());
      return;
    }
    if (!(exc instanceof ApiFailure)) throw exc;
    if (exc.status === 403) {
      root.append(tokenPrompt(listId, () => guard(root, listId, load)));
      return;
    }
    root.append(errorBox(exc));
  }
}

function tokenPrompt(listId: string, retry: () => void): HTMLElement {
  const input = el("input", {
    type: "password", placeholder: "access token",
    class: "token-input", autocomplete: "off",
  });
  const form = el("form", { class: "token-prompt" },
    el("p", {}, `The list '${listId}' is private. Enter its access token.`),
    input,
    el("button", { type: "submit" }, "unlock"),
  );
  form.addEventListener("submit", (event) => {
    event.preventDefault();
    rememberToken(listId, input.value.trim());
    retry();
  });
  return form;
}

export function loading(): HTMLElement {
  return el("p", { class: "loading" }, "loading…");
}
