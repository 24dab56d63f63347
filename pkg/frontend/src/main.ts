/** Entry point: hash router, navigation chrome, offline banner. */

import "./style.css";
import { clear, el } from "./dom";
import { parseHash } from "./state";
import { renderDetailView } from "./views/detail";
import { renderHistoryView } from "./views/history";
import { renderListsView } from "./views/lists";
import { renderRankingView } from "./views/ranking";
import { renderSchemesView } from "./views/schemes";
import { renderWizardView } from "./views/wizard";

async function route(app: HTMLElement): Promise<void> {
  const { view, args, params } = parseHash(window.location.hash);

  if (view === "lists" && args.length === 0) return renderListsView(app);
  if (view === "new") return renderWizardView(app);
  if (view === "schemes") return renderSchemesView(app);
  if (view === "lists" && args.length >= 1) {
    const listId = args[0]!;
    if (args.length === 1) return renderRankingView(app, listId, params);
    if (args[1] === "sites" && args.length >= 3) {
      const index = parseInt(args[2]!, 10);
      if (Number.isInteger(index)) {
        if (args.length === 3) return renderDetailView(app, listId, index, params);
        if (args[3] === "history") {
          return renderHistoryView(app, listId, index, params);
        }
      }
    }
  }

  clear(app);
  app.append(
    el("h2", {}, "Not found"),
    el("p", {}, "Nothing lives at ", el("code", {}, window.location.hash || "#/")),
    el("p", {}, el("a", { href: "#/lists" }, "back to the benchmarks")),
  );
}

function boot(): void {
  const app = document.getElementById("app");
  const banner = document.getElementById("offline-banner");
  if (!app) return;

  if (banner) {
    const show = () => {
      banner.hidden = false;
    };
    const hide = () => {
      banner.hidden = true;
    };
    window.addEventListener("sitegrade:offline", show);
    window.addEventListener("sitegrade:online", hide);
    window.addEventListener("offline", show);
    window.addEventListener("online", hide);
  }

  const rerender = () => {
    void route(app);
  };
  window.addEventListener("hashchange", rerender);
  rerender();
}

boot();
