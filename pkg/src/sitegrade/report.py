"""Report rendering: delimited ranking plus chart images.

Given an export document and a scheme, writes into a directory:

  ranking.json   canonical ranking (same bytes as the API endpoint)
  ranking.csv    one row per site, attribute columns appended
  ranking.png    score bar chart, colored by traffic light
  criteria.png   per-criterion outcome counts across the list
"""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Any

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  backend must be pinned first

from .export import canonical_json, parts_from_export, ranking_document
from .model import RatingScheme, ScanList, ScanRecord
from .rating import SATISFIED, VIOLATED, rate

LIGHT_COLORS = {"green": "#2e7d32", "yellow": "#f9a825", "red": "#c62828"}
UNSCANNED_COLOR = "#9e9e9e"


def write_ranking_csv(ranking: dict[str, Any], columns: list[str],
                      path: Path) -> None:
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["rank", "url", "registrable_domain", "score", "grade",
                         "light", "flagged_for_review", *columns])
        for entry in ranking["entries"]:
            score = entry["score"]
            writer.writerow([
                entry["rank"], entry["url"], entry["registrable_domain"],
                "" if score is None else f"{score:.6f}",
                entry["grade"], entry["light"],
                "yes" if entry["flagged_for_review"] else "no",
                *[entry["attributes"].get(c, "") for c in columns],
            ])


def _score_figure(ranking: dict[str, Any], path: Path) -> None:
    entries = list(reversed(ranking["entries"]))
    labels = [e["registrable_domain"] or e["url"] for e in entries]
    scores = [e["score"] if e["score"] is not None else 0.0 for e in entries]
    colors = [LIGHT_COLORS.get(e["light"], UNSCANNED_COLOR) if e["scanned"]
              else UNSCANNED_COLOR for e in entries]
    height = max(2.5, 0.5 * len(entries) + 1.2)
    fig, ax = plt.subplots(figsize=(8, height))
    ax.barh(range(len(entries)), scores, color=colors)
    ax.set_yticks(range(len(entries)), labels=labels)
    ax.set_xlim(0, 1)
    ax.set_xlabel("score")
    ax.set_title(f"{ranking['list_name'] or ranking['list_id']} "
                 f"({ranking['scheme_id']})")
    for i, entry in enumerate(entries):
        text = entry["grade"] if entry["scanned"] else "not scanned"
        ax.text(0.01, i, text, va="center", fontsize=8, color="white"
                if entry["scanned"] and entry["score"] and entry["score"] > 0.08
                else "black")
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)


def _criteria_figure(scan_list: ScanList, records_by_url: dict[str, ScanRecord],
                     scheme: RatingScheme, path: Path) -> None:
    keys = [c.check_key for c in scheme.criteria]
    satisfied = dict.fromkeys(keys, 0)
    violated = dict.fromkeys(keys, 0)
    inapplicable = dict.fromkeys(keys, 0)
    for site in scan_list.sites:
        record = records_by_url.get(site.url)
        if record is None:
            continue
        rating = rate(scheme, record)
        for outcome in rating.outcomes:
            if outcome.outcome == SATISFIED:
                satisfied[outcome.check_key] += 1
            elif outcome.outcome == VIOLATED:
                violated[outcome.check_key] += 1
            else:
                inapplicable[outcome.check_key] += 1

    height = max(2.5, 0.35 * len(keys) + 1.2)
    fig, ax = plt.subplots(figsize=(9, height))
    y = range(len(keys))
    sat = [satisfied[k] for k in keys]
    vio = [violated[k] for k in keys]
    na = [inapplicable[k] for k in keys]
    ax.barh(y, sat, color=LIGHT_COLORS["green"], label="satisfied")
    ax.barh(y, vio, left=sat, color=LIGHT_COLORS["red"], label="violated")
    ax.barh(y, na, left=[s + v for s, v in zip(sat, vio)],
            color=UNSCANNED_COLOR, label="not applicable")
    ax.set_yticks(list(y), labels=keys, fontsize=7)
    ax.invert_yaxis()
    ax.set_xlabel("sites")
    ax.set_title(f"criterion outcomes ({scheme.id})")
    ax.legend(loc="lower right", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)


def render_report(export_doc: dict[str, Any], scheme: RatingScheme,
                  scheme_version: int, out_dir: str | Path) -> dict[str, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    scan_list, latest = parts_from_export(export_doc)
    ranking = ranking_document(scan_list, latest, scheme, scheme_version,
                               export_doc.get("dataset_digests", {}))

    paths = {
        "ranking_json": out / "ranking.json",
        "ranking_csv": out / "ranking.csv",
        "ranking_png": out / "ranking.png",
        "criteria_png": out / "criteria.png",
    }
    paths["ranking_json"].write_bytes(canonical_json(ranking))
    write_ranking_csv(ranking, list(scan_list.columns), paths["ranking_csv"])
    _score_figure(ranking, paths["ranking_png"])
    _criteria_figure(scan_list, latest, scheme, paths["criteria_png"])
    return paths
