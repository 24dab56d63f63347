"""Canonical ranking and export documents.

The CLI and the HTTP API both emit rankings through this module, so a
ranking fetched over HTTP is byte for byte the file the CLI writes:
same builder, same key order, same compact JSON encoding, and no
wall-clock fields.
"""

from __future__ import annotations

import json
from typing import Any

from .listio import record_from_dict, scan_list_from_dict
from .model import RatingScheme, ScanList, ScanRecord
from .rating import rank_sites, rate


def canonical_json(doc: Any) -> bytes:
    return json.dumps(doc, ensure_ascii=False, allow_nan=False,
                      separators=(",", ":")).encode("utf-8")


def parts_from_export(doc: dict[str, Any]) -> tuple[ScanList, dict[str, ScanRecord]]:
    """Rebuild the list and the newest record per site from an export."""
    scan_list = scan_list_from_dict(doc["list"])
    latest: dict[str, ScanRecord] = {}
    for raw in doc.get("records", []):
        record = record_from_dict(raw)
        current = latest.get(record.site_url)
        if current is None or record.started_at >= current.started_at:
            latest[record.site_url] = record
    return scan_list, latest


def ranking_document(scan_list: ScanList, records_by_url: dict[str, ScanRecord],
                     scheme: RatingScheme, scheme_version: int,
                     dataset_digests: dict[str, str] | None = None) -> dict[str, Any]:
    ratings = {}
    for site in scan_list.sites:
        record = records_by_url.get(site.url)
        if record is not None:
            ratings[site.url] = rate(scheme, record)

    triples = []
    for site in scan_list.sites:
        rating = ratings.get(site.url)
        score = rating.score if rating is not None else None
        triples.append((site.url, site.registrable_domain, score))
    ranked = rank_sites(triples)

    sites_by_url = {site.url: site for site in scan_list.sites}
    entries = []
    for entry in ranked:
        site = sites_by_url[entry.url]
        rating = ratings.get(entry.url)
        entries.append({
            "rank": entry.rank,
            "url": entry.url,
            "registrable_domain": entry.registrable_domain,
            "score": entry.score_float,
            "grade": rating.grade if rating is not None else "–",
            "light": rating.light if rating is not None else "red",
            "flagged_for_review": bool(rating.flagged_for_review) if rating else False,
            "scanned": rating is not None,
            "attributes": dict(site.attributes),
        })

    return {
        "format_version": "1",
        "list_id": scan_list.id,
        "list_name": scan_list.name,
        "scheme_id": scheme.id,
        "scheme_version": scheme_version,
        "record_count": len(ratings),
        "dataset_digests": dict(dataset_digests or {}),
        "entries": entries,
    }
