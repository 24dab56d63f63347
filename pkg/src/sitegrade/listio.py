"""Codecs for scan lists, schemes, and scan records.

CSV import: first header cell must be ``url``; remaining header cells
become attribute columns. JSON import mirrors the ScanList fields. The
same dict representations are used by the store, the API, and the CLI so
round-trips are identity by construction.
"""

from __future__ import annotations

import csv
import io
from typing import Any

from .catalog import CHECK_CATALOG, UnknownCheckKey, value_type
from .model import (
    CheckResult,
    RatingCriterion,
    RatingScheme,
    ScanList,
    ScanRecord,
    SiteEntry,
    fill_missing_attributes,
)
from .psl import PublicSuffixList

PREDICATES = ("equals", "at_least", "in_set", "absent")


class SchemeError(ValueError):
    """Scheme document violates the scheme contract."""


# -- scan lists -------------------------------------------------------------

def scan_list_to_dict(scan_list: ScanList, include_token: bool = False) -> dict[str, Any]:
    d: dict[str, Any] = {
        "id": scan_list.id,
        "name": scan_list.name,
        "description": scan_list.description,
        "private": scan_list.private,
        "columns": list(scan_list.columns),
        "sites": [
            {
                "url": s.url,
                "registrable_domain": s.registrable_domain,
                "attributes": dict(s.attributes),
            }
            for s in scan_list.sites
        ],
        "rescan_interval_s": scan_list.rescan_interval_s,
        "default_scheme_id": scan_list.default_scheme_id,
    }
    if include_token:
        d["access_token"] = scan_list.access_token
    return d


def scan_list_from_dict(doc: dict[str, Any], psl: PublicSuffixList | None = None,
                        list_id: str = "") -> ScanList:
    columns = tuple(doc.get("columns", []))
    sites = []
    for entry in doc.get("sites", []):
        site = SiteEntry.create(
            entry["url"],
            fill_missing_attributes(columns, entry.get("attributes", {})),
            psl=psl,
        )
        sites.append(site)
    return ScanList(
        id=doc.get("id") or list_id,
        name=doc.get("name", ""),
        description=doc.get("description", ""),
        private=bool(doc.get("private", False)),
        access_token=doc.get("access_token", ""),
        columns=columns,
        sites=tuple(sites),
        rescan_interval_s=int(doc.get("rescan_interval_s", 0)),
        default_scheme_id=doc.get("default_scheme_id", "balanced"),
    )


def scan_list_from_csv(text: str, name: str = "imported",
                       psl: PublicSuffixList | None = None) -> ScanList:
    reader = csv.reader(io.StringIO(text))
    rows = [row for row in reader if row and any(cell.strip() for cell in row)]
    if not rows:
        raise ValueError("empty CSV document")
    header = [cell.strip() for cell in rows[0]]
    if not header or header[0].lower() != "url":
        raise ValueError("first CSV column must be 'url'")
    columns = tuple(header[1:])
    sites = []
    for row in rows[1:]:
        attrs = {col: (row[i + 1].strip() if i + 1 < len(row) else "")
                 for i, col in enumerate(columns)}
        sites.append(SiteEntry.create(row[0].strip(), attrs, psl=psl))
    return ScanList(id="", name=name, columns=columns, sites=tuple(sites))


# -- rating schemes ---------------------------------------------------------

def scheme_to_dict(scheme: RatingScheme) -> dict[str, Any]:
    return {
        "id": scheme.id,
        "name": scheme.name,
        "version": scheme.version,
        "criteria": [
            {
                "check_key": c.check_key,
                "predicate": c.predicate,
                "value": c.value,
                "weight": c.weight,
                "critical": c.critical,
            }
            for c in scheme.criteria
        ],
        "grade_thresholds": list(scheme.grade_thresholds),
        "light_thresholds": list(scheme.light_thresholds),
    }


def _check_predicate_value(criterion: RatingCriterion) -> None:
    declared = value_type(criterion.check_key)
    pred, value = criterion.predicate, criterion.value
    if pred == "absent":
        return
    if pred == "at_least":
        if declared != "integer" or not isinstance(value, int) or isinstance(value, bool):
            raise SchemeError(
                f"{criterion.check_key}: at_least requires an integer fact and value")
        return
    if pred == "in_set":
        if not isinstance(value, list) or not value:
            raise SchemeError(f"{criterion.check_key}: in_set requires a non-empty list")
        expected = {"string": str, "integer": int}.get(declared)
        if expected is None or not all(isinstance(v, expected) for v in value):
            raise SchemeError(f"{criterion.check_key}: in_set members must be {declared}")
        return
    if pred == "equals":
        ok = {
            "boolean": lambda v: isinstance(v, bool),
            "integer": lambda v: isinstance(v, int) and not isinstance(v, bool),
            "string": lambda v: isinstance(v, str),
            "string-list": lambda v: isinstance(v, list) and all(isinstance(x, str) for x in v),
        }[declared](value)
        if not ok:
            raise SchemeError(f"{criterion.check_key}: equals value must be {declared}")
        return
    raise SchemeError(f"unknown predicate {pred!r}")


def scheme_from_dict(doc: dict[str, Any]) -> RatingScheme:
    """Parse and validate a scheme document.

    Raises SchemeError (bad structure, weights, thresholds, predicate
    types) or UnknownCheckKey at load time, never at evaluation time.
    """
    criteria = []
    for raw in doc.get("criteria", []):
        criterion = RatingCriterion(
            check_key=raw["check_key"],
            predicate=raw["predicate"],
            value=raw.get("value"),
            weight=float(raw.get("weight", 1.0)),
            critical=bool(raw.get("critical", False)),
        )
        if criterion.check_key not in CHECK_CATALOG:
            raise UnknownCheckKey(criterion.check_key)
        if criterion.predicate not in PREDICATES:
            raise SchemeError(f"unknown predicate {criterion.predicate!r}")
        if criterion.weight < 0:
            raise SchemeError(f"{criterion.check_key}: negative weight")
        _check_predicate_value(criterion)
        criteria.append(criterion)
    if not criteria:
        raise SchemeError("scheme has no criteria")
    if not any(c.weight > 0 for c in criteria):
        raise SchemeError("at least one criterion weight must be positive")

    grade_thresholds = tuple(float(x) for x in doc.get("grade_thresholds",
                                                       (0.9, 0.75, 0.6, 0.45, 0.3)))
    light_thresholds = tuple(float(x) for x in doc.get("light_thresholds", (0.75, 0.45)))
    if len(grade_thresholds) != 5 or len(light_thresholds) != 2:
        raise SchemeError("expected 5 grade thresholds and 2 light thresholds")
    for seq in (grade_thresholds, light_thresholds):
        if any(not 0 < x < 1 for x in seq):
            raise SchemeError("thresholds must lie in (0,1)")
        if any(a <= b for a, b in zip(seq, seq[1:])):
            raise SchemeError("thresholds must be strictly descending")

    return RatingScheme(
        id=doc.get("id", ""),
        name=doc.get("name", doc.get("id", "")),
        criteria=tuple(criteria),
        grade_thresholds=grade_thresholds,
        light_thresholds=light_thresholds,
        version=int(doc.get("version", 1)),
    )


# -- scan records -----------------------------------------------------------

def record_to_dict(record: ScanRecord) -> dict[str, Any]:
    return {
        "site_url": record.site_url,
        "list_id": record.list_id,
        "started_at": record.started_at,
        "finished_at": record.finished_at,
        "results": {
            key: {
                "status": r.status,
                "value": r.value,
                "detail": r.detail,
            }
            for key, r in sorted(record.results.items())
        },
        "raw_refs": dict(record.raw_refs),
    }


def record_from_dict(doc: dict[str, Any]) -> ScanRecord:
    results = {
        key: CheckResult(key=key, status=raw["status"],
                         value=raw.get("value"), detail=raw.get("detail", ""))
        for key, raw in doc.get("results", {}).items()
    }
    return ScanRecord(
        site_url=doc["site_url"],
        list_id=doc.get("list_id", ""),
        started_at=doc["started_at"],
        finished_at=doc["finished_at"],
        results=results,
        raw_refs=dict(doc.get("raw_refs", {})),
    )
