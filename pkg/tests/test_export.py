"""Ranking and export documents must serialize to identical bytes no
matter which entry point builds them."""

import json

import pytest

from sitegrade.export import canonical_json, parts_from_export, ranking_document
from sitegrade.model import (
    CheckResult,
    RatingCriterion,
    RatingScheme,
    ScanList,
    ScanRecord,
    SiteEntry,
)
from sitegrade.store import Store

SCHEME = RatingScheme(
    id="demo", name="demo",
    criteria=(
        RatingCriterion("web.https.available", "equals", True, 1.0),
        RatingCriterion("privacy.trackers.count", "equals", 0, 1.0),
    ))


def site(url, **attributes) -> SiteEntry:
    return SiteEntry.create(url, attributes)


def record(url, https, trackers, started="2026-08-23T10:00:00Z",
           list_id="demo-list") -> ScanRecord:
    return ScanRecord(
        site_url=url, list_id=list_id, started_at=started,
        finished_at="2026-08-23T10:01:00Z",
        results={
            "web.https.available": CheckResult(
                key="web.https.available", status="success", value=https),
            "privacy.trackers.count": CheckResult(
                key="privacy.trackers.count", status="success", value=trackers),
        })


SCAN_LIST = ScanList(
    id="demo-list", name="Demo", columns=("region",),
    sites=(site("https://alpha.test/", region="north"),
           site("https://beta.test/", region="south"),
           site("https://gamma.test/", region="east")))

RECORDS = {
    "https://alpha.test/": record("https://alpha.test/", True, 0),
    "https://beta.test/": record("https://beta.test/", False, 3),
}


def test_canonical_json_is_compact_utf8():
    blob = canonical_json({"name": "café", "n": [1, 2]})
    assert blob == '{"name":"café","n":[1,2]}'.encode("utf-8")


def test_canonical_json_rejects_nan():
    with pytest.raises(ValueError):
        canonical_json({"x": float("nan")})


def test_ranking_document_shape_and_order():
    doc = ranking_document(SCAN_LIST, RECORDS, SCHEME, scheme_version=4,
                           dataset_digests={"blocklist": "ab" * 8})
    assert doc["format_version"] == "1"
    assert doc["list_id"] == "demo-list"
    assert doc["scheme_id"] == "demo" and doc["scheme_version"] == 4
    assert doc["record_count"] == 2

    entries = doc["entries"]
    assert [e["url"] for e in entries] == [
        "https://alpha.test/", "https://beta.test/", "https://gamma.test/"]
    assert [e["rank"] for e in entries] == [1, 2, 3]

    alpha, beta, gamma = entries
    assert alpha["score"] == 1.0 and alpha["grade"] == "1" and alpha["light"] == "green"
    assert alpha["scanned"] is True and alpha["attributes"] == {"region": "north"}
    assert beta["score"] == 0.0 and beta["grade"] == "6" and beta["light"] == "red"
    assert gamma["score"] is None and gamma["grade"] == "–"
    assert gamma["light"] == "red" and gamma["scanned"] is False


def test_ranking_ties_share_rank_and_sort_by_domain():
    records = dict(RECORDS)
    records["https://beta.test/"] = record("https://beta.test/", True, 0)
    doc = ranking_document(SCAN_LIST, records, SCHEME, 1)
    ranks = [(e["rank"], e["registrable_domain"]) for e in doc["entries"]]
    assert ranks == [(1, "alpha.test"), (1, "beta.test"), (3, "gamma.test")]


def test_ranking_bytes_deterministic():
    first = canonical_json(ranking_document(SCAN_LIST, RECORDS, SCHEME, 2))
    shuffled = {k: RECORDS[k] for k in reversed(list(RECORDS))}
    second = canonical_json(ranking_document(SCAN_LIST, shuffled, SCHEME, 2))
    assert first == second


def test_ranking_has_no_wall_clock_fields():
    doc = ranking_document(SCAN_LIST, RECORDS, SCHEME, 1)
    text = json.dumps(doc)
    for needle in ("started_at", "finished_at", "generated", "timestamp"):
        assert needle not in text


def test_parts_from_export_round_trip(tmp_path):
    store = Store(tmp_path)
    store.create_list(SCAN_LIST)
    store.append_scan(record("https://alpha.test/", False, 9,
                             started="2026-08-22T08:00:00Z"))
    store.append_scan(record("https://alpha.test/", True, 0,
                             started="2026-08-23T10:00:00Z"))
    store.append_scan(record("https://beta.test/", False, 3))

    export = store.export_document("demo-list", SCHEME, {"blocklist": "cd" * 8})
    rebuilt_list, latest = parts_from_export(export)
    assert rebuilt_list.sites == SCAN_LIST.sites
    assert latest["https://alpha.test/"].started_at == "2026-08-23T10:00:00Z"

    direct = canonical_json(ranking_document(
        SCAN_LIST, store.latest_records("demo-list"), SCHEME, 1))
    via_export = canonical_json(ranking_document(rebuilt_list, latest, SCHEME, 1))
    assert direct == via_export


def test_parts_from_export_without_records():
    scan_list, latest = parts_from_export(
        {"list": {"id": "x", "name": "X", "sites": []}})
    assert scan_list.id == "x" and latest == {}
