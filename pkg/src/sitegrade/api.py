"""HTTP API under /api/v1.

All responses are JSON. Errors share one envelope:
{"error": {"code", "message", "violations"?}}. Private lists require
their access token, passed as a bearer Authorization header or a
``token`` query parameter; the token itself is only ever disclosed in
the create response. Rankings are emitted through the canonical
encoder, making them byte-identical with CLI ranking output.
"""

from __future__ import annotations

import secrets
from typing import Any

from fastapi import Body, FastAPI, Request, Response
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse

from . import __version__
from .catalog import CHECK_CATALOG, FAMILIES, TRACKER_CATEGORIES, UnknownCheckKey, family_of
from .config import Config
from .datasets import Datasets
from .export import canonical_json, ranking_document
from .listio import (
    PREDICATES,
    SchemeError,
    record_to_dict,
    scan_list_from_dict,
    scan_list_to_dict,
    scheme_from_dict,
    scheme_to_dict,
)
from .model import ScanList, validate_scan_list
from .orchestrator import RateLimited, Scanner
from .rating import SiteRating, rate
from .store import (
    ListNotFound,
    SchemeNotFound,
    Store,
    VersionConflict,
)
from .urlnorm import MalformedUrl, normalize_url


class ApiError(Exception):
    def __init__(self, status_code: int, code: str, message: str,
                 violations: list[dict] | None = None,
                 headers: dict[str, str] | None = None):
        super().__init__(message)
        self.status_code = status_code
        self.code = code
        self.message = message
        self.violations = violations
        self.headers = headers


def _rating_to_dict(rating: SiteRating) -> dict[str, Any]:
    return {
        "score": rating.score_float,
        "grade": rating.grade,
        "light": rating.light,
        "flagged_for_review": rating.flagged_for_review,
        "criteria": [
            {"check_key": o.check_key, "outcome": o.outcome,
             "weight": o.weight, "critical": o.critical}
            for o in rating.outcomes
        ],
    }


def create_app(cfg: Config, datasets: Datasets, store: Store,
               scanner: Scanner) -> FastAPI:
    app = FastAPI(title="sitegrade", version=__version__, docs_url=None,
                  redoc_url=None, openapi_url=None)

    if cfg.ui_origin:
        from fastapi.middleware.cors import CORSMiddleware
        app.add_middleware(CORSMiddleware, allow_origins=[cfg.ui_origin],
                           allow_methods=["*"], allow_headers=["*"])

    @app.exception_handler(ApiError)
    async def _api_error(_request: Request, exc: ApiError):
        body: dict[str, Any] = {"error": {"code": exc.code, "message": exc.message}}
        if exc.violations is not None:
            body["error"]["violations"] = exc.violations
        return JSONResponse(body, status_code=exc.status_code,
                            headers=exc.headers or {})

    @app.exception_handler(RequestValidationError)
    async def _bad_body(_request: Request, exc: RequestValidationError):
        return JSONResponse(
            {"error": {"code": "bad_request", "message": str(exc.errors()[:1])}},
            status_code=422)

    def _token_of(request: Request) -> str | None:
        auth = request.headers.get("authorization", "")
        if auth.lower().startswith("bearer "):
            return auth[7:].strip()
        return request.query_params.get("token")

    def _get_list(list_id: str, request: Request) -> tuple[ScanList, int]:
        try:
            scan_list, version = store.get_list(list_id)
        except ListNotFound:
            raise ApiError(404, "not_found", f"no list {list_id}") from None
        if scan_list.private and _token_of(request) != scan_list.access_token:
            if cfg.hide_private_existence:
                raise ApiError(404, "not_found", f"no list {list_id}")
            raise ApiError(403, "forbidden", "this list requires its access token")
        return scan_list, version

    def _get_scheme(scheme_id: str):
        try:
            return store.get_scheme(scheme_id)
        except SchemeNotFound:
            raise ApiError(404, "not_found", f"no scheme {scheme_id}") from None

    def _scheme_param(request: Request, scan_list: ScanList):
        scheme_id = request.query_params.get("scheme") or scan_list.default_scheme_id
        return _get_scheme(scheme_id)

    def _parse_list_payload(payload: dict, list_id: str = "") -> ScanList:
        try:
            scan_list = scan_list_from_dict(payload, psl=datasets.psl,
                                            list_id=list_id)
        except MalformedUrl as exc:
            raise ApiError(422, "validation_failed", "list rejected", violations=[
                {"code": "MalformedUrl", "field": "sites", "message": str(exc),
                 "site_index": None}]) from None
        except (KeyError, TypeError, ValueError) as exc:
            raise ApiError(422, "bad_request", f"malformed list document: {exc}") \
                from None
        violations = validate_scan_list(scan_list)
        if violations:
            raise ApiError(422, "validation_failed", "list rejected",
                           violations=[v.as_dict() for v in violations])
        return scan_list

    # -- meta ---------------------------------------------------------------

    @app.get("/healthz")
    def healthz():
        return {"status": "ok", "version": __version__,
                "dataset_digests": datasets.digests}

    @app.get("/api/v1/catalog")
    def catalog():
        return {
            "families": list(FAMILIES),
            "checks": {key: {"type": value_type, "family": family_of(key)}
                       for key, value_type in CHECK_CATALOG.items()},
            "tracker_categories": list(TRACKER_CATEGORIES),
            "predicates": list(PREDICATES),
            "guidance": datasets.guidance,
        }

    # -- schemes ------------------------------------------------------------

    @app.get("/api/v1/schemes")
    def list_schemes():
        return {"schemes": [
            {"id": scheme.id, "name": scheme.name, "version": version,
             "criteria_count": len(scheme.criteria)}
            for scheme, version in store.list_schemes()]}

    @app.get("/api/v1/schemes/{scheme_id}")
    def get_scheme(scheme_id: str):
        scheme, version = _get_scheme(scheme_id)
        doc = scheme_to_dict(scheme)
        doc["version"] = version
        return doc

    def _parse_scheme(payload: dict, scheme_id: str):
        payload = dict(payload)
        payload["id"] = scheme_id or payload.get("id", "")
        if not payload["id"]:
            raise ApiError(422, "validation_failed", "scheme id is required")
        try:
            return scheme_from_dict(payload)
        except UnknownCheckKey as exc:
            raise ApiError(422, "validation_failed",
                           f"unknown check key {exc.args[0]}") from None
        except SchemeError as exc:
            raise ApiError(422, "validation_failed", str(exc)) from None
        except (KeyError, TypeError, ValueError) as exc:
            raise ApiError(422, "bad_request", f"malformed scheme: {exc}") from None

    @app.post("/api/v1/schemes", status_code=201)
    def create_scheme(payload: dict = Body(...)):
        scheme = _parse_scheme(payload, payload.get("id", ""))
        try:
            version = store.save_scheme(scheme, expected_version=0)
        except VersionConflict:
            raise ApiError(409, "version_conflict",
                           f"scheme {scheme.id} already exists") from None
        doc = scheme_to_dict(scheme)
        doc["version"] = version
        return doc

    @app.put("/api/v1/schemes/{scheme_id}")
    def update_scheme(scheme_id: str, payload: dict = Body(...)):
        scheme = _parse_scheme(payload, scheme_id)
        expected = payload.get("version")
        if not isinstance(expected, int):
            raise ApiError(422, "validation_failed",
                           "version field (the version you read) is required")
        try:
            version = store.save_scheme(scheme, expected_version=expected)
        except VersionConflict as exc:
            raise ApiError(409, "version_conflict", str(exc)) from None
        doc = scheme_to_dict(scheme)
        doc["version"] = version
        return doc

    # -- lists --------------------------------------------------------------

    @app.get("/api/v1/lists")
    def list_lists(limit: int = 100, offset: int = 0):
        entries = []
        for scan_list, version in store.list_lists():
            if scan_list.private:
                continue
            entries.append({
                "id": scan_list.id, "name": scan_list.name,
                "description": scan_list.description,
                "site_count": len(scan_list.sites),
                "columns": list(scan_list.columns),
                "version": version,
            })
        total = len(entries)
        offset = max(0, offset)
        limit = max(0, limit)
        return {"lists": entries[offset:offset + limit], "total": total,
                "limit": limit, "offset": offset}

    @app.post("/api/v1/lists", status_code=201)
    def create_list(payload: dict = Body(...)):
        payload = dict(payload)
        payload.pop("id", None)
        payload.pop("access_token", None)
        if payload.get("private"):
            # minted here so validation sees a complete private list;
            # disclosed to the caller only in this response
            payload["access_token"] = secrets.token_urlsafe(16)
        scan_list = _parse_list_payload(payload)
        stored = store.create_list(scan_list)
        doc = scan_list_to_dict(stored, include_token=True)
        doc["version"] = 1
        return doc

    @app.get("/api/v1/lists/{list_id}")
    def get_list(list_id: str, request: Request):
        scan_list, version = _get_list(list_id, request)
        doc = scan_list_to_dict(scan_list)
        doc["version"] = version
        return doc

    @app.put("/api/v1/lists/{list_id}")
    def update_list(list_id: str, request: Request, payload: dict = Body(...)):
        current, _version = _get_list(list_id, request)
        payload = dict(payload)
        expected = payload.pop("version", None)
        if not isinstance(expected, int):
            raise ApiError(422, "validation_failed",
                           "version field (the version you read) is required")
        payload["id"] = list_id
        payload.setdefault("private", current.private)
        # clients cannot rotate tokens; the stored one is carried forward
        payload["access_token"] = current.access_token
        scan_list = _parse_list_payload(payload, list_id=list_id)
        try:
            version = store.save_list(scan_list, expected)
        except VersionConflict as exc:
            raise ApiError(409, "version_conflict", str(exc)) from None
        doc = scan_list_to_dict(scan_list)
        doc["version"] = version
        return doc

    @app.delete("/api/v1/lists/{list_id}", status_code=204)
    def delete_list(list_id: str, request: Request):
        _get_list(list_id, request)
        store.delete_list(list_id)
        return Response(status_code=204)

    # -- scanning -----------------------------------------------------------

    @app.post("/api/v1/lists/{list_id}/scan", status_code=202)
    def scan_list_now(list_id: str, request: Request):
        scan_list, _version = _get_list(list_id, request)
        outcomes = scanner.scan_list(scan_list)
        body = {"list_id": list_id, "outcomes": [], "admitted": 0, "denied": 0}
        min_retry = None
        for outcome in outcomes:
            if outcome.denied_retry_after is not None:
                body["denied"] += 1
                min_retry = (outcome.denied_retry_after if min_retry is None
                             else min(min_retry, outcome.denied_retry_after))
                body["outcomes"].append({
                    "url": outcome.url, "status": "denied",
                    "retry_after_s": outcome.denied_retry_after, "detail": ""})
            elif outcome.error:
                body["outcomes"].append({
                    "url": outcome.url, "status": "error",
                    "retry_after_s": None, "detail": outcome.error})
            else:
                body["admitted"] += 1
                body["outcomes"].append({
                    "url": outcome.url, "status": "completed",
                    "retry_after_s": None, "detail": ""})
        if body["admitted"] == 0 and body["denied"] > 0:
            return JSONResponse(body, status_code=429,
                                headers={"Retry-After": str(min_retry)})
        return body

    @app.post("/api/v1/scan", status_code=200)
    def scan_single(request: Request, payload: dict = Body(...)):
        raw = payload.get("url")
        if not isinstance(raw, str):
            raise ApiError(422, "validation_failed", "url field is required")
        try:
            url = normalize_url(raw)
        except MalformedUrl as exc:
            raise ApiError(422, "validation_failed", str(exc)) from None
        try:
            record = scanner.scan_site(url)
        except RateLimited as exc:
            raise ApiError(
                429, "rate_limited",
                f"{exc.domain} was scanned recently; retry in {exc.retry_after_s}s",
                headers={"Retry-After": str(exc.retry_after_s)}) from None
        scheme_id = request.query_params.get("scheme") or "balanced"
        scheme, _ = _get_scheme(scheme_id)
        return {"url": url, "record": record_to_dict(record),
                "rating": _rating_to_dict(rate(scheme, record))}

    # -- reading results ----------------------------------------------------

    @app.get("/api/v1/lists/{list_id}/results")
    def list_results(list_id: str, request: Request):
        scan_list, _version = _get_list(list_id, request)
        scheme, scheme_version = _scheme_param(request, scan_list)
        latest = store.latest_records(list_id)
        sites = []
        for site in scan_list.sites:
            record = latest.get(site.url)
            entry: dict[str, Any] = {
                "url": site.url,
                "registrable_domain": site.registrable_domain,
                "attributes": dict(site.attributes),
                "scanned": record is not None,
                "record": record_to_dict(record) if record is not None else None,
                "rating": (_rating_to_dict(rate(scheme, record))
                           if record is not None else None),
            }
            sites.append(entry)
        return {"list_id": list_id, "scheme_id": scheme.id,
                "scheme_version": scheme_version, "sites": sites}

    @app.get("/api/v1/lists/{list_id}/ranking")
    def list_ranking(list_id: str, request: Request):
        scan_list, _version = _get_list(list_id, request)
        scheme, scheme_version = _scheme_param(request, scan_list)
        doc = ranking_document(scan_list, store.latest_records(list_id),
                               scheme, scheme_version, datasets.digests)
        return Response(content=canonical_json(doc),
                        media_type="application/json")

    @app.get("/api/v1/lists/{list_id}/export")
    def list_export(list_id: str, request: Request):
        scan_list, _version = _get_list(list_id, request)
        scheme, _scheme_version = _scheme_param(request, scan_list)
        return store.export_document(list_id, scheme, datasets.digests)

    def _site_by_index(scan_list: ScanList, index: int):
        if not 0 <= index < len(scan_list.sites):
            raise ApiError(404, "not_found",
                           f"site index {index} outside 0..{len(scan_list.sites) - 1}")
        return scan_list.sites[index]

    @app.get("/api/v1/lists/{list_id}/sites/{index}")
    def site_detail(list_id: str, index: int, request: Request):
        scan_list, _version = _get_list(list_id, request)
        scheme, scheme_version = _scheme_param(request, scan_list)
        site = _site_by_index(scan_list, index)
        record = store.latest_records(list_id).get(site.url)
        body: dict[str, Any] = {
            "url": site.url,
            "registrable_domain": site.registrable_domain,
            "attributes": dict(site.attributes),
            "list_id": list_id,
            "scheme_id": scheme.id,
            "scheme_version": scheme_version,
            "scanned": record is not None,
            "record": None, "rating": None, "guidance": [],
        }
        if record is not None:
            rating = rate(scheme, record)
            body["record"] = record_to_dict(record)
            body["rating"] = _rating_to_dict(rating)
            guidance = []
            for outcome in rating.outcomes:
                if outcome.outcome != "violated":
                    continue
                entry = datasets.guidance_for(outcome.check_key)
                guidance.append({"check_key": outcome.check_key, **entry})
            body["guidance"] = guidance
        return body

    @app.get("/api/v1/lists/{list_id}/sites/{index}/history")
    def site_history(list_id: str, index: int, request: Request):
        scan_list, _version = _get_list(list_id, request)
        scheme, scheme_version = _scheme_param(request, scan_list)
        site = _site_by_index(scan_list, index)
        points = []
        for record in store.records_for(list_id, site_url=site.url):
            rating = rate(scheme, record)
            points.append({
                "started_at": record.started_at,
                "finished_at": record.finished_at,
                "score": rating.score_float,
                "grade": rating.grade,
                "light": rating.light,
            })
        return {"url": site.url, "list_id": list_id, "scheme_id": scheme.id,
                "scheme_version": scheme_version, "points": points}

    return app
