"""Shared domain types: scan lists, check results, scan records, schemes.

All types are immutable value objects; they can be shared freely between
worker threads. Construction does not validate list-level invariants --
use :func:`validate_scan_list` for that, so callers can collect every
violation instead of failing on the first.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Any

from .psl import PublicSuffixList, bundled_psl
from .urlnorm import MalformedUrl, host_of, normalize_url

STATUS_SUCCESS = "success"
STATUS_FAILURE = "failure"
STATUS_ERROR = "error"
STATUS_NOT_APPLICABLE = "not_applicable"

VALID_STATUSES = (STATUS_SUCCESS, STATUS_FAILURE, STATUS_ERROR, STATUS_NOT_APPLICABLE)

GRADE_UNDEFINED = "–"


@dataclass(frozen=True)
class SiteEntry:
    """One URL in a scan list, plus its user-defined attribute values."""

    url: str
    registrable_domain: str
    attributes: dict[str, str] = field(default_factory=dict)

    @classmethod
    def create(cls, raw_url: str, attributes: dict[str, str] | None = None,
               psl: PublicSuffixList | None = None) -> "SiteEntry":
        url = normalize_url(raw_url)
        domain = (psl or bundled_psl()).registrable_domain(host_of(url))
        return cls(url=url, registrable_domain=domain, attributes=dict(attributes or {}))


@dataclass(frozen=True)
class ScanList:
    """A named benchmark: ordered sites plus presentation metadata."""

    id: str
    name: str
    description: str = ""
    private: bool = False
    access_token: str = ""
    columns: tuple[str, ...] = ()
    sites: tuple[SiteEntry, ...] = ()
    rescan_interval_s: int = 0
    default_scheme_id: str = "balanced"


@dataclass(frozen=True)
class CheckResult:
    """One measured fact, in the uniform envelope all check families emit."""

    key: str
    status: str
    value: Any = None
    detail: str = ""

    def __post_init__(self):
        if self.status not in VALID_STATUSES:
            raise ValueError(f"invalid status {self.status!r}")
        if self.status == STATUS_ERROR and self.value is not None:
            raise ValueError("error results carry no value")


@dataclass(frozen=True)
class ScanRecord:
    """All facts from one scan of one site."""

    site_url: str
    list_id: str
    started_at: str
    finished_at: str
    results: dict[str, CheckResult]
    raw_refs: dict[str, str] = field(default_factory=dict)

    def digest(self) -> str:
        """Content digest over the identifying fields; used for idempotent
        persistence."""
        payload = {
            "site_url": self.site_url,
            "list_id": self.list_id,
            "started_at": self.started_at,
            "results": {
                k: [r.status, r.value, r.detail] for k, r in sorted(self.results.items())
            },
        }
        blob = json.dumps(payload, sort_keys=True, ensure_ascii=False).encode()
        return hashlib.sha256(blob).hexdigest()[:24]


@dataclass(frozen=True)
class RatingCriterion:
    """One weighted predicate over a check fact."""

    check_key: str
    predicate: str          # equals | at_least | in_set | absent
    value: Any = None       # compared value / allowed set; unused for absent
    weight: float = 1.0
    critical: bool = False


@dataclass(frozen=True)
class RatingScheme:
    """User-editable scoring contract: weighted criteria plus the cutoffs
    mapping scores to grades and traffic lights."""

    id: str
    name: str
    criteria: tuple[RatingCriterion, ...]
    grade_thresholds: tuple[float, ...] = (0.9, 0.75, 0.6, 0.45, 0.3)
    light_thresholds: tuple[float, ...] = (0.75, 0.45)
    version: int = 1


# ---------------------------------------------------------------------------
# scan-list validation

@dataclass(frozen=True)
class Violation:
    code: str
    field: str
    message: str
    site_index: int | None = None

    def as_dict(self) -> dict[str, Any]:
        d: dict[str, Any] = {"code": self.code, "field": self.field, "message": self.message}
        if self.site_index is not None:
            d["site_index"] = self.site_index
        return d


def validate_scan_list(scan_list: ScanList) -> list[Violation]:
    """Return every invariant violation in ``scan_list`` (empty = valid)."""
    violations: list[Violation] = []
    if not scan_list.name.strip():
        violations.append(Violation("EmptyName", "name", "list name must be non-empty"))
    if scan_list.private and not scan_list.access_token:
        violations.append(Violation(
            "MissingToken", "access_token", "private lists require an access token"))
    if scan_list.rescan_interval_s < 0:
        violations.append(Violation(
            "NegativeInterval", "rescan_interval_s", "rescan interval must be >= 0"))

    seen_columns: set[str] = set()
    for col in scan_list.columns:
        if not col.strip():
            violations.append(Violation("EmptyColumn", "columns", "column names must be non-empty"))
        elif col in seen_columns:
            violations.append(Violation("DuplicateColumn", "columns", f"duplicate column {col!r}"))
        seen_columns.add(col)

    declared = set(scan_list.columns)
    seen_urls: set[str] = set()
    for idx, site in enumerate(scan_list.sites):
        try:
            normalized = normalize_url(site.url)
        except MalformedUrl as exc:
            violations.append(Violation("MalformedUrl", "url", str(exc), site_index=idx))
            continue
        if normalized != site.url:
            violations.append(Violation(
                "UnnormalizedUrl", "url", f"expected {normalized}", site_index=idx))
        if normalized in seen_urls:
            violations.append(Violation(
                "DuplicateUrl", "url", f"duplicate of {normalized}", site_index=idx))
        seen_urls.add(normalized)
        extra = set(site.attributes) - declared
        missing = declared - set(site.attributes)
        if extra:
            violations.append(Violation(
                "UnknownAttribute", "attributes",
                f"undeclared columns: {sorted(extra)}", site_index=idx))
        if missing:
            violations.append(Violation(
                "MissingAttribute", "attributes",
                f"missing columns: {sorted(missing)}", site_index=idx))
    return violations


def fill_missing_attributes(columns: tuple[str, ...],
                            attributes: dict[str, str]) -> dict[str, str]:
    """Attributes map holding exactly the declared columns, blanks filled."""
    return {col: attributes.get(col, "") for col in columns}
