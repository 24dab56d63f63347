"""Privacy posture facts built from the captured page.

Tracker detection runs in two stages: extract every embedded resource
reference from the HTML, then match the third-party ones against the
blocklist. Cookies observed during the page load are classified by the
registrable domain they target. CDN use is inferred from response
header and CNAME signatures, and hosting location from the address
ranges the site resolves into.
"""

from __future__ import annotations

from dataclasses import dataclass
from urllib.parse import urlsplit

from .. import dnswire
from ..blocklist import Blocklist
from ..catalog import TRACKER_CATEGORIES
from ..config import Config
from ..geo import GeoTable
from ..htmlres import extract_resources
from ..model import (
    STATUS_ERROR,
    STATUS_NOT_APPLICABLE,
    STATUS_SUCCESS,
    CheckResult,
)
from ..psl import PublicSuffixList
from ..resolver import Resolver, ResolverError, ResolverTimeout
from ..urlnorm import host_of
from . import FamilyError
from .web import PageCapture


@dataclass(frozen=True)
class CdnSignature:
    provider: str
    header_name: str = ""
    header_contains: str = ""
    cname_suffix: str = ""


def classify_third_parties(resources: list[str], site_domain: str,
                           psl: PublicSuffixList) -> tuple[list[str], list[tuple[str, str]]]:
    """Split resource URLs into (sorted third-party domains,
    third-party (host, registrable domain) pairs in document order)."""
    domains: list[str] = []
    seen: set[str] = set()
    pairs: list[tuple[str, str]] = []
    for url in resources:
        host = urlsplit(url).hostname
        if not host:
            continue
        domain = psl.registrable_domain(host)
        if domain == site_domain:
            continue
        pairs.append((host, domain))
        if domain not in seen:
            seen.add(domain)
            domains.append(domain)
    return sorted(domains), pairs


def categorize_trackers(pairs: list[tuple[str, str]],
                        blocklist: Blocklist) -> dict[str, str]:
    """Map tracker registrable domain -> category. The first matching
    resource in document order decides a domain's category."""
    categories: dict[str, str] = {}
    for host, domain in pairs:
        if domain in categories:
            continue
        rule = blocklist.match(host)
        if rule is not None:
            categories[domain] = rule.category
    return categories


def detect_cdn(capture: PageCapture, host: str, resolver: Resolver,
               signatures: list[CdnSignature]) -> tuple[bool, str, str]:
    final = capture.final
    cname_target: str | None = None
    cname_looked_up = False
    for sig in signatures:
        if sig.header_name and final is not None:
            value = final.header(sig.header_name)
            if value is not None:
                if not sig.header_contains or sig.header_contains.lower() in value.lower():
                    return True, sig.provider, f"header {sig.header_name}"
        if sig.cname_suffix:
            if not cname_looked_up:
                cname_looked_up = True
                try:
                    msg = resolver.query(host, dnswire.TYPE_CNAME)
                    for rec in msg.answers:
                        if rec.rtype == dnswire.TYPE_CNAME and isinstance(rec.value, str):
                            cname_target = rec.value
                            break
                except (ResolverTimeout, ResolverError):
                    cname_target = None
            if cname_target is not None:
                suffix = sig.cname_suffix.lower().lstrip(".")
                if cname_target == suffix or cname_target.endswith("." + suffix):
                    return True, sig.provider, f"cname {cname_target}"
    return False, "", ""


def _count(key: str, value: int) -> CheckResult:
    return CheckResult(key=key, status=STATUS_SUCCESS, value=value)


def run_privacy_checks(url: str, capture: PageCapture | None, cfg: Config,
                       resolver: Resolver, psl: PublicSuffixList,
                       blocklist: Blocklist, geo: GeoTable,
                       eu_members: frozenset[str],
                       cdn_signatures: list[CdnSignature]) -> list[CheckResult]:
    if capture is None or not capture.ok:
        raise FamilyError("privacy", "no page capture to inspect")

    host = host_of(url)
    site_domain = psl.registrable_domain(host)
    results: list[CheckResult] = []

    resources = extract_resources(capture.body_text(), capture.final_url)
    third_domains, third_pairs = classify_third_parties(resources, site_domain, psl)
    results.append(_count("privacy.third_party.count", len(third_domains)))
    results.append(CheckResult(key="privacy.third_party.domains",
                               status=STATUS_SUCCESS, value=third_domains))

    tracker_categories = categorize_trackers(third_pairs, blocklist)
    tracker_domains = sorted(tracker_categories)
    results.append(_count("privacy.trackers.count", len(tracker_domains)))
    results.append(CheckResult(key="privacy.trackers.domains",
                               status=STATUS_SUCCESS, value=tracker_domains))
    for category in TRACKER_CATEGORIES:
        hits = sum(1 for c in tracker_categories.values() if c == category)
        results.append(_count(f"privacy.trackers.{category}", hits))

    seen_cookies = set()
    first_party = third_party = missing_secure = missing_httponly = 0
    for cookie in capture.cookies:
        effective = cookie.domain or cookie.set_from
        identity = (cookie.name, effective, cookie.path)
        if identity in seen_cookies:
            continue
        seen_cookies.add(identity)
        if psl.registrable_domain(effective) == site_domain:
            first_party += 1
        else:
            third_party += 1
        if not cookie.secure:
            missing_secure += 1
        if not cookie.http_only:
            missing_httponly += 1
    results.append(_count("privacy.cookies.first_party", first_party))
    results.append(_count("privacy.cookies.third_party", third_party))
    results.append(_count("privacy.cookies.missing_secure", missing_secure))
    results.append(_count("privacy.cookies.missing_httponly", missing_httponly))

    detected, provider, detail = detect_cdn(capture, host, resolver, cdn_signatures)
    results.append(CheckResult(key="privacy.cdn.detected", status=STATUS_SUCCESS,
                               value=detected, detail=detail))
    if detected:
        results.append(CheckResult(key="privacy.cdn.provider", status=STATUS_SUCCESS,
                                   value=provider))
    else:
        results.append(CheckResult(key="privacy.cdn.provider",
                                   status=STATUS_NOT_APPLICABLE, value=None,
                                   detail="no signature matched"))

    try:
        addresses = resolver.addresses(host)
    except (ResolverTimeout, ResolverError) as exc:
        for key in ("privacy.geo.countries", "privacy.geo.hosted_in_eu"):
            results.append(CheckResult(key=key, status=STATUS_ERROR, value=None,
                                       detail=str(exc)))
        return results
    countries = [geo.country_for(a) for a in addresses]
    known = sorted({c for c in countries if c is not None})
    results.append(CheckResult(key="privacy.geo.countries", status=STATUS_SUCCESS,
                               value=known))
    hosted_in_eu = bool(countries) and all(c in eu_members for c in countries)
    results.append(CheckResult(key="privacy.geo.hosted_in_eu", status=STATUS_SUCCESS,
                               value=hosted_in_eu))
    return results
