"""Closed vocabulary of check facts and their declared value types.

Rating schemes may only reference keys listed here; the predicate's value
type must match the declared type. Family ``*.error`` envelope keys are
not facts and cannot be rated.
"""

from __future__ import annotations

BOOL = "boolean"
INT = "integer"
STR = "string"
STR_LIST = "string-list"

FAMILIES = ("web", "tls", "mail", "dns", "privacy")

CHECK_CATALOG: dict[str, str] = {
    # web family
    "web.https.available": BOOL,
    "web.https.redirect_enforced": BOOL,
    "web.hsts.present": BOOL,
    "web.hsts.max_age": INT,
    "web.hsts.include_subdomains": BOOL,
    "web.csp.present": BOOL,
    "web.x_frame_options.present": BOOL,
    "web.x_content_type_options.nosniff": BOOL,
    "web.referrer_policy.present": BOOL,
    "web.server.product": STR,
    "web.server.version": STR,
    "web.server.outdated": BOOL,
    # tls family (port 443)
    "tls.versions.offered": STR_LIST,
    "tls.legacy_versions.offered": BOOL,
    "tls.weak_ciphers.accepted": STR_LIST,
    "tls.cert.valid": BOOL,
    "tls.cert.hostname_match": BOOL,
    "tls.cert.not_after": STR,
    # mail family
    "mail.mx.present": BOOL,
    "mail.mx.hosts": STR_LIST,
    "mail.starttls.offered": BOOL,
    "mail.starttls.tls_versions": STR_LIST,
    "mail.spf.present": BOOL,
    "mail.dmarc.present": BOOL,
    # dns family
    "dns.dnssec.status": STR,
    "dns.dnssec.evaluated_name": STR,
    "dns.addresses": STR_LIST,
    # privacy family
    "privacy.third_party.count": INT,
    "privacy.third_party.domains": STR_LIST,
    "privacy.trackers.count": INT,
    "privacy.trackers.domains": STR_LIST,
    "privacy.trackers.advertising": INT,
    "privacy.trackers.analytics": INT,
    "privacy.trackers.social": INT,
    "privacy.trackers.fingerprinting": INT,
    "privacy.trackers.unknown": INT,
    "privacy.cookies.first_party": INT,
    "privacy.cookies.third_party": INT,
    "privacy.cookies.missing_secure": INT,
    "privacy.cookies.missing_httponly": INT,
    "privacy.cdn.detected": BOOL,
    "privacy.cdn.provider": STR,
    "privacy.geo.countries": STR_LIST,
    "privacy.geo.hosted_in_eu": BOOL,
}

FAMILY_ERROR_KEYS = {family: f"{family}.error" for family in FAMILIES}

TRACKER_CATEGORIES = ("advertising", "analytics", "social", "fingerprinting", "unknown")


class UnknownCheckKey(KeyError):
    """A scheme or guidance lookup referenced a key outside the catalog."""


def value_type(check_key: str) -> str:
    try:
        return CHECK_CATALOG[check_key]
    except KeyError:
        raise UnknownCheckKey(check_key) from None


def family_of(check_key: str) -> str:
    return check_key.split(".", 1)[0]


def keys_of_family(family: str) -> list[str]:
    return [k for k in CHECK_CATALOG if family_of(k) == family]
