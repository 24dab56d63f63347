"""Name resolution facts: addresses and DNSSEC posture.

DNSSEC classification trusts the configured validating resolver rather
than validating chains locally:

  secure    answer came back with the AD bit set
  insecure  clean answer without AD and the zone apex publishes no DNSKEY
  bogus     plain query SERVFAILs but the same data is readable with the
            CD (checking disabled) bit, and the apex does publish keys
  error     the resolver is unreachable or inconsistent
"""

from __future__ import annotations

from .. import dnswire
from ..config import Config
from ..model import STATUS_SUCCESS, CheckResult
from ..psl import PublicSuffixList
from ..resolver import Resolver, ResolverError, ResolverTimeout
from ..urlnorm import host_of
from . import FamilyError

SECURE = "secure"
INSECURE = "insecure"
BOGUS = "bogus"
ERROR = "error"


def _apex_has_dnskey(resolver: Resolver, apex: str, cd: bool) -> bool:
    msg = resolver.query(apex, dnswire.TYPE_DNSKEY, ad=not cd, cd=cd, edns_do=True)
    if msg.rcode != dnswire.RCODE_NOERROR:
        return False
    return any(rec.rtype == dnswire.TYPE_DNSKEY for rec in msg.answers)


def classify_dnssec(resolver: Resolver, host: str, apex: str) -> tuple[str, str]:
    try:
        answer = resolver.query(host, dnswire.TYPE_A, ad=True, edns_do=True)
    except ResolverTimeout:
        return ERROR, "resolver timeout"
    except ResolverError as exc:
        return ERROR, str(exc)

    if answer.rcode in (dnswire.RCODE_NOERROR, dnswire.RCODE_NXDOMAIN):
        if answer.ad:
            return SECURE, "validated by resolver"
        try:
            signed = _apex_has_dnskey(resolver, apex, cd=False)
        except (ResolverTimeout, ResolverError) as exc:
            return ERROR, f"DNSKEY lookup failed: {exc}"
        if signed:
            return INSECURE, "zone publishes keys but the resolver did not validate"
        return INSECURE, "zone is unsigned"

    if answer.rcode == dnswire.RCODE_SERVFAIL:
        try:
            retry = resolver.query(host, dnswire.TYPE_A, cd=True, edns_do=True)
            signed = _apex_has_dnskey(resolver, apex, cd=True)
        except (ResolverTimeout, ResolverError) as exc:
            return ERROR, f"CD retry failed: {exc}"
        if retry.rcode == dnswire.RCODE_NOERROR and signed:
            return BOGUS, "answer only readable with checking disabled"
        return ERROR, "SERVFAIL without a readable CD answer"

    return ERROR, f"unexpected rcode {answer.rcode}"


def run_dns_checks(url: str, cfg: Config, resolver: Resolver,
                   psl: PublicSuffixList) -> list[CheckResult]:
    host = host_of(url)
    apex = psl.registrable_domain(host)

    try:
        addresses = resolver.addresses(host)
    except (ResolverTimeout, ResolverError) as exc:
        raise FamilyError("dns", f"address lookup failed: {exc}") from exc

    status, detail = classify_dnssec(resolver, host, apex)
    return [
        CheckResult(key="dns.dnssec.status", status=STATUS_SUCCESS,
                    value=status, detail=detail),
        CheckResult(key="dns.dnssec.evaluated_name", status=STATUS_SUCCESS,
                    value=host),
        CheckResult(key="dns.addresses", status=STATUS_SUCCESS,
                    value=addresses),
    ]
