"""Facts about the site's HTTPS endpoint: protocol versions, retired
cipher classes still accepted, and certificate chain health."""

from __future__ import annotations

from urllib.parse import urlsplit

from ..config import Config
from ..model import (
    STATUS_NOT_APPLICABLE,
    STATUS_SUCCESS,
    CheckResult,
)
from ..netdial import dial
from ..urlnorm import host_of, port_of
from .tlsprobe import LEGACY_VERSIONS, TlsEndpointReport, assess_endpoint


def report_to_results(report: TlsEndpointReport) -> list[CheckResult]:
    results = [
        CheckResult(key="tls.versions.offered", status=STATUS_SUCCESS,
                    value=list(report.versions_offered)),
        CheckResult(key="tls.legacy_versions.offered", status=STATUS_SUCCESS,
                    value=any(v in LEGACY_VERSIONS for v in report.versions_offered)),
        CheckResult(key="tls.weak_ciphers.accepted", status=STATUS_SUCCESS,
                    value=list(report.weak_ciphers)),
    ]
    cert = report.cert
    if cert is None or not cert.present:
        detail = "no TLS endpoint" if cert is None else cert.detail
        for key in ("tls.cert.valid", "tls.cert.hostname_match", "tls.cert.not_after"):
            results.append(CheckResult(key=key, status=STATUS_NOT_APPLICABLE,
                                       value=None, detail=detail))
        return results
    results.append(CheckResult(key="tls.cert.valid", status=STATUS_SUCCESS,
                               value=cert.valid, detail=cert.detail))
    results.append(CheckResult(key="tls.cert.hostname_match", status=STATUS_SUCCESS,
                               value=cert.hostname_match))
    results.append(CheckResult(key="tls.cert.not_after", status=STATUS_SUCCESS,
                               value=cert.not_after))
    return results


def run_tls_checks(url: str, cfg: Config, trust_store: str | None = None,
                   timeout: float = 5.0) -> list[CheckResult]:
    host = host_of(url)
    port = port_of(url) if urlsplit(url).scheme == "https" else 443

    def channel():
        return dial(host, port, cfg, timeout)

    report = assess_endpoint(channel, host, trust_store=trust_store, timeout=timeout)
    if not report.versions_offered:
        first_error = next(iter(report.errors.values()), "")
        results = report_to_results(report)
        return [
            CheckResult(key=r.key, status=r.status, value=r.value,
                        detail=r.detail or first_error)
            for r in results
        ]
    return report_to_results(report)
