"""Mail transport facts for the site's registrable domain.

The SMTP conversation is capability-only: EHLO, optionally STARTTLS,
QUIT. No MAIL FROM is ever sent, so probes are invisible to queues.
TLS version enumeration reuses the raw probe over freshly upgraded
STARTTLS channels, one connection per version; certificates and weak
ciphers are not probed on mail hosts.
"""

from __future__ import annotations

import socket

from ..config import Config
from ..model import (
    STATUS_ERROR,
    STATUS_NOT_APPLICABLE,
    STATUS_SUCCESS,
    CheckResult,
)
from ..netdial import dial
from ..psl import PublicSuffixList
from ..resolver import Resolver, ResolverError, ResolverTimeout
from ..urlnorm import host_of
from . import FamilyError
from .tlsprobe import VERSION_NAMES, _suites_for, hello_probe

HELO_NAME = "probe.sitegrade.invalid"
MAX_MX_PROBED = 2


class SmtpError(Exception):
    pass


def _read_reply(sock_file) -> tuple[int, list[str]]:
    lines: list[str] = []
    while True:
        raw = sock_file.readline(2048)
        if not raw:
            raise SmtpError("connection closed mid-reply")
        line = raw.decode("utf-8", "replace").rstrip("\r\n")
        if len(line) < 3 or not line[:3].isdigit():
            raise SmtpError(f"malformed reply line {line!r}")
        lines.append(line[4:] if len(line) > 4 else "")
        if len(line) == 3 or line[3] == " ":
            return int(line[:3]), lines


def _ehlo(sock: socket.socket) -> list[str]:
    """Run the greeting + EHLO exchange, return capability keywords."""
    reader = sock.makefile("rb")
    code, _ = _read_reply(reader)
    if code != 220:
        raise SmtpError(f"greeting code {code}")
    sock.sendall(f"EHLO {HELO_NAME}\r\n".encode("ascii"))
    code, lines = _read_reply(reader)
    if code != 250:
        raise SmtpError(f"EHLO rejected with {code}")
    return [line.split()[0].upper() for line in lines[1:] if line.strip()]


def smtp_capabilities(mx_host: str, port: int, cfg: Config,
                      timeout: float) -> list[str]:
    sock = dial(mx_host, port, cfg, timeout)
    try:
        sock.settimeout(timeout)
        capabilities = _ehlo(sock)
        try:
            sock.sendall(b"QUIT\r\n")
        except OSError:
            pass
        return capabilities
    finally:
        sock.close()


def starttls_channel(mx_host: str, port: int, cfg: Config,
                     timeout: float) -> socket.socket:
    """Connect, EHLO, STARTTLS; return the socket ready for TLS bytes."""
    sock = dial(mx_host, port, cfg, timeout)
    try:
        sock.settimeout(timeout)
        capabilities = _ehlo(sock)
        if "STARTTLS" not in capabilities:
            raise SmtpError("STARTTLS not advertised")
        sock.sendall(b"STARTTLS\r\n")
        code, _ = _read_reply(sock.makefile("rb"))
        if code != 220:
            raise SmtpError(f"STARTTLS refused with {code}")
        return sock
    except BaseException:
        sock.close()
        raise


def _probe_starttls_versions(mx_host: str, port: int, cfg: Config,
                             timeout: float) -> list[str]:
    offered = []
    for version in VERSION_NAMES:
        def channel():
            return starttls_channel(mx_host, port, cfg, timeout)
        try:
            outcome = hello_probe(channel, mx_host, version, _suites_for(version), timeout)
        except (SmtpError, OSError):
            continue
        if outcome.kind == "selected" and outcome.version == version:
            offered.append(version)
    return offered


def _na(key: str, detail: str) -> CheckResult:
    return CheckResult(key=key, status=STATUS_NOT_APPLICABLE, value=None, detail=detail)


def run_mail_checks(url: str, cfg: Config, resolver: Resolver,
                    psl: PublicSuffixList, timeout: float = 5.0) -> list[CheckResult]:
    domain = psl.registrable_domain(host_of(url))
    try:
        mx_pairs = resolver.mx_hosts(domain)
    except (ResolverTimeout, ResolverError) as exc:
        raise FamilyError("mail", f"MX lookup failed: {exc}") from exc
    mx_pairs = [(pref, host) for pref, host in mx_pairs if host]

    results: list[CheckResult] = []
    if not mx_pairs:
        results.append(CheckResult(key="mail.mx.present", status=STATUS_SUCCESS,
                                   value=False))
        for key in ("mail.mx.hosts", "mail.starttls.offered",
                    "mail.starttls.tls_versions"):
            results.append(_na(key, "domain receives no mail"))
    else:
        hosts = [host for _, host in mx_pairs]
        results.append(CheckResult(key="mail.mx.present", status=STATUS_SUCCESS,
                                   value=True))
        results.append(CheckResult(key="mail.mx.hosts", status=STATUS_SUCCESS,
                                   value=hosts))
        port = cfg.smtp_ports[0]
        offers: dict[str, bool] = {}
        errors: dict[str, str] = {}
        for mx_host in hosts[:MAX_MX_PROBED]:
            try:
                capabilities = smtp_capabilities(mx_host, port, cfg, timeout)
                offers[mx_host] = "STARTTLS" in capabilities
            except (SmtpError, OSError) as exc:
                errors[mx_host] = str(exc)
        if not offers:
            detail = "; ".join(f"{h}: {e}" for h, e in errors.items())
            results.append(CheckResult(key="mail.starttls.offered",
                                       status=STATUS_ERROR, value=None, detail=detail))
            results.append(_na("mail.starttls.tls_versions", "no reachable exchanger"))
        else:
            # the weakest probed exchanger decides; one cleartext door is enough
            all_offer = all(offers.values())
            detail = ", ".join(f"{h}={'yes' if v else 'no'}" for h, v in offers.items())
            results.append(CheckResult(key="mail.starttls.offered", status=STATUS_SUCCESS,
                                       value=all_offer, detail=detail))
            first_offering = next((h for h, v in offers.items() if v), None)
            if first_offering is None:
                results.append(_na("mail.starttls.tls_versions",
                                   "no exchanger advertises STARTTLS"))
            else:
                versions = _probe_starttls_versions(first_offering, port, cfg, timeout)
                results.append(CheckResult(key="mail.starttls.tls_versions",
                                           status=STATUS_SUCCESS, value=versions,
                                           detail=first_offering))

    for key, name, marker in (("mail.spf.present", domain, "v=spf1"),
                              ("mail.dmarc.present", f"_dmarc.{domain}", "v=dmarc1")):
        try:
            texts = resolver.txt_strings(name)
        except (ResolverTimeout, ResolverError) as exc:
            results.append(CheckResult(key=key, status=STATUS_ERROR, value=None,
                                       detail=str(exc)))
            continue
        present = any(_has_version_tag(t, marker) for t in texts)
        results.append(CheckResult(key=key, status=STATUS_SUCCESS, value=present))
    return results


def _has_version_tag(text: str, marker: str) -> bool:
    lowered = text.strip().lower()
    if not lowered.startswith(marker):
        return False
    rest = lowered[len(marker):]
    return rest == "" or rest[0] in " ;"
