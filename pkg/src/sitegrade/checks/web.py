"""HTTP(S) delivery checks: availability, redirect policy, response
headers, and server software freshness.

The fetcher deliberately accepts any certificate and any TLS version;
judging transport security is the tls family's job, while this family
needs to observe content even on badly configured hosts.
"""

from __future__ import annotations

import http.client
import ssl
import warnings
from dataclasses import dataclass, field
from urllib.parse import urljoin, urlsplit

from .. import USER_AGENT
from ..config import Config
from ..model import (
    STATUS_FAILURE,
    STATUS_NOT_APPLICABLE,
    STATUS_SUCCESS,
    CheckResult,
)
from ..netdial import dial
from ..urlnorm import host_of, port_of
from . import FamilyError

MAX_BODY = 2 * 1024 * 1024
MAX_REDIRECTS = 10
REDIRECT_CODES = (301, 302, 303, 307, 308)


@dataclass(frozen=True)
class Cookie:
    name: str
    value: str
    domain: str        # Domain attribute, lowercased, no leading dot; "" = host-only
    path: str
    secure: bool
    http_only: bool
    same_site: str
    set_from: str      # host of the response that set it


@dataclass
class HttpResponse:
    url: str
    status: int
    headers: list[tuple[str, str]]
    body: bytes = b""

    def header(self, name: str) -> str | None:
        lowered = name.lower()
        for key, value in self.headers:
            if key.lower() == lowered:
                return value
        return None


@dataclass
class PageCapture:
    requested_url: str
    final_url: str = ""
    responses: list[HttpResponse] = field(default_factory=list)
    cookies: list[Cookie] = field(default_factory=list)
    error: str = ""

    @property
    def ok(self) -> bool:
        return not self.error and bool(self.responses)

    @property
    def final(self) -> HttpResponse | None:
        return self.responses[-1] if self.responses else None

    @property
    def over_https(self) -> bool:
        return self.final_url.startswith("https://")

    def body_text(self) -> str:
        final = self.final
        if final is None:
            return ""
        charset = "utf-8"
        ctype = final.header("content-type") or ""
        for part in ctype.split(";")[1:]:
            key, _, value = part.partition("=")
            if key.strip().lower() == "charset" and value.strip():
                charset = value.strip().strip('"')
        try:
            return final.body.decode(charset, "replace")
        except LookupError:
            return final.body.decode("utf-8", "replace")


def parse_set_cookie(value: str, from_host: str) -> Cookie | None:
    parts = value.split(";")
    first = parts[0].strip()
    if not first:
        return None
    if "=" in first:
        name, _, cookie_value = first.partition("=")
    else:
        name, cookie_value = first, ""
    name = name.strip()
    if not name:
        return None
    domain, path, same_site = "", "/", ""
    secure = http_only = False
    for part in parts[1:]:
        attr, _, attr_value = part.strip().partition("=")
        attr = attr.strip().lower()
        attr_value = attr_value.strip()
        if attr == "domain" and attr_value:
            domain = attr_value.lower().lstrip(".")
        elif attr == "path" and attr_value:
            path = attr_value
        elif attr == "secure":
            secure = True
        elif attr == "httponly":
            http_only = True
        elif attr == "samesite":
            same_site = attr_value.lower()
    return Cookie(name=name, value=cookie_value.strip(), domain=domain, path=path,
                  secure=secure, http_only=http_only, same_site=same_site,
                  set_from=from_host.lower())


class _DialConnection(http.client.HTTPConnection):
    def __init__(self, host: str, port: int, cfg: Config, timeout: float):
        super().__init__(host, port=port, timeout=timeout)
        self._cfg = cfg

    def connect(self):
        self.sock = dial(self.host, self.port, self._cfg, self.timeout)


class _DialTlsConnection(_DialConnection):
    def __init__(self, host: str, port: int, cfg: Config, timeout: float):
        super().__init__(host, port, cfg, timeout)
        ctx = ssl.SSLContext(ssl.PROTOCOL_TLS_CLIENT)
        ctx.check_hostname = False
        ctx.verify_mode = ssl.CERT_NONE
        with warnings.catch_warnings():
            # low floor is the point: observe content on badly configured hosts
            warnings.simplefilter("ignore", DeprecationWarning)
            ctx.minimum_version = ssl.TLSVersion.TLSv1
        ctx.set_ciphers("ALL:eNULL:@SECLEVEL=0")
        self._ctx = ctx

    def connect(self):
        raw = dial(self.host, self.port, self._cfg, self.timeout)
        self.sock = self._ctx.wrap_socket(raw, server_hostname=self.host)


def _request_once(url: str, cfg: Config, timeout: float, user_agent: str) -> HttpResponse:
    parts = urlsplit(url)
    host = host_of(url)
    port = port_of(url)
    conn_cls = _DialTlsConnection if parts.scheme == "https" else _DialConnection
    conn = conn_cls(host, port, cfg, timeout)
    try:
        target = parts.path or "/"
        if parts.query:
            target += "?" + parts.query
        conn.request("GET", target, headers={
            "User-Agent": user_agent,
            "Accept": "text/html,application/xhtml+xml,*/*",
            "Connection": "close",
        })
        resp = conn.getresponse()
        body = resp.read(MAX_BODY)
        return HttpResponse(url=url, status=resp.status,
                            headers=list(resp.getheaders()), body=body)
    finally:
        conn.close()


def fetch(url: str, cfg: Config, timeout: float = 10.0,
          max_redirects: int = MAX_REDIRECTS) -> PageCapture:
    """GET with redirect following; records every hop and every cookie."""
    capture = PageCapture(requested_url=url)
    agent = cfg.user_agent or USER_AGENT
    current = url
    try:
        for _ in range(max_redirects + 1):
            response = _request_once(current, cfg, timeout, agent)
            capture.responses.append(response)
            for key, value in response.headers:
                if key.lower() == "set-cookie":
                    cookie = parse_set_cookie(value, host_of(current))
                    if cookie is not None:
                        capture.cookies.append(cookie)
            if response.status in REDIRECT_CODES:
                location = response.header("location")
                if location:
                    target = urljoin(current, location)
                    if target.startswith(("http://", "https://")):
                        current = target
                        continue
            break
        capture.final_url = current
    except (OSError, ssl.SSLError, http.client.HTTPException, ValueError) as exc:
        capture.error = f"{type(exc).__name__}: {exc}"
        capture.final_url = current
    return capture


# -- header facts -----------------------------------------------------------

def parse_hsts(value: str) -> tuple[int | None, bool]:
    """Return (max_age, include_subdomains); max_age None when unusable."""
    max_age: int | None = None
    include_subdomains = False
    for directive in value.split(";"):
        name, _, raw = directive.strip().partition("=")
        name = name.strip().lower()
        raw = raw.strip().strip('"')
        if name == "max-age" and max_age is None:
            if raw.isdigit():
                max_age = int(raw)
        elif name == "includesubdomains":
            include_subdomains = True
    return max_age, include_subdomains


def _bool_result(key: str, value: bool, detail: str = "") -> CheckResult:
    return CheckResult(key=key, status=STATUS_SUCCESS, value=value, detail=detail)


def _na(key: str, detail: str) -> CheckResult:
    return CheckResult(key=key, status=STATUS_NOT_APPLICABLE, value=None, detail=detail)


def evaluate_security_headers(response: HttpResponse) -> list[CheckResult]:
    results: list[CheckResult] = []

    hsts = response.header("strict-transport-security")
    if hsts is None:
        results.append(_bool_result("web.hsts.present", False))
        results.append(_na("web.hsts.max_age", "no policy"))
        results.append(_na("web.hsts.include_subdomains", "no policy"))
    else:
        max_age, include_subdomains = parse_hsts(hsts)
        if max_age is None:
            results.append(CheckResult(key="web.hsts.present", status=STATUS_FAILURE,
                                       value=False, detail="header lacks a valid max-age"))
            results.append(_na("web.hsts.max_age", "unusable policy"))
            results.append(_na("web.hsts.include_subdomains", "unusable policy"))
        else:
            results.append(_bool_result("web.hsts.present", True))
            results.append(CheckResult(key="web.hsts.max_age", status=STATUS_SUCCESS,
                                       value=max_age))
            results.append(_bool_result("web.hsts.include_subdomains", include_subdomains))

    results.append(_bool_result(
        "web.csp.present",
        bool((response.header("content-security-policy") or "").strip())))
    results.append(_bool_result(
        "web.x_frame_options.present",
        bool((response.header("x-frame-options") or "").strip())))
    xcto = (response.header("x-content-type-options") or "").strip().lower()
    results.append(_bool_result("web.x_content_type_options.nosniff", xcto == "nosniff"))
    results.append(_bool_result(
        "web.referrer_policy.present",
        bool((response.header("referrer-policy") or "").strip())))
    return results


def parse_server_header(value: str) -> tuple[str, str]:
    token = value.strip().split()[0] if value.strip() else ""
    product, _, version = token.partition("/")
    return product, version


def version_key(version: str) -> tuple[int, ...]:
    parts = []
    for piece in version.split("."):
        digits = ""
        for ch in piece:
            if ch.isdigit():
                digits += ch
            else:
                break
        parts.append(int(digits) if digits else 0)
    return tuple(parts)


def _version_less(a: str, b: str) -> bool:
    ka, kb = version_key(a), version_key(b)
    width = max(len(ka), len(kb))
    ka += (0,) * (width - len(ka))
    kb += (0,) * (width - len(kb))
    return ka < kb


def assess_server_software(response: HttpResponse,
                           latest_versions: dict[str, str]) -> list[CheckResult]:
    value = response.header("server")
    if not value or not value.strip():
        return [_na("web.server.product", "no server banner"),
                _na("web.server.version", "no server banner"),
                _na("web.server.outdated", "no server banner")]
    product, version = parse_server_header(value)
    results = [CheckResult(key="web.server.product", status=STATUS_SUCCESS, value=product)]
    if not version:
        results.append(_na("web.server.version", "banner hides the version"))
        results.append(_na("web.server.outdated", "banner hides the version"))
        return results
    results.append(CheckResult(key="web.server.version", status=STATUS_SUCCESS,
                               value=version))
    latest = {k.lower(): v for k, v in latest_versions.items()}.get(product.lower())
    if latest is None:
        results.append(_na("web.server.outdated", f"no version table entry for {product}"))
    else:
        results.append(CheckResult(
            key="web.server.outdated", status=STATUS_SUCCESS,
            value=_version_less(version, latest),
            detail=f"latest known {latest}"))
    return results


def run_web_checks(url: str, cfg: Config,
                   latest_versions: dict[str, str] | None = None,
                   timeout: float = 10.0) -> tuple[list[CheckResult], PageCapture]:
    """Produce all web.* facts for a site and the capture the privacy
    family will inspect. Raises FamilyError when the site is unreachable
    over both schemes."""
    parts = urlsplit(url)
    host = host_of(url)
    path = parts.path or "/"
    if parts.query:
        path += "?" + parts.query

    https_url = f"https://{host}{path}"
    http_url = f"http://{host}{path}"
    if parts.scheme == "https":
        https_capture = fetch(url, cfg, timeout)
        http_capture = fetch(http_url, cfg, timeout)
    else:
        http_capture = fetch(url, cfg, timeout)
        https_capture = fetch(https_url, cfg, timeout)

    if not https_capture.ok and not http_capture.ok:
        raise FamilyError(
            "web", f"unreachable: https ({https_capture.error}); "
                   f"http ({http_capture.error})")

    results: list[CheckResult] = []
    if https_capture.ok:
        results.append(_bool_result("web.https.available", True))
    else:
        results.append(CheckResult(key="web.https.available", status=STATUS_SUCCESS,
                                   value=False, detail=https_capture.error))

    if not http_capture.ok:
        results.append(_na("web.https.redirect_enforced",
                           "cleartext port unreachable"))
    else:
        results.append(_bool_result("web.https.redirect_enforced",
                                    http_capture.over_https))

    primary = https_capture if https_capture.ok else http_capture
    final = primary.final
    assert final is not None
    results.extend(evaluate_security_headers(final))
    results.extend(assess_server_software(final, latest_versions or {}))
    return results, primary
