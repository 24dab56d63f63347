"""URL normalization for scan-list entries.

Every URL entering the system passes through :func:`normalize_url` exactly
once, so the rest of the code can assume lowercase scheme/host, no default
ports, and no fragments.
"""

from __future__ import annotations

import re
from urllib.parse import urlsplit, urlunsplit

DEFAULT_PORTS = {"http": 80, "https": 443}

# unicode hosts stay unicode here; punycode happens at the SNI layer
_HOST_LABEL = re.compile(r"^(?!-)[\w-]{1,63}(?<!-)$")


class MalformedUrl(ValueError):
    """Raised when a raw URL has no usable http(s) host."""


def normalize_url(raw: str) -> str:
    """Return the canonical form of ``raw``.

    Rules: scheme defaults to https:// when missing, scheme and host are
    lowercased, default ports are dropped, the fragment is stripped, and an
    empty path becomes "/". Idempotent for any URL it accepts.
    """
    if not raw or not raw.strip():
        raise MalformedUrl("empty URL")
    candidate = raw.strip()
    if "://" not in candidate:
        candidate = "https://" + candidate
    parts = urlsplit(candidate)
    scheme = parts.scheme.lower()
    if scheme not in ("http", "https"):
        raise MalformedUrl(f"unsupported scheme {parts.scheme!r}")
    host = (parts.hostname or "").strip(".").lower()
    if not host:
        raise MalformedUrl("no host")
    if len(host) > 253 or not all(_HOST_LABEL.match(label)
                                  for label in host.split(".")):
        raise MalformedUrl(f"invalid host {host!r}")
    try:
        port = parts.port
    except ValueError as exc:
        raise MalformedUrl(str(exc)) from None
    netloc = host
    if port is not None and port != DEFAULT_PORTS[scheme]:
        netloc = f"{host}:{port}"
    path = parts.path or "/"
    return urlunsplit((scheme, netloc, path, parts.query, ""))


def host_of(url: str) -> str:
    """Hostname of an already-normalized URL."""
    return urlsplit(url).hostname or ""


def port_of(url: str) -> int:
    """Effective TCP port of an already-normalized URL."""
    parts = urlsplit(url)
    return parts.port or DEFAULT_PORTS[parts.scheme]
