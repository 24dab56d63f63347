"""Extraction of embedded resource references from HTML.

Stage one of tracker detection: walk the markup once and collect every
URL the page would cause a client to fetch. The walk is intentionally
mechanical so it stays predictable on broken markup:

  tags      script img link iframe audio video source embed
  attrs     src href srcset (first occurrence of each attribute wins)
  srcset    split on commas, first whitespace token of each candidate
  base      references resolve against the final page URL; <base> is ignored
  filtered  anything that does not resolve to http or https

Output preserves document order with duplicates removed, keeping the
first occurrence.
"""

from __future__ import annotations

from html.parser import HTMLParser
from urllib.parse import urljoin, urlsplit

RESOURCE_TAGS = frozenset(
    {"script", "img", "link", "iframe", "audio", "video", "source", "embed"})
URL_ATTRS = ("src", "href", "srcset")


def _srcset_urls(value: str) -> list[str]:
    urls = []
    for candidate in value.split(","):
        tokens = candidate.split()
        if tokens:
            urls.append(tokens[0])
    return urls


def _resolve(base_url: str, ref: str) -> str | None:
    ref = ref.strip()
    if not ref:
        return None
    try:
        absolute = urljoin(base_url, ref)
        scheme = urlsplit(absolute).scheme.lower()
        host = urlsplit(absolute).hostname
    except ValueError:
        return None
    if scheme not in ("http", "https") or not host:
        return None
    return absolute


class _Extractor(HTMLParser):
    def __init__(self, base_url: str):
        super().__init__()
        self.base_url = base_url
        self.found: list[str] = []
        self._seen: set[str] = set()

    def _add(self, ref: str) -> None:
        resolved = _resolve(self.base_url, ref)
        if resolved is not None and resolved not in self._seen:
            self._seen.add(resolved)
            self.found.append(resolved)

    def handle_starttag(self, tag: str, attrs: list[tuple[str, str | None]]) -> None:
        if tag not in RESOURCE_TAGS:
            return
        first: dict[str, str] = {}
        for name, value in attrs:
            if name in URL_ATTRS and name not in first and value is not None:
                first[name] = value
        for name in URL_ATTRS:
            if name not in first:
                continue
            if name == "srcset":
                for url in _srcset_urls(first[name]):
                    self._add(url)
            else:
                self._add(first[name])


def extract_resources(html_text: str, base_url: str) -> list[str]:
    extractor = _Extractor(base_url)
    extractor.feed(html_text)
    extractor.close()
    return extractor.found
