"""Tracker blocklist: parsing and host matching.

Stage two of tracker detection. The list format is line oriented:

  ! anything                     comment
  adnet.test                     block this domain and its subdomains
  ||adnet.test^                  same rule in filter-list notation
  adnet.test  #category=advertising   optional category annotation

Lines that fit neither form are skipped and counted, never fatal.
A rule matches a host when the rule domain equals the host or is a
suffix of it at a label boundary. When several rules match, the one
appearing first in the file wins; categories outside the known set
degrade to "unknown".
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from importlib import resources as importlib_resources
from pathlib import Path

from .catalog import TRACKER_CATEGORIES

_DOMAIN_RE = re.compile(r"^[a-z0-9_-]+(\.[a-z0-9_-]+)+$")


@dataclass(frozen=True)
class BlockRule:
    domain: str
    category: str
    line_no: int


@dataclass
class Blocklist:
    rules: list[BlockRule]
    skipped: int = 0

    def __post_init__(self):
        # first occurrence per domain carries the smallest line number,
        # which makes dict lookup equivalent to a file-order scan
        self._by_domain: dict[str, BlockRule] = {}
        for rule in self.rules:
            self._by_domain.setdefault(rule.domain, rule)

    def match(self, host: str) -> BlockRule | None:
        host = host.lower().rstrip(".")
        labels = host.split(".")
        best: BlockRule | None = None
        for i in range(len(labels)):
            rule = self._by_domain.get(".".join(labels[i:]))
            if rule is not None and (best is None or rule.line_no < best.line_no):
                best = rule
        return best


def _parse_line(line: str) -> tuple[str, str] | None:
    """Return (domain, category) or None for unusable lines."""
    category = "unknown"
    body, marker, annotation = line.partition("#")
    if marker:
        annotation = annotation.strip()
        if not annotation.startswith("category="):
            return None
        declared = annotation[len("category="):].strip().lower()
        category = declared if declared in TRACKER_CATEGORIES else "unknown"
    body = body.strip().lower()
    if body.startswith("||"):
        if not body.endswith("^"):
            return None
        body = body[2:-1]
    if not _DOMAIN_RE.match(body):
        return None
    return body, category


def parse_blocklist(text: str) -> Blocklist:
    rules: list[BlockRule] = []
    skipped = 0
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("!"):
            continue
        parsed = _parse_line(line)
        if parsed is None:
            skipped += 1
            continue
        domain, category = parsed
        rules.append(BlockRule(domain=domain, category=category, line_no=line_no))
    return Blocklist(rules=rules, skipped=skipped)


def load_blocklist(path: str | Path | None = None) -> Blocklist:
    if path is not None:
        return parse_blocklist(Path(path).read_text(encoding="utf-8"))
    text = (importlib_resources.files("sitegrade") / "data" /
            "blocklist.txt").read_text(encoding="utf-8")
    return parse_blocklist(text)
