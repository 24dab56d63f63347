"""Public-suffix matching and registrable-domain (eTLD+1) derivation.

The rule file uses the standard one-rule-per-line format: ``//`` comments,
``*.`` wildcard rules and ``!`` exception rules. Rules may appear in
unicode; matching happens in punycode space so unicode and punycode hosts
resolve identically, while the caller's spelling is preserved in results.
"""

from __future__ import annotations

import importlib.resources
from pathlib import Path

_DEFAULT_RESOURCE = "public_suffix_list.dat"


def _to_ascii_label(label: str) -> str | None:
    """Punycode form of one hostname label, or None if unencodable."""
    if label.isascii():
        return label
    try:
        return label.encode("idna").decode("ascii")
    except UnicodeError:
        return None


def _ascii_labels(name: str) -> list[str] | None:
    out = []
    for label in name.split("."):
        ascii_label = _to_ascii_label(label)
        if ascii_label is None:
            return None
        out.append(ascii_label)
    return out


class PublicSuffixList:
    """Compiled rule set supporting suffix lookups on hostnames."""

    def __init__(self, rules: list[str]):
        self._exceptions: set[str] = set()
        self._wildcards: set[str] = set()
        self._plain: set[str] = set()
        for rule in rules:
            ascii_rule = ".".join(_ascii_labels(rule.lower()) or [rule.lower()])
            if ascii_rule.startswith("!"):
                self._exceptions.add(ascii_rule[1:])
            elif ascii_rule.startswith("*."):
                self._wildcards.add(ascii_rule[2:])
            else:
                self._plain.add(ascii_rule)

    @property
    def rule_count(self) -> int:
        return len(self._exceptions) + len(self._wildcards) + len(self._plain)

    @classmethod
    def parse(cls, text: str) -> "PublicSuffixList":
        rules = []
        for line in text.splitlines():
            line = line.strip()
            if not line or line.startswith("//"):
                continue
            rules.append(line.split()[0])
        return cls(rules)

    @classmethod
    def load(cls, path: str | Path | None = None) -> "PublicSuffixList":
        """Load rules from ``path``, or from the bundled snapshot."""
        if path is not None:
            text = Path(path).read_text(encoding="utf-8")
        else:
            text = (
                importlib.resources.files("sitegrade") / "data" / _DEFAULT_RESOURCE
            ).read_text(encoding="utf-8")
        return cls.parse(text)

    def _suffix_label_count(self, ascii_labels: list[str]) -> int:
        """Number of labels in the public suffix of the given name.

        Implements the standard algorithm: exception rules beat all others,
        otherwise the longest matching rule wins, and the prevailing rule
        is ``*`` when nothing matches.
        """
        n = len(ascii_labels)
        for i in range(n):
            candidate = ".".join(ascii_labels[i:])
            if candidate in self._exceptions:
                return n - i - 1
        best = 1  # prevailing "*" rule
        for i in range(n):
            tail = ascii_labels[i:]
            candidate = ".".join(tail)
            if candidate in self._plain:
                best = max(best, n - i)
            if len(tail) >= 2 and ".".join(tail[1:]) in self._wildcards:
                best = max(best, n - i)
        return best

    def registrable_domain_or_none(self, host: str) -> str | None:
        """eTLD+1 of ``host``, or None when the host is itself a public
        suffix (or malformed)."""
        host = host.strip().lower().rstrip(".")
        if not host:
            return None
        labels = host.split(".")
        if any(not label for label in labels):
            return None
        ascii_labels = _ascii_labels(host)
        if ascii_labels is None:
            return None
        suffix_len = self._suffix_label_count(ascii_labels)
        if len(labels) <= suffix_len:
            return None
        return ".".join(labels[-(suffix_len + 1):])

    def registrable_domain(self, host: str) -> str:
        """Total variant: falls back to the (lowercased) host itself when it
        equals a public suffix or is a single label."""
        normalized = host.strip().lower().rstrip(".")
        return self.registrable_domain_or_none(host) or normalized

    def is_public_suffix(self, host: str) -> bool:
        return bool(host) and self.registrable_domain_or_none(host) is None


_bundled: PublicSuffixList | None = None


def bundled_psl() -> PublicSuffixList:
    """Process-wide instance backed by the bundled snapshot."""
    global _bundled
    if _bundled is None:
        _bundled = PublicSuffixList.load()
    return _bundled
