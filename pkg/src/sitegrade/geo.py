"""Address geolocation from CIDR range tables.

Tables are CSV files of ``network,country`` rows (one file for IPv4,
one for IPv6). Ranges must not overlap; lookup is a binary search over
the sorted start addresses. EU membership comes from a separate
one-column country list.
"""

from __future__ import annotations

import csv
import io
import ipaddress
from bisect import bisect_right
from dataclasses import dataclass
from importlib import resources as importlib_resources
from pathlib import Path


def _load_ranges(text: str) -> list[tuple[int, int, str]]:
    ranges = []
    for row in csv.reader(io.StringIO(text)):
        if not row or row[0].lstrip().startswith("#"):
            continue
        network = ipaddress.ip_network(row[0].strip(), strict=False)
        country = row[1].strip().upper()
        ranges.append((int(network.network_address),
                       int(network.broadcast_address), country))
    ranges.sort()
    for (_, prev_end, _), (next_start, _, _) in zip(ranges, ranges[1:]):
        if next_start <= prev_end:
            raise ValueError("overlapping ranges in geolocation table")
    return ranges


@dataclass
class GeoTable:
    v4: list[tuple[int, int, str]]
    v6: list[tuple[int, int, str]]

    @classmethod
    def from_text(cls, v4_text: str, v6_text: str = "") -> "GeoTable":
        return cls(v4=_load_ranges(v4_text), v6=_load_ranges(v6_text))

    @classmethod
    def load(cls, v4_path: str | Path | None = None,
             v6_path: str | Path | None = None) -> "GeoTable":
        data = importlib_resources.files("sitegrade") / "data"
        v4_text = (Path(v4_path).read_text(encoding="utf-8") if v4_path
                   else data.joinpath("geo_ipv4.csv").read_text(encoding="utf-8"))
        v6_text = (Path(v6_path).read_text(encoding="utf-8") if v6_path
                   else data.joinpath("geo_ipv6.csv").read_text(encoding="utf-8"))
        return cls.from_text(v4_text, v6_text)

    def country_for(self, address: str) -> str | None:
        try:
            ip = ipaddress.ip_address(address)
        except ValueError:
            return None
        table = self.v4 if ip.version == 4 else self.v6
        value = int(ip)
        idx = bisect_right(table, (value, 2 ** 128, "￿")) - 1
        if idx >= 0:
            start, end, country = table[idx]
            if start <= value <= end:
                return country
        return None


def load_eu_members(path: str | Path | None = None) -> frozenset[str]:
    if path is not None:
        text = Path(path).read_text(encoding="utf-8")
    else:
        text = (importlib_resources.files("sitegrade") / "data" /
                "eu_members.csv").read_text(encoding="utf-8")
    members = set()
    for line in text.splitlines():
        code = line.split(",")[0].strip().upper()
        if code and not code.startswith("#"):
            members.add(code)
    return frozenset(members)
