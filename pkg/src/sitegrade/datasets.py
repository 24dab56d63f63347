"""Bundled reference data and its loading order.

Every dataset resolves in the same order: an explicit path from the
config, else a refreshed copy under <data_dir>/datasets/, else the
snapshot shipped inside the package. Loaded datasets carry their
content digests so exports can state exactly which data produced them.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
from dataclasses import dataclass, field
from importlib import resources as importlib_resources
from pathlib import Path

from .blocklist import Blocklist, parse_blocklist
from .checks.privacy import CdnSignature
from .config import Config
from .geo import GeoTable, load_eu_members
from .psl import PublicSuffixList

DATASET_FILES = {
    "psl": "public_suffix_list.dat",
    "blocklist": "blocklist.txt",
    "geo_ipv4": "geo_ipv4.csv",
    "geo_ipv6": "geo_ipv6.csv",
    "eu_members": "eu_members.csv",
    "cdn_signatures": "cdn_signatures.csv",
    "server_versions": "server_versions.csv",
    "guidance": "guidance.json",
    "trust_store": "trust_store.pem",
}

_CONFIG_PATH_KEYS = {
    "psl": "psl_path",
    "blocklist": "blocklist_path",
    "geo_ipv4": "geo_path",
    "trust_store": "trust_store",
}


def _bundled_bytes(filename: str) -> bytes:
    return (importlib_resources.files("sitegrade") / "data" / filename).read_bytes()


def dataset_bytes(name: str, cfg: Config) -> tuple[bytes, str]:
    """Return (content, source description) for a dataset."""
    filename = DATASET_FILES[name]
    config_key = _CONFIG_PATH_KEYS.get(name)
    if config_key:
        override = getattr(cfg, config_key)
        if override:
            return Path(override).read_bytes(), override
    refreshed = Path(cfg.data_dir) / "datasets" / filename
    if refreshed.is_file():
        return refreshed.read_bytes(), str(refreshed)
    return _bundled_bytes(filename), f"bundled:{filename}"


def refresh_target(name: str, cfg: Config) -> Path:
    return Path(cfg.data_dir) / "datasets" / DATASET_FILES[name]


def parse_cdn_signatures(text: str) -> list[CdnSignature]:
    signatures = []
    for row in csv.reader(io.StringIO(text)):
        if not row or row[0].lstrip().startswith("#"):
            continue
        row = [cell.strip() for cell in row] + [""] * (4 - len(row))
        signatures.append(CdnSignature(provider=row[0], header_name=row[1],
                                       header_contains=row[2], cname_suffix=row[3]))
    return signatures


def parse_server_versions(text: str) -> dict[str, str]:
    table = {}
    for row in csv.reader(io.StringIO(text)):
        if len(row) >= 2 and not row[0].lstrip().startswith("#"):
            table[row[0].strip()] = row[1].strip()
    return table


@dataclass
class Datasets:
    psl: PublicSuffixList
    blocklist: Blocklist
    geo: GeoTable
    eu_members: frozenset[str]
    cdn_signatures: list[CdnSignature]
    server_versions: dict[str, str]
    guidance: dict[str, dict[str, str]]
    trust_store_path: str
    digests: dict[str, str] = field(default_factory=dict)
    sources: dict[str, str] = field(default_factory=dict)

    @classmethod
    def load(cls, cfg: Config) -> "Datasets":
        content: dict[str, bytes] = {}
        sources: dict[str, str] = {}
        for name in DATASET_FILES:
            content[name], sources[name] = dataset_bytes(name, cfg)
        digests = {name: hashlib.sha256(blob).hexdigest()[:16]
                   for name, blob in content.items()}

        # the verifying handshake wants a real file path for the trust store
        if cfg.trust_store:
            trust_path = cfg.trust_store
        else:
            refreshed = refresh_target("trust_store", cfg)
            if refreshed.is_file():
                trust_path = str(refreshed)
            else:
                cache = Path(cfg.data_dir) / "cache"
                cache.mkdir(parents=True, exist_ok=True)
                trust_path = str(cache / "trust_store.pem")
                existing = Path(trust_path)
                if not existing.is_file() or existing.read_bytes() != content["trust_store"]:
                    existing.write_bytes(content["trust_store"])

        geo_v4 = content["geo_ipv4"].decode("utf-8")
        geo_v6 = content["geo_ipv6"].decode("utf-8")
        return cls(
            psl=PublicSuffixList.parse(content["psl"].decode("utf-8")),
            blocklist=parse_blocklist(content["blocklist"].decode("utf-8")),
            geo=GeoTable.from_text(geo_v4, geo_v6),
            eu_members=load_eu_members_from_text(content["eu_members"].decode("utf-8")),
            cdn_signatures=parse_cdn_signatures(
                content["cdn_signatures"].decode("utf-8")),
            server_versions=parse_server_versions(
                content["server_versions"].decode("utf-8")),
            guidance=json.loads(content["guidance"].decode("utf-8")),
            trust_store_path=trust_path,
            digests=digests,
            sources=sources,
        )

    def guidance_for(self, check_key: str) -> dict[str, str]:
        entry = self.guidance.get(check_key, {})
        return {"threat": entry.get("threat", ""),
                "remediation": entry.get("remediation", ""),
                "self_defense": entry.get("self_defense", "")}


def load_eu_members_from_text(text: str) -> frozenset[str]:
    members = set()
    for line in text.splitlines():
        code = line.split(",")[0].strip().upper()
        if code and not code.startswith("#"):
            members.add(code)
    return frozenset(members)
