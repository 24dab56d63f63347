"""File-backed persistence.

Layout under the data directory:

  lists/<id>.json      {"version": N, "list": {...}}   atomic replace
  scans/<id>.jsonl     one scan record per line        append only
  raw/<list>/<digest>/ retained page bodies etc.       pruned by age
  schemes/<id>.json    {"version": N, "scheme": {...}} atomic replace

Scan lines are idempotent: appending a record whose digest is already
present is a no-op, so replaying a crashed run cannot duplicate
history. Scores are never written anywhere; readers recompute them
from the stored facts with whatever scheme applies at read time.

Version counters implement optimistic concurrency: writers state the
version they read, and a mismatch raises VersionConflict instead of
overwriting someone else's update.
"""

from __future__ import annotations

import json
import os
import secrets
import threading
import time
import uuid
from pathlib import Path
from typing import Any, Iterator

from .listio import (
    record_from_dict,
    record_to_dict,
    scan_list_from_dict,
    scan_list_to_dict,
    scheme_from_dict,
    scheme_to_dict,
)
from .model import RatingScheme, ScanList, ScanRecord

BUILTIN_SCHEME_IDS = ("balanced", "security", "privacy")


class StoreError(Exception):
    pass


class ListNotFound(StoreError):
    pass


class SchemeNotFound(StoreError):
    pass


class VersionConflict(StoreError):
    def __init__(self, expected: int, actual: int):
        super().__init__(f"expected version {expected}, stored version is {actual}")
        self.expected = expected
        self.actual = actual


class PrivateListWithoutToken(StoreError):
    pass


def _atomic_write(path: Path, data: bytes) -> None:
    tmp = path.with_suffix(path.suffix + f".tmp{os.getpid()}")
    tmp.write_bytes(data)
    os.replace(tmp, path)


def _dump(doc: dict[str, Any]) -> bytes:
    return json.dumps(doc, ensure_ascii=False, sort_keys=True,
                      indent=2).encode("utf-8")


class Store:
    def __init__(self, data_dir: str | Path):
        self.root = Path(data_dir)
        for sub in ("lists", "scans", "raw", "schemes"):
            (self.root / sub).mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()
        self._digest_cache: dict[str, set[str]] = {}

    # -- lists --------------------------------------------------------------

    def _list_path(self, list_id: str) -> Path:
        if not list_id or "/" in list_id or list_id.startswith("."):
            raise ListNotFound(list_id)
        return self.root / "lists" / f"{list_id}.json"

    def create_list(self, scan_list: ScanList) -> ScanList:
        list_id = scan_list.id or uuid.uuid4().hex[:12]
        token = scan_list.access_token or secrets.token_urlsafe(16)
        stored = ScanList(
            id=list_id, name=scan_list.name, description=scan_list.description,
            private=scan_list.private, access_token=token,
            columns=scan_list.columns, sites=scan_list.sites,
            rescan_interval_s=scan_list.rescan_interval_s,
            default_scheme_id=scan_list.default_scheme_id)
        path = self._list_path(list_id)
        with self._lock:
            if path.exists():
                raise StoreError(f"list {list_id} already exists")
            _atomic_write(path, _dump({
                "version": 1,
                "list": scan_list_to_dict(stored, include_token=True)}))
        return stored

    def get_list(self, list_id: str) -> tuple[ScanList, int]:
        path = self._list_path(list_id)
        try:
            doc = json.loads(path.read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise ListNotFound(list_id) from None
        return scan_list_from_dict(doc["list"]), int(doc["version"])

    def save_list(self, scan_list: ScanList, expected_version: int) -> int:
        path = self._list_path(scan_list.id)
        with self._lock:
            try:
                doc = json.loads(path.read_text(encoding="utf-8"))
            except FileNotFoundError:
                raise ListNotFound(scan_list.id) from None
            actual = int(doc["version"])
            if actual != expected_version:
                raise VersionConflict(expected_version, actual)
            stored = scan_list_to_dict(scan_list, include_token=True)
            if not stored.get("access_token"):
                stored["access_token"] = doc["list"].get("access_token", "")
            _atomic_write(path, _dump({"version": actual + 1, "list": stored}))
            return actual + 1

    def delete_list(self, list_id: str) -> None:
        path = self._list_path(list_id)
        with self._lock:
            try:
                path.unlink()
            except FileNotFoundError:
                raise ListNotFound(list_id) from None
            scans = self._scan_path(list_id)
            if scans.exists():
                scans.unlink()
            self._digest_cache.pop(list_id, None)

    def list_lists(self) -> list[tuple[ScanList, int]]:
        out = []
        for path in sorted((self.root / "lists").glob("*.json")):
            doc = json.loads(path.read_text(encoding="utf-8"))
            out.append((scan_list_from_dict(doc["list"]), int(doc["version"])))
        return out

    @staticmethod
    def authorize(scan_list: ScanList, token: str | None) -> None:
        if scan_list.private and token != scan_list.access_token:
            raise PrivateListWithoutToken(scan_list.id)

    def stored_token(self, list_id: str) -> str:
        doc = json.loads(self._list_path(list_id).read_text(encoding="utf-8"))
        return doc["list"].get("access_token", "")

    # -- scan records -------------------------------------------------------

    def _scan_path(self, list_id: str) -> Path:
        if not list_id or "/" in list_id or list_id.startswith("."):
            raise ListNotFound(list_id)
        return self.root / "scans" / f"{list_id}.jsonl"

    def _known_digests(self, list_id: str) -> set[str]:
        cached = self._digest_cache.get(list_id)
        if cached is not None:
            return cached
        digests: set[str] = set()
        path = self._scan_path(list_id)
        if path.exists():
            with path.open("r", encoding="utf-8") as fh:
                for line in fh:
                    if line.strip():
                        digests.add(json.loads(line)["digest"])
        self._digest_cache[list_id] = digests
        return digests

    def append_scan(self, record: ScanRecord) -> bool:
        """Append one record; returns False when it was already stored."""
        digest = record.digest()
        with self._lock:
            known = self._known_digests(record.list_id)
            if digest in known:
                return False
            line = json.dumps({"digest": digest, "record": record_to_dict(record)},
                              ensure_ascii=False, sort_keys=True)
            with self._scan_path(record.list_id).open("a", encoding="utf-8") as fh:
                fh.write(line + "\n")
            known.add(digest)
            return True

    def iter_records(self, list_id: str) -> Iterator[ScanRecord]:
        path = self._scan_path(list_id)
        if not path.exists():
            return
        with path.open("r", encoding="utf-8") as fh:
            for line in fh:
                if line.strip():
                    yield record_from_dict(json.loads(line)["record"])

    def records_for(self, list_id: str, site_url: str | None = None) -> list[ScanRecord]:
        records = [r for r in self.iter_records(list_id)
                   if site_url is None or r.site_url == site_url]
        records.sort(key=lambda r: (r.started_at, r.site_url))
        return records

    def latest_records(self, list_id: str) -> dict[str, ScanRecord]:
        latest: dict[str, ScanRecord] = {}
        for record in self.iter_records(list_id):
            current = latest.get(record.site_url)
            if current is None or record.started_at >= current.started_at:
                latest[record.site_url] = record
        return latest

    # -- schemes ------------------------------------------------------------

    def _scheme_path(self, scheme_id: str) -> Path:
        if not scheme_id or "/" in scheme_id or scheme_id.startswith("."):
            raise SchemeNotFound(scheme_id)
        return self.root / "schemes" / f"{scheme_id}.json"

    def get_scheme(self, scheme_id: str) -> tuple[RatingScheme, int]:
        path = self._scheme_path(scheme_id)
        if path.exists():
            doc = json.loads(path.read_text(encoding="utf-8"))
            return scheme_from_dict(doc["scheme"]), int(doc["version"])
        bundled = self._bundled_scheme(scheme_id)
        if bundled is not None:
            return bundled, 1
        raise SchemeNotFound(scheme_id)

    @staticmethod
    def _bundled_scheme(scheme_id: str) -> RatingScheme | None:
        if scheme_id not in BUILTIN_SCHEME_IDS:
            return None
        from importlib import resources as importlib_resources
        text = (importlib_resources.files("sitegrade") / "data" / "schemes" /
                f"{scheme_id}.json").read_text(encoding="utf-8")
        return scheme_from_dict(json.loads(text))

    def save_scheme(self, scheme: RatingScheme,
                    expected_version: int | None = None) -> int:
        """Create or update a scheme. Bundled schemes count as existing
        at version 1, so editing one expects version 1 and stores 2."""
        path = self._scheme_path(scheme.id)
        with self._lock:
            if path.exists():
                actual = int(json.loads(path.read_text(encoding="utf-8"))["version"])
            elif scheme.id in BUILTIN_SCHEME_IDS:
                actual = 1
            else:
                actual = 0
            if expected_version is not None and actual != expected_version:
                raise VersionConflict(expected_version, actual)
            new_version = actual + 1
            stored = scheme_to_dict(scheme)
            stored["version"] = new_version
            _atomic_write(path, _dump({"version": new_version, "scheme": stored}))
            return new_version

    def list_schemes(self) -> list[tuple[RatingScheme, int]]:
        seen: dict[str, tuple[RatingScheme, int]] = {}
        for scheme_id in BUILTIN_SCHEME_IDS:
            scheme = self._bundled_scheme(scheme_id)
            if scheme is not None:
                seen[scheme_id] = (scheme, 1)
        for path in sorted((self.root / "schemes").glob("*.json")):
            doc = json.loads(path.read_text(encoding="utf-8"))
            scheme = scheme_from_dict(doc["scheme"])
            seen[scheme.id] = (scheme, int(doc["version"]))
        return [seen[k] for k in sorted(seen)]

    # -- raw artifacts ------------------------------------------------------

    def put_raw(self, list_id: str, digest: str, name: str, blob: bytes) -> str:
        safe = name.replace("/", "_")
        directory = self.root / "raw" / list_id / digest
        directory.mkdir(parents=True, exist_ok=True)
        (directory / safe).write_bytes(blob)
        return f"{list_id}/{digest}/{safe}"

    def get_raw(self, ref: str) -> bytes:
        parts = ref.split("/")
        if len(parts) != 3 or any(p.startswith(".") or not p for p in parts):
            raise StoreError(f"malformed raw ref {ref!r}")
        path = self.root / "raw" / parts[0] / parts[1] / parts[2]
        try:
            return path.read_bytes()
        except FileNotFoundError:
            raise StoreError(f"raw artifact {ref} not found") from None

    def prune_raw(self, retention_days: int, now: float | None = None) -> int:
        """Delete raw artifact files older than the retention window.
        Returns how many files were removed."""
        cutoff = (now if now is not None else time.time()) - retention_days * 86400
        removed = 0
        raw_root = self.root / "raw"
        for path in sorted(raw_root.rglob("*")):
            if path.is_file() and path.stat().st_mtime < cutoff:
                path.unlink()
                removed += 1
        for directory in sorted(raw_root.rglob("*"), reverse=True):
            if directory.is_dir():
                try:
                    directory.rmdir()
                except OSError:
                    pass
        return removed

    # -- export -------------------------------------------------------------

    def export_document(self, list_id: str, scheme: RatingScheme,
                        dataset_digests: dict[str, str] | None = None) -> dict[str, Any]:
        scan_list, version = self.get_list(list_id)
        records = self.records_for(list_id)
        return {
            "format_version": "1",
            "list": scan_list_to_dict(scan_list),
            "list_version": version,
            "scheme": scheme_to_dict(scheme),
            "records": [record_to_dict(r) for r in records],
            "dataset_digests": dict(dataset_digests or {}),
        }
