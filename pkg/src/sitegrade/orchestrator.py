"""Scan scheduling and execution.

One site scan fans out into the five check families. Families run
concurrently on their own threads; the web family deposits its page
capture into a promise the privacy family consumes, so privacy never
refetches. A family that raises or exceeds its time slice contributes
a single <family>.error fact instead of poisoning the record.

Rescans of the same registrable domain are rate limited through an
atomic admit gate with an injectable clock. Site-level concurrency is
bounded by a worker pool; family threads are short-lived daemons.
"""

from __future__ import annotations

import math
import threading
import time
from concurrent.futures import Future, ThreadPoolExecutor
from concurrent.futures import TimeoutError as _FutureTimeout
from dataclasses import dataclass, replace
from datetime import datetime, timezone
from typing import Callable

from .checks import FamilyError
from .checks.dns import run_dns_checks
from .checks.mail import run_mail_checks
from .checks.privacy import run_privacy_checks
from .checks.tls import run_tls_checks
from .checks.web import PageCapture, run_web_checks
from .config import Config
from .datasets import Datasets
from .model import STATUS_ERROR, CheckResult, ScanList, ScanRecord
from .resolver import Resolver
from .store import Store
from .urlnorm import host_of

FAMILIES = ("web", "tls", "mail", "dns", "privacy")


class RateLimited(Exception):
    def __init__(self, domain: str, retry_after_s: int):
        super().__init__(f"{domain}: retry in {retry_after_s}s")
        self.domain = domain
        self.retry_after_s = retry_after_s


class RateLimiter:
    """Per-domain gate: one admission per window. admit() both checks
    and claims the slot, so concurrent callers cannot both pass."""

    def __init__(self, window_s: int, clock: Callable[[], float] = time.monotonic):
        self.window_s = window_s
        self.clock = clock
        self._last: dict[str, float] = {}
        self._lock = threading.Lock()

    def admit(self, domain: str) -> tuple[bool, int]:
        """Returns (allowed, retry_after_s). A full window must have
        elapsed; exactly window seconds is enough."""
        with self._lock:
            now = self.clock()
            last = self._last.get(domain)
            if last is not None:
                elapsed = now - last
                if elapsed < self.window_s:
                    return False, max(1, math.ceil(self.window_s - elapsed))
            self._last[domain] = now
            return True, 0

    def peek(self, domain: str) -> int:
        """Seconds until the next admission, without claiming anything."""
        with self._lock:
            last = self._last.get(domain)
            if last is None:
                return 0
            remaining = self.window_s - (self.clock() - last)
            return 0 if remaining <= 0 else max(1, math.ceil(remaining))


class _FamilyThread(threading.Thread):
    def __init__(self, family: str, fn: Callable[[], list[CheckResult]]):
        super().__init__(name=f"check-{family}", daemon=True)
        self.family = family
        self.fn = fn
        self.value: list[CheckResult] | None = None
        self.error: BaseException | None = None

    def run(self):
        try:
            self.value = self.fn()
        except BaseException as exc:
            self.error = exc


def _utc_stamp(ts: float) -> str:
    return datetime.fromtimestamp(ts, tz=timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


@dataclass
class SiteOutcome:
    url: str
    record: ScanRecord | None = None
    denied_retry_after: int | None = None
    error: str = ""


class Scanner:
    def __init__(self, cfg: Config, datasets: Datasets, store: Store | None = None,
                 *, monotonic: Callable[[], float] = time.monotonic,
                 wall_clock: Callable[[], float] = time.time):
        self.cfg = cfg
        self.ds = datasets
        self.store = store
        self.monotonic = monotonic
        self.wall_clock = wall_clock
        self.rate_limiter = RateLimiter(cfg.rate_window_s, clock=monotonic)
        self.resolver = Resolver(cfg.resolver_host_port())
        self._pool = ThreadPoolExecutor(max_workers=cfg.pool_size,
                                        thread_name_prefix="scan")
        self._outstanding: set[Future] = set()
        self._outstanding_lock = threading.Lock()

    def close(self) -> None:
        self._pool.shutdown(wait=True)

    # -- single site --------------------------------------------------------

    def _family_runners(self, url: str,
                        capture_promise: "Future[PageCapture | None]"):
        cfg, ds = self.cfg, self.ds
        timeout = cfg.family_timeout_s

        def web() -> list[CheckResult]:
            try:
                results, capture = run_web_checks(url, cfg, ds.server_versions,
                                                  timeout=min(10.0, timeout))
                capture_promise.set_result(capture)
                return results
            except BaseException:
                if not capture_promise.done():
                    capture_promise.set_result(None)
                raise

        def tls() -> list[CheckResult]:
            return run_tls_checks(url, cfg, ds.trust_store_path,
                                  timeout=min(5.0, timeout))

        def mail() -> list[CheckResult]:
            return run_mail_checks(url, cfg, self.resolver, ds.psl,
                                   timeout=min(5.0, timeout))

        def dns() -> list[CheckResult]:
            return run_dns_checks(url, cfg, self.resolver, ds.psl)

        def privacy() -> list[CheckResult]:
            capture = capture_promise.result(timeout=timeout)
            return run_privacy_checks(url, capture, cfg, self.resolver, ds.psl,
                                      ds.blocklist, ds.geo, ds.eu_members,
                                      ds.cdn_signatures)

        return {"web": web, "tls": tls, "mail": mail, "dns": dns, "privacy": privacy}

    def scan_site(self, url: str, list_id: str = "",
                  enforce_rate_limit: bool = True) -> ScanRecord:
        """Run every enabled family against one site. Raises RateLimited
        when the registrable domain was scanned within the window."""
        domain = self.ds.psl.registrable_domain(host_of(url))
        if enforce_rate_limit:
            allowed, retry_after = self.rate_limiter.admit(domain)
            if not allowed:
                raise RateLimited(domain, retry_after)

        started_mono = self.monotonic()
        started_at = _utc_stamp(self.wall_clock())
        capture_promise: Future[PageCapture | None] = Future()
        runners = self._family_runners(url, capture_promise)
        enabled = [f for f in FAMILIES if f in self.cfg.enabled_checks]
        if "web" not in enabled and not capture_promise.done():
            capture_promise.set_result(None)

        threads = [_FamilyThread(family, runners[family]) for family in enabled]
        for thread in threads:
            thread.start()

        results: dict[str, CheckResult] = {}
        deadline = started_mono + self.cfg.scan_cap_s
        for thread in threads:
            budget = min(self.cfg.family_timeout_s,
                         max(0.0, deadline - self.monotonic()))
            thread.join(timeout=budget)
            error_key = f"{thread.family}.error"
            if thread.is_alive():
                results[error_key] = CheckResult(
                    key=error_key, status=STATUS_ERROR, value=None,
                    detail="family timed out")
            elif thread.error is not None:
                detail = (thread.error.detail if isinstance(thread.error, FamilyError)
                          else f"{type(thread.error).__name__}: {thread.error}")
                results[error_key] = CheckResult(
                    key=error_key, status=STATUS_ERROR, value=None, detail=detail)
            else:
                for result in thread.value or []:
                    results[result.key] = result

        record = ScanRecord(
            site_url=url, list_id=list_id, started_at=started_at,
            finished_at=_utc_stamp(self.wall_clock()), results=results)

        # ad-hoc scans (no list) are returned inline, never persisted
        if self.store is not None and list_id:
            raw_refs = self._store_raw(record, capture_promise)
            if raw_refs:
                record = replace(record, raw_refs=raw_refs)
            self.store.append_scan(record)
        return record

    def _store_raw(self, record: ScanRecord,
                   capture_promise: "Future[PageCapture | None]") -> dict[str, str]:
        if not capture_promise.done():
            return {}
        capture = capture_promise.result(timeout=0)
        final = capture.final if capture is not None else None
        if capture is None or final is None:
            return {}
        assert self.store is not None
        refs = {}
        body_ref = self.store.put_raw(record.list_id or "_adhoc", record.digest(),
                                      "page.html", final.body)
        refs["page_body"] = body_ref
        header_text = "\n".join(f"{k}: {v}" for k, v in final.headers)
        refs["page_headers"] = self.store.put_raw(
            record.list_id or "_adhoc", record.digest(), "headers.txt",
            header_text.encode("utf-8"))
        return refs

    # -- lists and background work ------------------------------------------

    def submit_site(self, url: str, list_id: str = "") -> "Future[ScanRecord]":
        future = self._pool.submit(self.scan_site, url, list_id)
        with self._outstanding_lock:
            self._outstanding.add(future)
        future.add_done_callback(self._forget)
        return future

    def _forget(self, future: Future) -> None:
        with self._outstanding_lock:
            self._outstanding.discard(future)

    def wait_idle(self, timeout: float | None = None) -> None:
        deadline = None if timeout is None else self.monotonic() + timeout
        while True:
            with self._outstanding_lock:
                pending = list(self._outstanding)
            if not pending:
                return
            remaining = None if deadline is None else deadline - self.monotonic()
            if remaining is not None and remaining <= 0:
                raise TimeoutError("scans still running")
            try:
                pending[0].exception(timeout=remaining)
            except _FutureTimeout:
                # distinct from builtin TimeoutError before 3.11; loop so the
                # deadline check above raises the documented type
                continue

    def scan_list(self, scan_list: ScanList) -> list[SiteOutcome]:
        futures: list[tuple[str, Future | None, int | None]] = []
        for site in scan_list.sites:
            allowed, retry_after = self.rate_limiter.admit(site.registrable_domain)
            if not allowed:
                futures.append((site.url, None, retry_after))
                continue
            future = self._pool.submit(self.scan_site, site.url, scan_list.id, False)
            with self._outstanding_lock:
                self._outstanding.add(future)
            future.add_done_callback(self._forget)
            futures.append((site.url, future, None))

        outcomes = []
        for url, future, retry_after in futures:
            if future is None:
                outcomes.append(SiteOutcome(url=url, denied_retry_after=retry_after))
                continue
            try:
                outcomes.append(SiteOutcome(url=url, record=future.result()))
            except Exception as exc:
                outcomes.append(SiteOutcome(url=url, error=str(exc)))
        return outcomes


class RecurringScheduler(threading.Thread):
    """Rescans lists whose newest record is older than their interval."""

    def __init__(self, scanner: Scanner, store: Store, poll_interval_s: float = 5.0):
        super().__init__(name="rescan-scheduler", daemon=True)
        self.scanner = scanner
        self.store = store
        self.poll_interval_s = poll_interval_s
        self._stop = threading.Event()

    def stop(self) -> None:
        self._stop.set()

    def check_once(self, now: float | None = None) -> list[str]:
        """One scheduling pass; returns ids of lists that were triggered."""
        now = self.scanner.wall_clock() if now is None else now
        triggered = []
        for scan_list, _version in self.store.list_lists():
            if scan_list.rescan_interval_s <= 0 or not scan_list.sites:
                continue
            newest = 0.0
            for record in self.store.iter_records(scan_list.id):
                ts = datetime.strptime(record.started_at, "%Y-%m-%dT%H:%M:%SZ")
                newest = max(newest, ts.replace(tzinfo=timezone.utc).timestamp())
            if now - newest >= scan_list.rescan_interval_s:
                self.scanner.scan_list(scan_list)
                triggered.append(scan_list.id)
        return triggered

    def run(self) -> None:
        while not self._stop.wait(self.poll_interval_s):
            try:
                self.check_once()
            except Exception:
                continue
