"""Command line entry point.

Exit codes: 0 success, 1 usage, 2 input or validation problem,
3 network-fatal. A scan that completes with failing or erroring checks
still exits 0; the facts are the product, not the verdict.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace
from pathlib import Path
from typing import Any

from .catalog import FAMILIES
from .config import Config, load_config
from .datasets import DATASET_FILES, Datasets, refresh_target
from .export import canonical_json, parts_from_export, ranking_document
from .listio import (
    SchemeError,
    record_to_dict,
    scan_list_from_csv,
    scan_list_from_dict,
    scan_list_to_dict,
    scheme_from_dict,
    scheme_to_dict,
)
from .model import validate_scan_list
from .orchestrator import RateLimited, Scanner
from .psl import bundled_psl
from .rating import rate
from .urlnorm import MalformedUrl, normalize_url

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INPUT = 2
EXIT_NETWORK = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


class CliFailure(Exception):
    def __init__(self, exit_code: int, message: str):
        super().__init__(message)
        self.exit_code = exit_code


def _emit_error(message: str, as_json: bool, code: str = "error") -> None:
    if as_json:
        print(json.dumps({"error": {"code": code, "message": message}},
                         ensure_ascii=False))
    else:
        print(f"error: {message}", file=sys.stderr)


def _load_cfg(args) -> Config:
    path = getattr(args, "config", None) or os.environ.get("SITEGRADE_CONFIG")
    try:
        return load_config(path)
    except (OSError, ValueError) as exc:
        raise CliFailure(EXIT_INPUT, f"config: {exc}") from exc


def _use_color() -> bool:
    return sys.stdout.isatty() and not os.environ.get("NO_COLOR")


_LIGHT_PAINT = {"green": "\x1b[32m", "yellow": "\x1b[33m", "red": "\x1b[31m"}


def _paint(light: str) -> str:
    if _use_color() and light in _LIGHT_PAINT:
        return f"{_LIGHT_PAINT[light]}{light}\x1b[0m"
    return light


# -- scan -------------------------------------------------------------------

def _cmd_scan(args) -> int:
    as_json = args.json
    try:
        url = normalize_url(args.url)
    except MalformedUrl as exc:
        _emit_error(f"malformed URL: {exc}", as_json, "malformed_url")
        return EXIT_INPUT

    cfg = _load_cfg(args)
    if args.checks:
        families = tuple(f.strip() for f in args.checks.split(",") if f.strip())
        unknown = [f for f in families if f not in FAMILIES]
        if unknown:
            _emit_error(f"unknown check families: {', '.join(unknown)}",
                        as_json, "unknown_family")
            return EXIT_INPUT
        cfg = replace(cfg, enabled_checks=families)

    datasets = Datasets.load(cfg)
    scanner = Scanner(cfg, datasets)
    try:
        record = scanner.scan_site(url)
    except RateLimited as exc:
        _emit_error(f"rate limited: retry in {exc.retry_after_s}s",
                    as_json, "rate_limited")
        return EXIT_INPUT
    except Exception as exc:
        _emit_error(f"scan failed: {exc}", as_json, "scan_error")
        return EXIT_INPUT
    finally:
        scanner.close()

    if as_json:
        sys.stdout.buffer.write(canonical_json(
            {"url": url, "record": record_to_dict(record)}))
        sys.stdout.buffer.write(b"\n")
    else:
        print(f"{url}  ({record.started_at})")
        width = max((len(k) for k in record.results), default=10)
        for key in sorted(record.results):
            result = record.results[key]
            value = "" if result.value is None else json.dumps(
                result.value, ensure_ascii=False)
            line = f"  {key:<{width}}  {result.status:<14} {value}"
            if result.detail:
                line += f"  ({result.detail})"
            print(line)
    return EXIT_OK


# -- scan-list --------------------------------------------------------------

def _read_list_file(path: Path):
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise CliFailure(EXIT_INPUT, f"cannot read {path}: {exc}") from exc
    try:
        if path.suffix.lower() == ".json":
            return scan_list_from_dict(json.loads(text), psl=bundled_psl(),
                                       list_id="cli-import")
        return scan_list_from_csv(text, name=path.stem, psl=bundled_psl())
    except MalformedUrl as exc:
        raise CliFailure(EXIT_INPUT, f"malformed URL in list: {exc}") from exc
    except (ValueError, KeyError, TypeError) as exc:
        raise CliFailure(EXIT_INPUT, f"cannot parse {path}: {exc}") from exc


def _read_scheme_file(path: str | None):
    if path is None:
        from .store import Store
        scheme = Store._bundled_scheme("balanced")
        return scheme, 1
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
        scheme = scheme_from_dict(doc)
    except OSError as exc:
        raise CliFailure(EXIT_INPUT, f"cannot read scheme: {exc}") from exc
    except (SchemeError, KeyError, ValueError, TypeError) as exc:
        raise CliFailure(EXIT_INPUT, f"invalid scheme: {exc}") from exc
    return scheme, int(doc.get("version", 1))


def _cmd_scan_list(args) -> int:
    path = Path(args.file)
    scan_list = _read_list_file(path)
    if not scan_list.id:
        scan_list = replace(scan_list, id="cli-import")
    violations = validate_scan_list(scan_list)
    if violations:
        for violation in violations:
            where = "" if violation.site_index is None else \
                f" (site {violation.site_index})"
            print(f"violation: {violation.code}{where}: {violation.message}",
                  file=sys.stderr)
        return EXIT_INPUT

    scheme, scheme_version = _read_scheme_file(args.scheme)
    cfg = _load_cfg(args)
    datasets = Datasets.load(cfg)
    scanner = Scanner(cfg, datasets)
    records = []
    try:
        total = len(scan_list.sites)
        for i, site in enumerate(scan_list.sites, start=1):
            print(f"[{i}/{total}] scanning {site.url} ...",
                  file=sys.stderr, flush=True)
            allowed, retry_after = scanner.rate_limiter.admit(
                site.registrable_domain)
            if not allowed:
                print(f"[{i}/{total}]   denied, retry in {retry_after}s",
                      file=sys.stderr)
                continue
            record = scanner.scan_site(site.url, list_id=scan_list.id,
                                       enforce_rate_limit=False)
            records.append(record)
            rating = rate(scheme, record)
            score = "n/a" if rating.score_float is None \
                else f"{rating.score_float:.3f}"
            print(f"[{i}/{total}]   grade {rating.grade}, score {score}, "
                  f"light {_paint(rating.light)}", file=sys.stderr)
    finally:
        scanner.close()

    scheme_doc = scheme_to_dict(scheme)
    scheme_doc["version"] = scheme_version
    export_doc: dict[str, Any] = {
        "format_version": "1",
        "list": scan_list_to_dict(scan_list),
        "list_version": 1,
        "scheme": scheme_doc,
        "records": [record_to_dict(r) for r in records],
        "dataset_digests": datasets.digests,
    }

    if args.out:
        from .report import render_report
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "export.json").write_bytes(canonical_json(export_doc))
        paths = render_report(export_doc, scheme, scheme_version, out_dir)
        for name in ("ranking_json", "ranking_csv", "ranking_png", "criteria_png"):
            print(f"wrote {paths[name]}", file=sys.stderr)
        print(f"wrote {out_dir / 'export.json'}", file=sys.stderr)
    else:
        sys.stdout.buffer.write(canonical_json(export_doc))
        sys.stdout.buffer.write(b"\n")
    return EXIT_OK


# -- rank -------------------------------------------------------------------

def _cmd_rank(args) -> int:
    try:
        doc = json.loads(Path(args.export).read_text(encoding="utf-8"))
    except OSError as exc:
        raise CliFailure(EXIT_INPUT, f"cannot read export: {exc}") from exc
    except ValueError as exc:
        raise CliFailure(EXIT_INPUT, f"export is not JSON: {exc}") from exc
    scheme, scheme_version = _read_scheme_file(args.scheme)
    try:
        scan_list, latest = parts_from_export(doc)
    except (KeyError, TypeError, ValueError, MalformedUrl) as exc:
        raise CliFailure(EXIT_INPUT, f"unusable export document: {exc}") from exc
    ranking = ranking_document(scan_list, latest, scheme, scheme_version,
                               doc.get("dataset_digests", {}))
    payload = canonical_json(ranking)
    if args.out:
        Path(args.out).write_bytes(payload)
    else:
        sys.stdout.buffer.write(payload)
    return EXIT_OK


# -- serve ------------------------------------------------------------------

def _cmd_serve(args) -> int:
    cfg = _load_cfg(args)
    datasets = Datasets.load(cfg)
    from .api import create_app
    from .orchestrator import RecurringScheduler
    from .store import Store

    store = Store(cfg.data_dir)
    scanner = Scanner(cfg, datasets, store)
    app = create_app(cfg, datasets, store, scanner)
    scheduler = RecurringScheduler(scanner, store)
    scheduler.start()
    try:
        import uvicorn
        uvicorn.run(app, host=cfg.listen_host, port=cfg.listen_port,
                    log_level="warning")
    except OSError as exc:
        print(f"error: cannot listen on {cfg.listen_host}:{cfg.listen_port}: {exc}",
              file=sys.stderr)
        return EXIT_NETWORK
    finally:
        scheduler.stop()
        scanner.close()
    return EXIT_OK


# -- datasets ---------------------------------------------------------------

def _fetch_source(source: str) -> bytes:
    if source.startswith(("http://", "https://")):
        import urllib.error
        import urllib.request
        try:
            with urllib.request.urlopen(source, timeout=30) as resp:
                return resp.read()
        except (urllib.error.URLError, OSError) as exc:
            raise CliFailure(EXIT_NETWORK, f"cannot fetch {source}: {exc}") from exc
    try:
        return Path(source).read_bytes()
    except OSError as exc:
        raise CliFailure(EXIT_INPUT, f"cannot read {source}: {exc}") from exc


def _cmd_datasets_refresh(args) -> int:
    cfg = _load_cfg(args)
    updates: list[tuple[str, str]] = []
    if args.psl:
        updates.append(("psl", args.psl))
    if args.blocklist:
        updates.append(("blocklist", args.blocklist))
    for name, source in updates:
        blob = _fetch_source(source)
        if name == "psl":
            from .psl import PublicSuffixList
            parsed = PublicSuffixList.parse(blob.decode("utf-8", "replace"))
            if not parsed.rule_count:
                raise CliFailure(EXIT_INPUT, "fetched suffix data has no rules")
        if name == "blocklist":
            from .blocklist import parse_blocklist
            parsed_bl = parse_blocklist(blob.decode("utf-8", "replace"))
            if not parsed_bl.rules:
                raise CliFailure(EXIT_INPUT, "fetched blocklist has no rules")
        target = refresh_target(name, cfg)
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_bytes(blob)
        print(f"refreshed {name} -> {target}", file=sys.stderr)

    datasets = Datasets.load(cfg)
    for name in DATASET_FILES:
        print(f"{name}  {datasets.digests[name]}  ({datasets.sources[name]})")
    return EXIT_OK


# -- wiring -----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sitegrade",
                     description="website security and privacy benchmarking")
    parser.add_argument("--config", help="path to a JSON config file")
    sub = parser.add_subparsers(dest="command", required=True)

    p_scan = sub.add_parser("scan", help="scan one site and print its facts")
    p_scan.add_argument("url")
    p_scan.add_argument("--checks", help="comma separated families "
                                         f"({','.join(FAMILIES)})")
    output = p_scan.add_mutually_exclusive_group()
    output.add_argument("--json", action="store_true")
    output.add_argument("--table", action="store_true")
    p_scan.set_defaults(func=_cmd_scan)

    p_list = sub.add_parser("scan-list",
                            help="import a list file, scan it, export results")
    p_list.add_argument("file", help="CSV (url column first) or JSON list document")
    p_list.add_argument("--scheme", help="scheme JSON file (default: balanced)")
    p_list.add_argument("--out", help="directory for export, ranking, and figures")
    p_list.set_defaults(func=_cmd_scan_list)

    p_rank = sub.add_parser("rank", help="re-rank an export offline")
    p_rank.add_argument("export", help="export.json produced by scan-list or the API")
    p_rank.add_argument("--scheme", help="scheme JSON file (default: balanced)")
    p_rank.add_argument("--out", help="write ranking JSON here instead of stdout")
    p_rank.set_defaults(func=_cmd_rank)

    p_serve = sub.add_parser("serve", help="run the HTTP API")
    p_serve.set_defaults(func=_cmd_serve)

    p_data = sub.add_parser("datasets", help="manage bundled datasets")
    data_sub = p_data.add_subparsers(dest="datasets_command", required=True)
    p_refresh = data_sub.add_parser("refresh",
                                    help="replace datasets, print digests")
    p_refresh.add_argument("--psl", help="public suffix data URL or file")
    p_refresh.add_argument("--blocklist", help="blocklist file or URL")
    p_refresh.set_defaults(func=_cmd_datasets_refresh)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except KeyboardInterrupt:
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
