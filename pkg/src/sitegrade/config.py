"""Runtime configuration.

Sources, in increasing precedence: built-in defaults, a JSON config
file, SITEGRADE_* environment variables. Env values for nested keys use
double underscores (SITEGRADE_NETWORK__HOSTS is not supported; only the
flat scalar knobs are env-overridable).
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any

# env name -> (config attr, parser)
_ENV_KEYS = {
    "SITEGRADE_DATA_DIR": ("data_dir", str),
    "SITEGRADE_RATE_WINDOW_S": ("rate_window_s", int),
    "SITEGRADE_FAMILY_TIMEOUT_S": ("family_timeout_s", float),
    "SITEGRADE_SCAN_CAP_S": ("scan_cap_s", float),
    "SITEGRADE_POOL_SIZE": ("pool_size", int),
    "SITEGRADE_RESOLVER": ("resolver_address", str),
    "SITEGRADE_RETENTION_DAYS": ("retention_days", int),
    "SITEGRADE_LISTEN_HOST": ("listen_host", str),
    "SITEGRADE_LISTEN_PORT": ("listen_port", int),
    "SITEGRADE_UI_ORIGIN": ("ui_origin", str),
}


@dataclass(frozen=True)
class Config:
    data_dir: str = "./sitegrade-data"
    rate_window_s: int = 1800
    family_timeout_s: float = 60.0
    scan_cap_s: float = 300.0
    pool_size: int = 4
    retention_days: int = 90
    resolver_address: str = "127.0.0.53:53"
    enabled_checks: tuple[str, ...] = ("web", "tls", "mail", "dns", "privacy")
    listen_host: str = "127.0.0.1"
    listen_port: int = 8666
    ui_origin: str = ""
    hide_private_existence: bool = False
    user_agent: str = ""
    trust_store: str = ""          # empty -> bundled store
    blocklist_path: str = ""       # empty -> bundled dataset
    geo_path: str = ""
    cdn_path: str = ""
    server_versions_path: str = ""
    psl_path: str = ""
    # test dials: hostname -> ip, "host:port" -> port
    hosts: dict[str, str] = field(default_factory=dict)
    port_map: dict[str, int] = field(default_factory=dict)
    smtp_ports: tuple[int, ...] = (25,)

    def resolver_host_port(self) -> tuple[str, int]:
        host, _, port = self.resolver_address.rpartition(":")
        if not host:
            return self.resolver_address, 53
        return host, int(port)


def _from_mapping(doc: dict[str, Any]) -> Config:
    cfg = Config()
    known = {f for f in cfg.__dataclass_fields__}
    updates: dict[str, Any] = {}
    network = doc.get("network", {})
    if "hosts" in network:
        updates["hosts"] = dict(network["hosts"])
    if "port_map" in network:
        updates["port_map"] = {k: int(v) for k, v in network["port_map"].items()}
    for key, value in doc.items():
        if key == "network":
            continue
        if key not in known:
            raise ValueError(f"unknown config key {key!r}")
        if key in ("enabled_checks", "smtp_ports"):
            value = tuple(value)
        updates[key] = value
    return replace(cfg, **updates)


def load_config(path: str | Path | None = None,
                env: dict[str, str] | None = None) -> Config:
    """Load configuration, merging file and environment overrides."""
    doc: dict[str, Any] = {}
    if path is not None:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    cfg = _from_mapping(doc)

    env = os.environ if env is None else env
    updates: dict[str, Any] = {}
    for env_name, (attr, parse) in _ENV_KEYS.items():
        if env_name in env:
            updates[attr] = parse(env[env_name])
    if updates:
        cfg = replace(cfg, **updates)
    return cfg
