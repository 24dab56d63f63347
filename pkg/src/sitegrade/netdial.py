"""Socket dialing with config-driven host and port indirection.

Test harnesses point fixture hostnames at loopback addresses and remap
well-known ports to ephemeral ones; production configs leave both maps
empty and this reduces to create_connection.
"""

from __future__ import annotations

import socket

from .config import Config


def resolve_host(host: str, cfg: Config) -> str:
    return cfg.hosts.get(host, host)


def resolve_port(host: str, port: int, cfg: Config) -> int:
    return cfg.port_map.get(f"{host}:{port}", port)


def dial(host: str, port: int, cfg: Config, timeout: float = 5.0) -> socket.socket:
    return socket.create_connection(
        (resolve_host(host, cfg), resolve_port(host, port, cfg)), timeout=timeout)
