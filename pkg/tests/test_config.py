"""Configuration loading precedence and validation."""

import json

import pytest

from sitegrade.config import Config, load_config


def test_defaults():
    cfg = Config()
    assert cfg.rate_window_s == 1800
    assert cfg.enabled_checks == ("web", "tls", "mail", "dns", "privacy")
    assert cfg.hosts == {} and cfg.port_map == {}


def test_file_overrides(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({
        "rate_window_s": 60,
        "enabled_checks": ["web", "tls"],
        "smtp_ports": [2525],
        "network": {"hosts": {"good.test": "127.0.0.1"},
                    "port_map": {"good.test:443": "8443"}},
    }))
    cfg = load_config(path, env={})
    assert cfg.rate_window_s == 60
    assert cfg.enabled_checks == ("web", "tls")
    assert cfg.smtp_ports == (2525,)
    assert cfg.hosts == {"good.test": "127.0.0.1"}
    assert cfg.port_map == {"good.test:443": 8443}  # values coerced to int


def test_env_beats_file(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"rate_window_s": 60, "listen_port": 9000}))
    cfg = load_config(path, env={"SITEGRADE_RATE_WINDOW_S": "7200",
                                 "SITEGRADE_RESOLVER": "192.0.2.53:5353"})
    assert cfg.rate_window_s == 7200
    assert cfg.listen_port == 9000
    assert cfg.resolver_address == "192.0.2.53:5353"


def test_unknown_keys_rejected(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"rate_limit": 1}))
    with pytest.raises(ValueError, match="rate_limit"):
        load_config(path, env={})


def test_resolver_host_port_parsing():
    assert Config(resolver_address="127.0.0.53:53").resolver_host_port() == ("127.0.0.53", 53)
    assert Config(resolver_address="192.0.2.1:5300").resolver_host_port() == ("192.0.2.1", 5300)
    assert Config(resolver_address="127.0.0.1").resolver_host_port() == ("127.0.0.1", 53)
