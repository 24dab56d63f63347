"""Loopback environment that exercises every check family end to end.

Two complete sites run on ephemeral ports:

  good.test   TLS 1.2/1.3 only, chain anchored in a generated root,
              every security header, an enforced https redirect, no
              third-party resources, an EU address
  weak.test   TLS 1.0 through 1.2 with a NULL cipher enabled, a
              self-signed certificate under a mismatched name, no
              security headers, tracker resources, loose cookies, a
              CDN response header, a non-EU address

plus SMTP exchangers with and without STARTTLS and a UDP resolver stub
serving signed, unsigned, and deliberately broken zones. TCP traffic is
steered to loopback through the config dials while DNS answers carry
documentation-range addresses, so geolocation sees stable countries
without any real connectivity.

The EXPECTED_*_FACTS tables are the reference outcome of scanning each
site; integration tests compare whole scan records against them.
"""

from __future__ import annotations

import socket
import ssl
import threading
import warnings
from dataclasses import dataclass, field
from datetime import datetime, timezone
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

from cryptography import x509
from cryptography.hazmat.primitives import hashes, serialization
from cryptography.hazmat.primitives.asymmetric import rsa
from cryptography.x509.oid import ExtendedKeyUsageOID, NameOID

from sitegrade import dnswire
from sitegrade.config import Config
from sitegrade.datasets import Datasets

from dnsstub import DnsStub, DnsZone

GOOD_BANNER = "nginx/1.24.0"
WEAK_BANNER = "Apache/2.4.1"

# certificate lifetimes are pinned so the not_after facts stay stable
CA_NOT_AFTER = datetime(2031, 1, 1, tzinfo=timezone.utc)
GOOD_NOT_AFTER = datetime(2030, 1, 1, tzinfo=timezone.utc)
WEAK_NOT_AFTER = datetime(2029, 12, 31, tzinfo=timezone.utc)
NOT_BEFORE = datetime(2024, 1, 1, tzinfo=timezone.utc)


# -- certificates -----------------------------------------------------------


@dataclass
class CertBundle:
    ca_path: str
    good_cert: str
    good_key: str
    weak_cert: str
    weak_key: str


def _rsa_key() -> rsa.RSAPrivateKey:
    return rsa.generate_private_key(public_exponent=65537, key_size=2048)


def _write_pem(path: Path, data: bytes) -> str:
    path.write_bytes(data)
    return str(path)


def _key_pem(key: rsa.RSAPrivateKey) -> bytes:
    return key.private_bytes(
        serialization.Encoding.PEM,
        serialization.PrivateFormat.PKCS8,
        serialization.NoEncryption(),
    )


def _leaf(subject_cn: str, san: list[str], issuer: x509.Name,
          signing_key: rsa.RSAPrivateKey, public_key, not_after: datetime) -> x509.Certificate:
    name = x509.Name([x509.NameAttribute(NameOID.COMMON_NAME, subject_cn)])
    return (
        x509.CertificateBuilder()
        .subject_name(name)
        .issuer_name(issuer)
        .public_key(public_key)
        .serial_number(x509.random_serial_number())
        .not_valid_before(NOT_BEFORE)
        .not_valid_after(not_after)
        .add_extension(x509.BasicConstraints(ca=False, path_length=None), critical=True)
        .add_extension(x509.SubjectAlternativeName([x509.DNSName(n) for n in san]),
                       critical=False)
        .add_extension(x509.ExtendedKeyUsage([ExtendedKeyUsageOID.SERVER_AUTH]),
                       critical=False)
        .sign(signing_key, hashes.SHA256())
    )


def make_certs(directory: Path) -> CertBundle:
    directory.mkdir(parents=True, exist_ok=True)
    ca_key = _rsa_key()
    ca_name = x509.Name([x509.NameAttribute(NameOID.COMMON_NAME, "loopback test root")])
    ca_cert = (
        x509.CertificateBuilder()
        .subject_name(ca_name)
        .issuer_name(ca_name)
        .public_key(ca_key.public_key())
        .serial_number(x509.random_serial_number())
        .not_valid_before(NOT_BEFORE)
        .not_valid_after(CA_NOT_AFTER)
        .add_extension(x509.BasicConstraints(ca=True, path_length=None), critical=True)
        .add_extension(x509.KeyUsage(digital_signature=False, content_commitment=False,
                                     key_encipherment=False, data_encipherment=False,
                                     key_agreement=False, key_cert_sign=True,
                                     crl_sign=True, encipher_only=False,
                                     decipher_only=False), critical=True)
        .sign(ca_key, hashes.SHA256())
    )

    good_key = _rsa_key()
    good_cert = _leaf("good.test", ["good.test", "mx.good.test"], ca_name,
                      ca_key, good_key.public_key(), GOOD_NOT_AFTER)

    weak_key = _rsa_key()
    weak_name = x509.Name([x509.NameAttribute(NameOID.COMMON_NAME, "selfsigned.test")])
    weak_cert = (
        x509.CertificateBuilder()
        .subject_name(weak_name)
        .issuer_name(weak_name)
        .public_key(weak_key.public_key())
        .serial_number(x509.random_serial_number())
        .not_valid_before(NOT_BEFORE)
        .not_valid_after(WEAK_NOT_AFTER)
        .add_extension(x509.BasicConstraints(ca=False, path_length=None), critical=True)
        .add_extension(x509.SubjectAlternativeName([x509.DNSName("selfsigned.test")]),
                       critical=False)
        .sign(weak_key, hashes.SHA256())
    )

    return CertBundle(
        ca_path=_write_pem(directory / "ca.pem",
                           ca_cert.public_bytes(serialization.Encoding.PEM)),
        good_cert=_write_pem(directory / "good.pem",
                             good_cert.public_bytes(serialization.Encoding.PEM)),
        good_key=_write_pem(directory / "good.key", _key_pem(good_key)),
        weak_cert=_write_pem(directory / "weak.pem",
                             weak_cert.public_bytes(serialization.Encoding.PEM)),
        weak_key=_write_pem(directory / "weak.key", _key_pem(weak_key)),
    )


# -- web servers ------------------------------------------------------------

GOOD_BODY = b"""<!doctype html>
<html><head><title>good.test</title>
<link rel="stylesheet" href="/static/site.css">
</head>
<body>
<img src="/static/logo.png" alt="logo">
<p>first-party content only</p>
<script src="/static/app.js"></script>
</body></html>
"""

WEAK_BODY = b"""<!doctype html>
<html><head><title>weak.test</title>
<script src="https://tags.adnet.test/ad.js"></script>
</head>
<body>
<img src="/banner.png">
<img src="https://pixel.trackhub.test/collect?puid=1" width="1" height="1">
<iframe src="https://widgets.socnet.test/like.html"></iframe>
<script src="https://cdn.fprint.test/fp.min.js"></script>
<img src="https://beacon.mysterytracker.test/b.gif">
<img src="https://static.partner.test/logo.png">
</body></html>
"""

GOOD_HEADERS = [
    ("Strict-Transport-Security", "max-age=63072000; includeSubDomains"),
    ("Content-Security-Policy", "default-src 'self'"),
    ("X-Frame-Options", "DENY"),
    ("X-Content-Type-Options", "nosniff"),
    ("Referrer-Policy", "no-referrer"),
    ("Set-Cookie", "session=f1xture; Path=/; Secure; HttpOnly; SameSite=Lax"),
]

WEAK_HEADERS = [
    ("X-Fixture-CDN", "edge77"),
    ("Set-Cookie", "wsid=w1; Path=/"),
    ("Set-Cookie", "adtrack=x9; Domain=adnet.test; Path=/"),
]


def _handler(banner: str, body: bytes, extra_headers: list[tuple[str, str]],
             redirect_to: str | None = None) -> type[BaseHTTPRequestHandler]:
    class Handler(BaseHTTPRequestHandler):
        protocol_version = "HTTP/1.1"

        def version_string(self) -> str:
            return banner

        def log_message(self, fmt, *args):
            pass

        def do_GET(self):
            if redirect_to is not None:
                self.send_response(301)
                self.send_header("Location", redirect_to)
                self.send_header("Content-Length", "0")
                self.end_headers()
                return
            self.send_response(200)
            self.send_header("Content-Type", "text/html; charset=utf-8")
            self.send_header("Content-Length", str(len(body)))
            for name, value in extra_headers:
                self.send_header(name, value)
            self.end_headers()
            self.wfile.write(body)

    return Handler


class _SilentServer(ThreadingHTTPServer):
    daemon_threads = True

    def handle_error(self, request, client_address):
        # aborted TLS probes are routine here, not worth a traceback
        pass


def serve_http(handler: type[BaseHTTPRequestHandler],
               tls: ssl.SSLContext | None = None) -> tuple[ThreadingHTTPServer, int]:
    server = _SilentServer(("127.0.0.1", 0), handler)
    port = server.server_address[1]
    if tls is not None:
        server.socket = tls.wrap_socket(server.socket, server_side=True)
    threading.Thread(target=server.serve_forever, daemon=True).start()
    return server, port


def _server_ctx(cert: str, key: str, *, floor: ssl.TLSVersion,
                ceiling: ssl.TLSVersion | None = None,
                ciphers: str = "") -> ssl.SSLContext:
    ctx = ssl.SSLContext(ssl.PROTOCOL_TLS_SERVER)
    ctx.load_cert_chain(cert, key)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DeprecationWarning)
        ctx.minimum_version = floor
        if ceiling is not None:
            ctx.maximum_version = ceiling
    if ciphers:
        ctx.set_ciphers(ciphers)
    return ctx


# -- SMTP -------------------------------------------------------------------


class SmtpServer(threading.Thread):
    """Capability-only SMTP endpoint. With a TLS context it upgrades the
    connection for real after STARTTLS, which is enough for version
    probes to read a genuine ServerHello; probes then hang up mid
    handshake and that is tolerated."""

    def __init__(self, hostname: str, tls: ssl.SSLContext | None):
        super().__init__(name=f"smtp-{hostname}", daemon=True)
        self.hostname = hostname
        self.tls = tls
        self._listener = socket.create_server(("127.0.0.1", 0))
        self.port = self._listener.getsockname()[1]
        self.start()

    def close(self) -> None:
        try:
            self._listener.close()
        except OSError:
            pass

    def run(self) -> None:
        while True:
            try:
                conn, _ = self._listener.accept()
            except OSError:
                return
            threading.Thread(target=self._serve, args=(conn,), daemon=True).start()

    def _serve(self, conn: socket.socket) -> None:
        try:
            conn.settimeout(10.0)
            reader = conn.makefile("rb")
            conn.sendall(b"220 " + self.hostname.encode("ascii") + b" ESMTP ready\r\n")
            while True:
                line = reader.readline(2048)
                if not line:
                    return
                command = line.decode("utf-8", "replace").strip().upper()
                if command.startswith("EHLO") or command.startswith("HELO"):
                    caps = [b"250-" + self.hostname.encode("ascii")]
                    if self.tls is not None:
                        caps += [b"250-8BITMIME", b"250 STARTTLS"]
                    else:
                        caps += [b"250 8BITMIME"]
                    conn.sendall(b"\r\n".join(caps) + b"\r\n")
                elif command == "STARTTLS":
                    if self.tls is None:
                        conn.sendall(b"454 TLS not available\r\n")
                        continue
                    conn.sendall(b"220 go ahead\r\n")
                    upgraded = self.tls.wrap_socket(conn, server_side=True)
                    upgraded.close()
                    return
                elif command == "QUIT":
                    conn.sendall(b"221 bye\r\n")
                    return
                else:
                    conn.sendall(b"502 command not implemented\r\n")
        except (OSError, ssl.SSLError, ValueError):
            pass
        finally:
            try:
                conn.close()
            except OSError:
                pass


# -- DNS --------------------------------------------------------------------


def fixture_zones() -> dict[str, DnsZone]:
    return {
        "good.test": DnsZone("secure", {
            ("good.test", dnswire.TYPE_A): [dnswire.rdata_a("192.0.2.10")],
            ("good.test", dnswire.TYPE_MX): [dnswire.rdata_mx(10, "mx.good.test")],
            ("good.test", dnswire.TYPE_TXT): [dnswire.rdata_txt("v=spf1 mx -all")],
            ("_dmarc.good.test", dnswire.TYPE_TXT): [
                dnswire.rdata_txt("v=DMARC1; p=reject")],
            ("mx.good.test", dnswire.TYPE_A): [dnswire.rdata_a("192.0.2.25")],
        }),
        "weak.test": DnsZone("unsigned", {
            ("weak.test", dnswire.TYPE_A): [dnswire.rdata_a("198.51.100.7")],
            ("weak.test", dnswire.TYPE_MX): [dnswire.rdata_mx(20, "mx.weak.test")],
            ("mx.weak.test", dnswire.TYPE_A): [dnswire.rdata_a("198.51.100.25")],
        }),
        "broken.test": DnsZone("bogus", {
            ("broken.test", dnswire.TYPE_A): [dnswire.rdata_a("203.0.113.66")],
        }),
    }


# -- assembly ---------------------------------------------------------------


@dataclass
class FixtureEnv:
    cfg: Config
    datasets: Datasets
    certs: CertBundle
    dns: DnsStub
    http_servers: list[ThreadingHTTPServer] = field(default_factory=list)
    smtp_servers: list[SmtpServer] = field(default_factory=list)

    def close(self) -> None:
        for server in self.http_servers:
            server.shutdown()
            server.server_close()
        for smtp in self.smtp_servers:
            smtp.close()
        self.dns.close()


def launch_env(tmp: Path) -> FixtureEnv:
    certs = make_certs(tmp / "pki")
    dns = DnsStub(fixture_zones())

    good_tls = _server_ctx(certs.good_cert, certs.good_key,
                           floor=ssl.TLSVersion.TLSv1_2)
    weak_tls = _server_ctx(certs.weak_cert, certs.weak_key,
                           floor=ssl.TLSVersion.TLSv1,
                           ceiling=ssl.TLSVersion.TLSv1_2,
                           ciphers="ALL:eNULL:@SECLEVEL=0")
    smtp_tls = _server_ctx(certs.good_cert, certs.good_key,
                           floor=ssl.TLSVersion.TLSv1_2)

    good_https, p_good_https = serve_http(
        _handler(GOOD_BANNER, GOOD_BODY, GOOD_HEADERS), tls=good_tls)
    good_http, p_good_http = serve_http(
        _handler(GOOD_BANNER, b"", [], redirect_to="https://good.test/"))
    weak_https, p_weak_https = serve_http(
        _handler(WEAK_BANNER, WEAK_BODY, WEAK_HEADERS), tls=weak_tls)
    weak_http, p_weak_http = serve_http(
        _handler(WEAK_BANNER, WEAK_BODY, WEAK_HEADERS))

    smtp_good = SmtpServer("mx.good.test", smtp_tls)
    smtp_weak = SmtpServer("mx.weak.test", None)

    cfg = Config(
        data_dir=str(tmp / "data"),
        resolver_address=f"127.0.0.1:{dns.address[1]}",
        trust_store=certs.ca_path,
        hosts={name: "127.0.0.1" for name in
               ("good.test", "weak.test", "mx.good.test", "mx.weak.test")},
        port_map={
            "good.test:443": p_good_https,
            "good.test:80": p_good_http,
            "weak.test:443": p_weak_https,
            "weak.test:80": p_weak_http,
            "mx.good.test:25": smtp_good.port,
            "mx.weak.test:25": smtp_weak.port,
        },
    )
    return FixtureEnv(cfg=cfg, datasets=Datasets.load(cfg), certs=certs, dns=dns,
                      http_servers=[good_https, good_http, weak_https, weak_http],
                      smtp_servers=[smtp_good, smtp_weak])


# -- reference outcomes -----------------------------------------------------

EXPECTED_GOOD_FACTS = {
    "web.https.available": ("success", True),
    "web.https.redirect_enforced": ("success", True),
    "web.hsts.present": ("success", True),
    "web.hsts.max_age": ("success", 63072000),
    "web.hsts.include_subdomains": ("success", True),
    "web.csp.present": ("success", True),
    "web.x_frame_options.present": ("success", True),
    "web.x_content_type_options.nosniff": ("success", True),
    "web.referrer_policy.present": ("success", True),
    "web.server.product": ("success", "nginx"),
    "web.server.version": ("success", "1.24.0"),
    "web.server.outdated": ("success", False),
    "tls.versions.offered": ("success", ["TLS1.2", "TLS1.3"]),
    "tls.legacy_versions.offered": ("success", False),
    "tls.weak_ciphers.accepted": ("success", []),
    "tls.cert.valid": ("success", True),
    "tls.cert.hostname_match": ("success", True),
    "tls.cert.not_after": ("success", "2030-01-01"),
    "mail.mx.present": ("success", True),
    "mail.mx.hosts": ("success", ["mx.good.test"]),
    "mail.starttls.offered": ("success", True),
    "mail.starttls.tls_versions": ("success", ["TLS1.2", "TLS1.3"]),
    "mail.spf.present": ("success", True),
    "mail.dmarc.present": ("success", True),
    "dns.dnssec.status": ("success", "secure"),
    "dns.dnssec.evaluated_name": ("success", "good.test"),
    "dns.addresses": ("success", ["192.0.2.10"]),
    "privacy.third_party.count": ("success", 0),
    "privacy.third_party.domains": ("success", []),
    "privacy.trackers.count": ("success", 0),
    "privacy.trackers.domains": ("success", []),
    "privacy.trackers.advertising": ("success", 0),
    "privacy.trackers.analytics": ("success", 0),
    "privacy.trackers.social": ("success", 0),
    "privacy.trackers.fingerprinting": ("success", 0),
    "privacy.trackers.unknown": ("success", 0),
    "privacy.cookies.first_party": ("success", 1),
    "privacy.cookies.third_party": ("success", 0),
    "privacy.cookies.missing_secure": ("success", 0),
    "privacy.cookies.missing_httponly": ("success", 0),
    "privacy.cdn.detected": ("success", False),
    "privacy.cdn.provider": ("not_applicable", None),
    "privacy.geo.countries": ("success", ["DE"]),
    "privacy.geo.hosted_in_eu": ("success", True),
}

EXPECTED_WEAK_FACTS = {
    "web.https.available": ("success", True),
    "web.https.redirect_enforced": ("success", False),
    "web.hsts.present": ("success", False),
    "web.hsts.max_age": ("not_applicable", None),
    "web.hsts.include_subdomains": ("not_applicable", None),
    "web.csp.present": ("success", False),
    "web.x_frame_options.present": ("success", False),
    "web.x_content_type_options.nosniff": ("success", False),
    "web.referrer_policy.present": ("success", False),
    "web.server.product": ("success", "Apache"),
    "web.server.version": ("success", "2.4.1"),
    "web.server.outdated": ("success", True),
    "tls.versions.offered": ("success", ["TLS1.0", "TLS1.1", "TLS1.2"]),
    "tls.legacy_versions.offered": ("success", True),
    "tls.weak_ciphers.accepted": ("success", ["NULL"]),
    "tls.cert.valid": ("success", False),
    "tls.cert.hostname_match": ("success", False),
    "tls.cert.not_after": ("success", "2029-12-31"),
    "mail.mx.present": ("success", True),
    "mail.mx.hosts": ("success", ["mx.weak.test"]),
    "mail.starttls.offered": ("success", False),
    "mail.starttls.tls_versions": ("not_applicable", None),
    "mail.spf.present": ("success", False),
    "mail.dmarc.present": ("success", False),
    "dns.dnssec.status": ("success", "insecure"),
    "dns.dnssec.evaluated_name": ("success", "weak.test"),
    "dns.addresses": ("success", ["198.51.100.7"]),
    "privacy.third_party.count": ("success", 6),
    "privacy.third_party.domains": ("success", [
        "adnet.test", "fprint.test", "mysterytracker.test",
        "partner.test", "socnet.test", "trackhub.test"]),
    "privacy.trackers.count": ("success", 5),
    "privacy.trackers.domains": ("success", [
        "adnet.test", "fprint.test", "mysterytracker.test",
        "socnet.test", "trackhub.test"]),
    "privacy.trackers.advertising": ("success", 1),
    "privacy.trackers.analytics": ("success", 1),
    "privacy.trackers.social": ("success", 1),
    "privacy.trackers.fingerprinting": ("success", 1),
    "privacy.trackers.unknown": ("success", 1),
    "privacy.cookies.first_party": ("success", 1),
    "privacy.cookies.third_party": ("success", 1),
    "privacy.cookies.missing_secure": ("success", 2),
    "privacy.cookies.missing_httponly": ("success", 2),
    "privacy.cdn.detected": ("success", True),
    "privacy.cdn.provider": ("success", "fixturecdn"),
    "privacy.geo.countries": ("success", ["US"]),
    "privacy.geo.hosted_in_eu": ("success", False),
}
