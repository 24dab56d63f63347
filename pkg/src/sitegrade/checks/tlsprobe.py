"""TLS capability probing with hand-built handshake messages.

The ssl module can only negotiate what the local OpenSSL build ships,
so offering retired cipher suites (NULL, EXPORT, DES, 3DES, RC4) or
SSL 3.0 requires writing ClientHello bytes directly and reading the
ServerHello or alert that comes back. No probe ever finishes a weak
handshake; it stops after the server reveals its selection.

Certificate facts still use the ssl module: one permissive handshake to
fetch the leaf, one verifying handshake against the trust store.

Budget per endpoint: 5 version probes + 5 weak-class probes + 2
certificate handshakes = 12 connections at most.
"""

from __future__ import annotations

import os
import ssl
import struct
import warnings
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Callable

from cryptography import x509

Channel = Callable[[], "object"]  # returns a connected socket ready for TLS bytes

VERSION_NAMES = ("SSL3", "TLS1.0", "TLS1.1", "TLS1.2", "TLS1.3")
LEGACY_VERSIONS = ("SSL3", "TLS1.0", "TLS1.1")
VERSION_WIRE = {"SSL3": 0x0300, "TLS1.0": 0x0301, "TLS1.1": 0x0302,
                "TLS1.2": 0x0303, "TLS1.3": 0x0304}
WIRE_VERSION = {v: k for k, v in VERSION_WIRE.items()}

TLS13_SUITES = (0x1301, 0x1302, 0x1303)
# broad pre-1.3 offer so any reasonable server finds a match
GENERIC_SUITES = (
    0xC02B, 0xC02F, 0xC02C, 0xC030, 0xC009, 0xC013, 0xC00A, 0xC014,
    0xC027, 0xC028, 0x009E, 0x009F, 0x0033, 0x0039, 0x003C, 0x003D,
    0x009C, 0x009D, 0x002F, 0x0035, 0x000A,
)
# SSL3 predates extensions, so that probe offers only RSA/DHE era suites
SSL3_SUITES = (0x0035, 0x002F, 0x0039, 0x0033, 0x0016, 0x000A, 0x0005, 0x0004)

WEAK_SUITES = {
    "NULL": (0x0001, 0x0002, 0x003B, 0xC006, 0xC010),
    "EXPORT": (0x0003, 0x0006, 0x0008, 0x0011, 0x0014),
    "DES": (0x0009, 0x0012, 0x0015),
    "3DES": (0x000A, 0x0013, 0x0016, 0xC008, 0xC012),
    "RC4": (0x0004, 0x0005, 0xC007, 0xC011),
}
WEAK_CLASS_ORDER = ("NULL", "EXPORT", "DES", "3DES", "RC4")

SIGNATURE_ALGORITHMS = (0x0804, 0x0805, 0x0401, 0x0501, 0x0403, 0x0503, 0x0201, 0x0203)
GROUPS = (0x001D, 0x0017, 0x0018)  # x25519, secp256r1, secp384r1

ALERT_NAMES = {40: "handshake_failure", 70: "protocol_version",
               47: "illegal_parameter", 71: "insufficient_security"}


def _ext(ext_type: int, data: bytes) -> bytes:
    return struct.pack("!HH", ext_type, len(data)) + data


def build_client_hello(server_name: str, version: str, suites: tuple[int, ...]) -> bytes:
    wire = VERSION_WIRE[version]
    legacy = min(wire, 0x0303)  # 1.3 hellos carry 1.2 in the legacy field
    body = bytearray()
    body += struct.pack("!H", legacy)
    body += os.urandom(32)
    body.append(0)  # empty session id
    body += struct.pack("!H", 2 * len(suites))
    for code in suites:
        body += struct.pack("!H", code)
    body += b"\x01\x00"  # null compression only

    if version != "SSL3":
        name_raw = server_name.encode("idna")
        sni = struct.pack("!HBH", len(name_raw) + 3, 0, len(name_raw)) + name_raw
        groups = struct.pack("!H", 2 * len(GROUPS)) + b"".join(
            struct.pack("!H", g) for g in GROUPS)
        sigalgs = struct.pack("!H", 2 * len(SIGNATURE_ALGORITHMS)) + b"".join(
            struct.pack("!H", a) for a in SIGNATURE_ALGORITHMS)
        exts = _ext(0, sni) + _ext(10, groups) + _ext(11, b"\x01\x00") + _ext(13, sigalgs)
        if version == "TLS1.3":
            exts += _ext(43, b"\x02\x03\x04")
            share = struct.pack("!HH", 0x001D, 32) + os.urandom(32)
            exts += _ext(51, struct.pack("!H", len(share)) + share)
        body += struct.pack("!H", len(exts)) + exts

    handshake = b"\x01" + len(body).to_bytes(3, "big") + bytes(body)
    record_version = wire if wire < 0x0303 else 0x0301
    return b"\x16" + struct.pack("!H", record_version) + \
        struct.pack("!H", len(handshake)) + handshake


@dataclass
class HelloOutcome:
    kind: str            # "selected" | "alert" | "error"
    version: str = ""    # negotiated version name when kind == "selected"
    cipher: int = -1
    detail: str = ""


def _recv_exact(sock, n: int) -> bytes:
    buf = bytearray()
    while len(buf) < n:
        chunk = sock.recv(n - len(buf))
        if not chunk:
            raise ConnectionError("connection closed during handshake")
        buf += chunk
    return bytes(buf)


def _read_record(sock) -> tuple[int, bytes]:
    header = _recv_exact(sock, 5)
    content_type, _version, length = struct.unpack("!BHH", header)
    if length > 1 << 16:
        raise ValueError("oversized record")
    return content_type, _recv_exact(sock, length)


def parse_server_hello(body: bytes) -> tuple[int, int]:
    """Return (negotiated wire version, selected cipher) from a ServerHello body."""
    if len(body) < 38:
        raise ValueError("short ServerHello")
    legacy_version = struct.unpack_from("!H", body, 0)[0]
    pos = 34  # version + random
    sid_len = body[pos]
    pos += 1 + sid_len
    cipher = struct.unpack_from("!H", body, pos)[0]
    pos += 3  # cipher + compression
    version = legacy_version
    if pos + 2 <= len(body):
        ext_len = struct.unpack_from("!H", body, pos)[0]
        pos += 2
        end = pos + ext_len
        while pos + 4 <= min(end, len(body)):
            ext_type, data_len = struct.unpack_from("!HH", body, pos)
            pos += 4
            if ext_type == 43 and data_len == 2:
                version = struct.unpack_from("!H", body, pos)[0]
            pos += data_len
    return version, cipher


def hello_probe(channel_factory: Channel, server_name: str, version: str,
                suites: tuple[int, ...], timeout: float = 5.0) -> HelloOutcome:
    """One connection, one ClientHello, classify the reply."""
    try:
        sock = channel_factory()
    except OSError as exc:
        return HelloOutcome("error", detail=f"connect: {exc}")
    try:
        sock.settimeout(timeout)
        sock.sendall(build_client_hello(server_name, version, suites))
        handshake = bytearray()
        need = None
        while True:
            content_type, payload = _read_record(sock)
            if content_type == 21:  # alert
                desc = payload[1] if len(payload) >= 2 else -1
                return HelloOutcome("alert",
                                    detail=ALERT_NAMES.get(desc, f"alert {desc}"))
            if content_type != 22:
                return HelloOutcome("error", detail=f"unexpected record type {content_type}")
            handshake += payload
            if need is None and len(handshake) >= 4:
                if handshake[0] != 2:
                    return HelloOutcome(
                        "error", detail=f"unexpected handshake type {handshake[0]}")
                need = 4 + int.from_bytes(handshake[1:4], "big")
            if need is not None and len(handshake) >= need:
                wire, cipher = parse_server_hello(bytes(handshake[4:need]))
                name = WIRE_VERSION.get(wire, f"0x{wire:04x}")
                return HelloOutcome("selected", version=name, cipher=cipher)
    except (OSError, ValueError, ConnectionError) as exc:
        return HelloOutcome("error", detail=str(exc))
    finally:
        try:
            sock.close()
        except OSError:
            pass


def _suites_for(version: str) -> tuple[int, ...]:
    if version == "TLS1.3":
        return TLS13_SUITES
    if version == "SSL3":
        return SSL3_SUITES
    return GENERIC_SUITES


@dataclass
class CertReport:
    present: bool = False
    valid: bool = False
    hostname_match: bool = False
    not_after: str = ""
    subject: str = ""
    issuer: str = ""
    detail: str = ""


@dataclass
class TlsEndpointReport:
    versions_offered: list[str] = field(default_factory=list)
    weak_ciphers: list[str] = field(default_factory=list)
    cert: CertReport | None = None
    errors: dict[str, str] = field(default_factory=dict)

    @property
    def reachable(self) -> bool:
        return bool(self.versions_offered) or len(self.errors) < len(VERSION_NAMES)


def hostname_matches(pattern: str, host: str) -> bool:
    """dNSName matching: exact labels, or a leftmost bare * for one label."""
    p = pattern.lower().rstrip(".").split(".")
    h = host.lower().rstrip(".").split(".")
    if len(p) != len(h) or not all(p) or not all(h):
        return False
    if p[0] == "*":
        return len(p) >= 3 and p[1:] == h[1:]
    return p == h


def _cert_names(cert: x509.Certificate) -> list[str]:
    try:
        san = cert.extensions.get_extension_for_class(x509.SubjectAlternativeName)
        names = san.value.get_values_for_type(x509.DNSName)
        if names:
            return list(names)
    except x509.ExtensionNotFound:
        pass
    cn = cert.subject.get_attributes_for_oid(x509.NameOID.COMMON_NAME)
    return [cn[0].value] if cn else []


def _name_of(name: x509.Name) -> str:
    attrs = name.get_attributes_for_oid(x509.NameOID.COMMON_NAME)
    return attrs[0].value if attrs else name.rfc4514_string()


def _not_after(cert: x509.Certificate) -> datetime:
    try:
        return cert.not_valid_after_utc
    except AttributeError:
        return cert.not_valid_after.replace(tzinfo=timezone.utc)


def _permissive_context() -> ssl.SSLContext:
    ctx = ssl.SSLContext(ssl.PROTOCOL_TLS_CLIENT)
    ctx.check_hostname = False
    ctx.verify_mode = ssl.CERT_NONE
    with warnings.catch_warnings():
        # old floor on purpose: the leaf must be retrievable from weak servers
        warnings.simplefilter("ignore", DeprecationWarning)
        ctx.minimum_version = ssl.TLSVersion.TLSv1
    ctx.set_ciphers("ALL:eNULL:@SECLEVEL=0")
    return ctx


def fetch_certificate(channel_factory: Channel, server_name: str,
                      trust_store: str | None, timeout: float = 5.0) -> CertReport:
    report = CertReport()
    der = None
    sock = None
    try:
        sock = channel_factory()
        sock.settimeout(timeout)
        with _permissive_context().wrap_socket(sock, server_hostname=server_name) as tls:
            der = tls.getpeercert(True)
    except (OSError, ssl.SSLError, ValueError) as exc:
        report.detail = f"retrieval failed: {exc}"
        return report
    finally:
        if sock is not None:
            try:
                sock.close()
            except OSError:
                pass

    if not der:
        report.detail = "server sent no certificate"
        return report
    report.present = True
    cert = x509.load_der_x509_certificate(der)
    report.subject = _name_of(cert.subject)
    report.issuer = _name_of(cert.issuer)
    report.not_after = _not_after(cert).strftime("%Y-%m-%d")
    report.hostname_match = any(hostname_matches(n, server_name)
                                for n in _cert_names(cert))

    vctx = _permissive_context()
    vctx.verify_mode = ssl.CERT_REQUIRED
    try:
        if trust_store:
            vctx.load_verify_locations(trust_store)
        else:
            vctx.load_default_certs()
    except (OSError, ssl.SSLError) as exc:
        report.detail = f"trust store unusable: {exc}"
        return report
    sock = None
    try:
        sock = channel_factory()
        sock.settimeout(timeout)
        with vctx.wrap_socket(sock, server_hostname=server_name):
            report.valid = True
    except ssl.SSLCertVerificationError as exc:
        report.detail = exc.verify_message or str(exc)
    except (OSError, ssl.SSLError) as exc:
        report.detail = f"verification handshake failed: {exc}"
    finally:
        if sock is not None:
            try:
                sock.close()
            except OSError:
                pass
    return report


def assess_endpoint(channel_factory: Channel, server_name: str, *,
                    trust_store: str | None = None, probe_weak: bool = True,
                    include_cert: bool = True, timeout: float = 5.0) -> TlsEndpointReport:
    report = TlsEndpointReport()
    for version in VERSION_NAMES:
        outcome = hello_probe(channel_factory, server_name, version,
                              _suites_for(version), timeout)
        if outcome.kind == "selected" and outcome.version == version:
            report.versions_offered.append(version)
        elif outcome.kind == "error":
            report.errors[version] = outcome.detail

    pre13 = [v for v in report.versions_offered if v != "TLS1.3"]
    if probe_weak and pre13:
        base = pre13[-1]
        for weak_class in WEAK_CLASS_ORDER:
            suites = WEAK_SUITES[weak_class]
            outcome = hello_probe(channel_factory, server_name, base, suites, timeout)
            if outcome.kind == "selected" and outcome.cipher in suites:
                report.weak_ciphers.append(weak_class)

    if include_cert and report.versions_offered:
        report.cert = fetch_certificate(channel_factory, server_name, trust_store, timeout)
    return report
