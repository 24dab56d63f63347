"""Minimal DNS wire format codec.

Covers exactly what the scanner and its test stubs need: queries with
RD/AD/CD flags and an EDNS0 OPT record carrying the DO bit, and response
parsing with name compression. Record data is decoded for the handful
of types the checks consume; everything else keeps its raw bytes.
"""

from __future__ import annotations

import socket
import struct
from dataclasses import dataclass, field

TYPE_A = 1
TYPE_NS = 2
TYPE_CNAME = 5
TYPE_SOA = 6
TYPE_MX = 15
TYPE_TXT = 16
TYPE_AAAA = 28
TYPE_OPT = 41
TYPE_RRSIG = 46
TYPE_DNSKEY = 48

CLASS_IN = 1

RCODE_NOERROR = 0
RCODE_SERVFAIL = 2
RCODE_NXDOMAIN = 3

FLAG_QR = 0x8000
FLAG_AA = 0x0400
FLAG_TC = 0x0200
FLAG_RD = 0x0100
FLAG_RA = 0x0080
FLAG_AD = 0x0020
FLAG_CD = 0x0010


class WireError(ValueError):
    """Malformed DNS message."""


def encode_name(name: str) -> bytes:
    out = bytearray()
    name = name.rstrip(".")
    if name:
        for label in name.split("."):
            raw = label.encode("idna") if not label.isascii() else label.encode("ascii")
            if not 0 < len(raw) < 64:
                raise WireError(f"bad label {label!r}")
            out.append(len(raw))
            out += raw
    out.append(0)
    return bytes(out)


def decode_name(data: bytes, offset: int) -> tuple[str, int]:
    """Return (dotted name, offset after the name at the original position)."""
    labels: list[str] = []
    jumps = 0
    end = -1  # offset to resume at, set on first pointer
    while True:
        if offset >= len(data):
            raise WireError("truncated name")
        length = data[offset]
        if length & 0xC0 == 0xC0:
            if offset + 1 >= len(data):
                raise WireError("truncated pointer")
            if end < 0:
                end = offset + 2
            offset = ((length & 0x3F) << 8) | data[offset + 1]
            jumps += 1
            if jumps > 64:
                raise WireError("compression loop")
            continue
        if length & 0xC0:
            raise WireError("reserved label type")
        offset += 1
        if length == 0:
            break
        if offset + length > len(data):
            raise WireError("truncated label")
        labels.append(data[offset:offset + length].decode("ascii", "replace"))
        offset += length
    return ".".join(labels).lower(), (end if end >= 0 else offset)


@dataclass
class Record:
    name: str
    rtype: int
    rclass: int
    ttl: int
    rdata: bytes
    value: object = None  # decoded representation for known types


@dataclass
class Message:
    txid: int
    flags: int
    questions: list[tuple[str, int, int]] = field(default_factory=list)
    answers: list[Record] = field(default_factory=list)
    authority: list[Record] = field(default_factory=list)
    additional: list[Record] = field(default_factory=list)

    @property
    def rcode(self) -> int:
        return self.flags & 0x000F

    @property
    def ad(self) -> bool:
        return bool(self.flags & FLAG_AD)

    @property
    def truncated(self) -> bool:
        return bool(self.flags & FLAG_TC)


def _decode_rdata(data: bytes, rtype: int, start: int, rdlength: int) -> object:
    chunk = data[start:start + rdlength]
    if rtype == TYPE_A and rdlength == 4:
        return socket.inet_ntop(socket.AF_INET, chunk)
    if rtype == TYPE_AAAA and rdlength == 16:
        return socket.inet_ntop(socket.AF_INET6, chunk)
    if rtype in (TYPE_CNAME, TYPE_NS):
        return decode_name(data, start)[0]
    if rtype == TYPE_MX:
        if rdlength < 3:
            raise WireError("short MX rdata")
        pref = struct.unpack_from("!H", data, start)[0]
        return pref, decode_name(data, start + 2)[0]
    if rtype == TYPE_TXT:
        parts = []
        pos = start
        while pos < start + rdlength:
            n = data[pos]
            pos += 1
            parts.append(data[pos:pos + n].decode("utf-8", "replace"))
            pos += n
        return "".join(parts)
    return None


def parse_message(data: bytes) -> Message:
    if len(data) < 12:
        raise WireError("short header")
    txid, flags, qd, an, ns, ar = struct.unpack_from("!6H", data, 0)
    msg = Message(txid=txid, flags=flags)
    offset = 12
    for _ in range(qd):
        name, offset = decode_name(data, offset)
        if offset + 4 > len(data):
            raise WireError("truncated question")
        qtype, qclass = struct.unpack_from("!2H", data, offset)
        offset += 4
        msg.questions.append((name, qtype, qclass))
    for count, section in ((an, msg.answers), (ns, msg.authority), (ar, msg.additional)):
        for _ in range(count):
            name, offset = decode_name(data, offset)
            if offset + 10 > len(data):
                raise WireError("truncated record header")
            rtype, rclass, ttl, rdlength = struct.unpack_from("!2HIH", data, offset)
            offset += 10
            if offset + rdlength > len(data):
                raise WireError("truncated rdata")
            value = _decode_rdata(data, rtype, offset, rdlength)
            section.append(Record(name, rtype, rclass, ttl,
                                  data[offset:offset + rdlength], value))
            offset += rdlength
    return msg


def build_query(name: str, qtype: int, txid: int, *,
                rd: bool = True, ad: bool = False, cd: bool = False,
                edns_do: bool = False, payload_size: int = 4096) -> bytes:
    flags = 0
    if rd:
        flags |= FLAG_RD
    if ad:
        flags |= FLAG_AD
    if cd:
        flags |= FLAG_CD
    arcount = 1 if edns_do else 0
    out = bytearray(struct.pack("!6H", txid, flags, 1, 0, 0, arcount))
    out += encode_name(name)
    out += struct.pack("!2H", qtype, CLASS_IN)
    if edns_do:
        # OPT pseudo-record: root name, class = payload size, DO bit in ttl flags
        out += b"\x00" + struct.pack("!2HIH", TYPE_OPT, payload_size, 0x00008000, 0)
    return bytes(out)


def build_message(txid: int, flags: int, questions: list[tuple[str, int, int]],
                  answers: list[tuple[str, int, int, bytes]] = (),
                  authority: list[tuple[str, int, int, bytes]] = (),
                  additional: list[tuple[str, int, int, bytes]] = ()) -> bytes:
    """Assemble a message; records are (name, rtype, ttl, rdata). No compression."""
    out = bytearray(struct.pack("!6H", txid, flags, len(questions),
                                len(answers), len(authority), len(additional)))
    for name, qtype, qclass in questions:
        out += encode_name(name)
        out += struct.pack("!2H", qtype, qclass)
    for section in (answers, authority, additional):
        for name, rtype, ttl, rdata in section:
            out += encode_name(name)
            out += struct.pack("!2HIH", rtype, CLASS_IN, ttl, len(rdata))
            out += rdata
    return bytes(out)


# rdata builders for stubs and tests

def rdata_a(ip: str) -> bytes:
    return socket.inet_pton(socket.AF_INET, ip)


def rdata_aaaa(ip: str) -> bytes:
    return socket.inet_pton(socket.AF_INET6, ip)


def rdata_mx(preference: int, exchange: str) -> bytes:
    return struct.pack("!H", preference) + encode_name(exchange)


def rdata_txt(text: str) -> bytes:
    raw = text.encode("utf-8")
    out = bytearray()
    for i in range(0, len(raw) or 1, 255):
        chunk = raw[i:i + 255]
        out.append(len(chunk))
        out += chunk
    return bytes(out)


def rdata_cname(name: str) -> bytes:
    return encode_name(name)


def rdata_dnskey(flags: int = 257, algorithm: int = 8, key: bytes = b"\x03\x01\x00\x01") -> bytes:
    return struct.pack("!HBB", flags, 3, algorithm) + key
