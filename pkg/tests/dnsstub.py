"""Loopback UDP resolver stub.

Zones come in four flavors mirroring what a validating recursive
resolver can report about the real world:

  secure       answers carry the AD bit
  unsigned     clean answers, apex has no DNSKEY
  unvalidated  clean answers without AD, apex does publish a DNSKEY
  bogus        plain queries SERVFAIL; checking-disabled queries see data
"""

from __future__ import annotations

import socket
import threading

from sitegrade import dnswire

MODES = ("secure", "unsigned", "unvalidated", "bogus")
RCODE_REFUSED = 5


class DnsZone:
    def __init__(self, mode: str = "unsigned",
                 records: dict[tuple[str, int], list[bytes]] | None = None):
        assert mode in MODES
        self.mode = mode
        self.records = records or {}


class DnsStub:
    def __init__(self, zones: dict[str, DnsZone]):
        self.zones = zones
        self.queries: list[tuple[str, int, bool, bool, bool]] = []
        self.wrong_txid_first = False
        self._sock = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)
        self._sock.bind(("127.0.0.1", 0))
        self.address = self._sock.getsockname()
        threading.Thread(target=self._loop, daemon=True).start()

    def close(self) -> None:
        self._sock.close()

    # -- plumbing -----------------------------------------------------------

    def _loop(self) -> None:
        while True:
            try:
                data, peer = self._sock.recvfrom(65535)
            except OSError:
                return
            try:
                replies = self._handle(data)
            except Exception:
                continue
            for reply in replies:
                try:
                    self._sock.sendto(reply, peer)
                except OSError:
                    return

    def _zone_for(self, name: str) -> tuple[str, DnsZone] | tuple[None, None]:
        for apex, zone in self.zones.items():
            if name == apex or name.endswith("." + apex):
                return apex, zone
        return None, None

    def _name_exists(self, apex: str, zone: DnsZone, name: str) -> bool:
        return name == apex or any(n == name for n, _ in zone.records)

    def _handle(self, data: bytes) -> list[bytes]:
        msg = dnswire.parse_message(data)
        name, qtype, _qclass = msg.questions[0]
        ad = bool(msg.flags & dnswire.FLAG_AD)
        cd = bool(msg.flags & dnswire.FLAG_CD)
        do = any(rec.rtype == dnswire.TYPE_OPT and rec.ttl & 0x8000
                 for rec in msg.additional)
        self.queries.append((name, qtype, ad, cd, do))

        question = [(name, qtype, dnswire.CLASS_IN)]
        base = dnswire.FLAG_QR | dnswire.FLAG_RD | dnswire.FLAG_RA

        def packet(flags: int, answers=()) -> bytes:
            return dnswire.build_message(msg.txid, flags, question, list(answers))

        out = []
        if self.wrong_txid_first:
            out.append(dnswire.build_message((msg.txid + 1) & 0xFFFF,
                                             base, question))

        apex, zone = self._zone_for(name)
        if zone is None:
            out.append(packet(base | RCODE_REFUSED))
            return out

        validated = zone.mode == "secure"
        if zone.mode == "bogus" and not cd:
            out.append(packet(base | dnswire.RCODE_SERVFAIL))
            return out

        if qtype == dnswire.TYPE_DNSKEY and name == apex:
            rdatas = ([dnswire.rdata_dnskey()]
                      if zone.mode in ("secure", "unvalidated", "bogus") else [])
        else:
            rdatas = zone.records.get((name, qtype), [])

        flags = base | (dnswire.FLAG_AD if validated else 0)
        if not rdatas and not self._name_exists(apex, zone, name):
            out.append(packet(flags | dnswire.RCODE_NXDOMAIN))
            return out
        answers = [(name, qtype, 300, rdata) for rdata in rdatas]
        out.append(packet(flags, answers))
        return out
