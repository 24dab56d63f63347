"""UDP stub resolver used by the dns, mail, and privacy checks.

Talks to one configured recursive resolver. DNSSEC classification
relies on that resolver validating (AD flag); this client never
validates signatures itself.
"""

from __future__ import annotations

import random
import socket

from . import dnswire
from .dnswire import Message


class ResolverTimeout(Exception):
    """No response from the configured resolver within the deadline."""


class ResolverError(Exception):
    """Transport-level failure or unparseable response."""


class Resolver:
    def __init__(self, address: tuple[str, int], timeout: float = 3.0, retries: int = 1):
        self.address = address
        self.timeout = timeout
        self.retries = retries

    def query(self, name: str, qtype: int, *, rd: bool = True, ad: bool = False,
              cd: bool = False, edns_do: bool = False) -> Message:
        txid = random.randrange(0x10000)
        packet = dnswire.build_query(name, qtype, txid, rd=rd, ad=ad, cd=cd,
                                     edns_do=edns_do)
        last_exc: Exception | None = None
        for _ in range(self.retries + 1):
            sock = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)
            try:
                sock.settimeout(self.timeout)
                sock.sendto(packet, self.address)
                while True:
                    data, peer = sock.recvfrom(65535)
                    msg = dnswire.parse_message(data)
                    if msg.txid == txid:
                        return msg
            except socket.timeout:
                last_exc = ResolverTimeout(f"{name} type {qtype}: no response")
            except OSError as exc:
                last_exc = ResolverError(f"{name} type {qtype}: {exc}")
            except dnswire.WireError as exc:
                last_exc = ResolverError(f"{name} type {qtype}: {exc}")
            finally:
                sock.close()
        raise last_exc  # type: ignore[misc]

    # convenience lookups returning decoded values from the answer section

    def addresses(self, name: str) -> list[str]:
        """A then AAAA lookups, following CNAMEs the resolver already chased."""
        out: list[str] = []
        for qtype in (dnswire.TYPE_A, dnswire.TYPE_AAAA):
            msg = self.query(name, qtype)
            if msg.rcode != dnswire.RCODE_NOERROR:
                continue
            for rec in msg.answers:
                if rec.rtype == qtype and isinstance(rec.value, str):
                    out.append(rec.value)
        return out

    def mx_hosts(self, name: str) -> list[tuple[int, str]]:
        msg = self.query(name, dnswire.TYPE_MX)
        if msg.rcode != dnswire.RCODE_NOERROR:
            return []
        pairs = [rec.value for rec in msg.answers
                 if rec.rtype == dnswire.TYPE_MX and isinstance(rec.value, tuple)]
        return sorted(pairs, key=lambda p: (p[0], p[1]))

    def txt_strings(self, name: str) -> list[str]:
        msg = self.query(name, dnswire.TYPE_TXT)
        if msg.rcode != dnswire.RCODE_NOERROR:
            return []
        return [rec.value for rec in msg.answers
                if rec.rtype == dnswire.TYPE_TXT and isinstance(rec.value, str)]
