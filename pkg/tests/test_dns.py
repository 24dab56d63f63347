"""Wire codec round trips, the stub resolver client, and the three-way
signing classification."""

import socket
import struct

import pytest

from dnsstub import DnsStub, DnsZone

from sitegrade import dnswire
from sitegrade.checks import FamilyError
from sitegrade.checks.dns import BOGUS, ERROR, INSECURE, SECURE, classify_dnssec, run_dns_checks
from sitegrade.config import Config
from sitegrade.model import STATUS_SUCCESS
from sitegrade.psl import bundled_psl
from sitegrade.resolver import Resolver, ResolverError, ResolverTimeout

PSL = bundled_psl()


# -- wire codec -------------------------------------------------------------

def test_name_encoding():
    assert dnswire.encode_name("example.test") == b"\x07example\x04test\x00"
    assert dnswire.encode_name("example.test.") == b"\x07example\x04test\x00"
    assert dnswire.encode_name("") == b"\x00"
    assert dnswire.encode_name("münchen.test") == b"\x0exn--mnchen-3ya\x04test\x00"


def test_name_encoding_rejects_oversized_label():
    with pytest.raises(dnswire.WireError):
        dnswire.encode_name("a" * 64 + ".test")


def test_name_decoding_follows_compression():
    data = b"\x00" * 4 + b"\x03foo\x04test\x00" + b"\x03bar\xc0\x04"
    name, after = dnswire.decode_name(data, 4)
    assert name == "foo.test" and after == 14
    name, after = dnswire.decode_name(data, 14)
    assert name == "bar.foo.test" and after == 20


def test_name_decoding_detects_pointer_loop():
    data = b"\xc0\x00"
    with pytest.raises(dnswire.WireError):
        dnswire.decode_name(data, 0)


def test_query_layout():
    raw = dnswire.build_query("example.test", dnswire.TYPE_A, 0x1234,
                              rd=True, ad=True, cd=False, edns_do=True)
    txid, flags, qd, an, ns, ar = struct.unpack_from("!6H", raw, 0)
    assert txid == 0x1234
    assert flags == dnswire.FLAG_RD | dnswire.FLAG_AD
    assert (qd, an, ns, ar) == (1, 0, 0, 1)
    name, offset = dnswire.decode_name(raw, 12)
    assert name == "example.test"
    qtype, qclass = struct.unpack_from("!2H", raw, offset)
    assert (qtype, qclass) == (dnswire.TYPE_A, dnswire.CLASS_IN)
    # OPT pseudo-record: root, type 41, requested payload in the class field
    opt = raw[offset + 4:]
    assert opt[0] == 0
    rtype, payload, ttl, rdlen = struct.unpack_from("!2HIH", opt, 1)
    assert rtype == dnswire.TYPE_OPT and payload == 4096
    assert ttl & 0x8000  # DO bit
    assert rdlen == 0


def test_message_round_trip_decodes_known_types():
    answers = [
        ("a.test", dnswire.TYPE_A, 300, dnswire.rdata_a("192.0.2.1")),
        ("a.test", dnswire.TYPE_AAAA, 300, dnswire.rdata_aaaa("2001:db8::1")),
        ("a.test", dnswire.TYPE_MX, 300, dnswire.rdata_mx(10, "mx.a.test")),
        ("a.test", dnswire.TYPE_TXT, 300, dnswire.rdata_txt("v=spf1 -all")),
        ("w.test", dnswire.TYPE_CNAME, 300, dnswire.rdata_cname("a.test")),
        ("a.test", dnswire.TYPE_DNSKEY, 300, dnswire.rdata_dnskey()),
    ]
    raw = dnswire.build_message(7, dnswire.FLAG_QR | dnswire.FLAG_AD,
                                [("a.test", dnswire.TYPE_A, dnswire.CLASS_IN)],
                                answers)
    msg = dnswire.parse_message(raw)
    assert msg.txid == 7 and msg.ad and msg.rcode == 0
    assert msg.questions == [("a.test", dnswire.TYPE_A, dnswire.CLASS_IN)]
    values = [rec.value for rec in msg.answers]
    assert values[:5] == ["192.0.2.1", "2001:db8::1", (10, "mx.a.test"),
                          "v=spf1 -all", "a.test"]
    assert values[5] is None  # undecoded types keep raw rdata only
    assert msg.answers[5].rdata == dnswire.rdata_dnskey()


def test_long_txt_reassembled_from_chunks():
    text = "x" * 300
    raw = dnswire.build_message(1, dnswire.FLAG_QR, [],
                                [("t.test", dnswire.TYPE_TXT, 60,
                                  dnswire.rdata_txt(text))])
    assert dnswire.parse_message(raw).answers[0].value == text


def test_parse_rejects_truncated_messages():
    whole = dnswire.build_message(1, dnswire.FLAG_QR,
                                  [("a.test", dnswire.TYPE_A, dnswire.CLASS_IN)],
                                  [("a.test", dnswire.TYPE_A, 60, dnswire.rdata_a("192.0.2.1"))])
    with pytest.raises(dnswire.WireError):
        dnswire.parse_message(whole[:10])
    with pytest.raises(dnswire.WireError):
        dnswire.parse_message(whole[:-3])


# -- resolver client over loopback UDP --------------------------------------

@pytest.fixture
def stub():
    zones = {
        "site.test": DnsZone("unsigned", {
            ("www.site.test", dnswire.TYPE_CNAME): [dnswire.rdata_cname("site.test")],
            ("site.test", dnswire.TYPE_A): [dnswire.rdata_a("192.0.2.10")],
            ("site.test", dnswire.TYPE_AAAA): [dnswire.rdata_aaaa("2001:db8::10")],
            ("site.test", dnswire.TYPE_MX): [dnswire.rdata_mx(20, "mx2.site.test"),
                                             dnswire.rdata_mx(10, "mx1.site.test")],
            ("site.test", dnswire.TYPE_TXT): [dnswire.rdata_txt("v=spf1 -all"),
                                              dnswire.rdata_txt("unrelated")],
        }),
    }
    server = DnsStub(zones)
    yield server
    server.close()


def test_addresses_concatenate_a_and_aaaa(stub):
    resolver = Resolver(stub.address, timeout=2.0)
    assert resolver.addresses("site.test") == ["192.0.2.10", "2001:db8::10"]


def test_addresses_ignore_cname_records(stub):
    # the recursive resolver chased the alias; only address records count
    stub.zones["site.test"].records[("www.site.test", dnswire.TYPE_A)] = [
        dnswire.rdata_a("192.0.2.11")]
    resolver = Resolver(stub.address, timeout=2.0)
    assert resolver.addresses("www.site.test") == ["192.0.2.11"]


def test_mx_hosts_sorted_by_preference(stub):
    resolver = Resolver(stub.address, timeout=2.0)
    assert resolver.mx_hosts("site.test") == [(10, "mx1.site.test"),
                                              (20, "mx2.site.test")]
    assert resolver.mx_hosts("other.site.test") == []


def test_txt_strings_decoded(stub):
    resolver = Resolver(stub.address, timeout=2.0)
    assert resolver.txt_strings("site.test") == ["v=spf1 -all", "unrelated"]


def test_mismatched_txid_replies_are_ignored(stub):
    stub.wrong_txid_first = True
    resolver = Resolver(stub.address, timeout=2.0)
    assert resolver.addresses("site.test") == ["192.0.2.10", "2001:db8::10"]


def test_silent_server_raises_timeout():
    silent = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)
    silent.bind(("127.0.0.1", 0))
    try:
        resolver = Resolver(silent.getsockname(), timeout=0.2, retries=0)
        with pytest.raises(ResolverTimeout):
            resolver.query("site.test", dnswire.TYPE_A)
    finally:
        silent.close()


# -- signing classification -------------------------------------------------

class FakeResolver:
    """query() answers from a (name, qtype, cd) table of Message objects."""

    def __init__(self, table):
        self.table = table

    def query(self, name, qtype, *, rd=True, ad=False, cd=False, edns_do=False):
        entry = self.table[(name, qtype, cd)]
        if isinstance(entry, Exception):
            raise entry
        return entry


def reply(rcode=dnswire.RCODE_NOERROR, ad=False, answers=()):
    flags = dnswire.FLAG_QR | rcode | (dnswire.FLAG_AD if ad else 0)
    msg = dnswire.Message(txid=0, flags=flags)
    for rtype in answers:
        msg.answers.append(dnswire.Record("x", rtype, dnswire.CLASS_IN, 60, b""))
    return msg


def test_classify_secure_on_ad_bit():
    resolver = FakeResolver({("www.z.test", dnswire.TYPE_A, False): reply(ad=True)})
    assert classify_dnssec(resolver, "www.z.test", "z.test")[0] == SECURE


def test_classify_secure_on_signed_denial():
    resolver = FakeResolver({
        ("gone.z.test", dnswire.TYPE_A, False): reply(dnswire.RCODE_NXDOMAIN, ad=True)})
    assert classify_dnssec(resolver, "gone.z.test", "z.test")[0] == SECURE


def test_classify_insecure_unsigned_zone():
    resolver = FakeResolver({
        ("www.z.test", dnswire.TYPE_A, False): reply(),
        ("z.test", dnswire.TYPE_DNSKEY, False): reply(),
    })
    status, detail = classify_dnssec(resolver, "www.z.test", "z.test")
    assert status == INSECURE and detail == "zone is unsigned"


def test_classify_insecure_when_resolver_skips_validation():
    resolver = FakeResolver({
        ("www.z.test", dnswire.TYPE_A, False): reply(),
        ("z.test", dnswire.TYPE_DNSKEY, False): reply(answers=[dnswire.TYPE_DNSKEY]),
    })
    status, detail = classify_dnssec(resolver, "www.z.test", "z.test")
    assert status == INSECURE and "did not validate" in detail


def test_classify_bogus_when_only_cd_readable():
    resolver = FakeResolver({
        ("www.z.test", dnswire.TYPE_A, False): reply(dnswire.RCODE_SERVFAIL),
        ("www.z.test", dnswire.TYPE_A, True): reply(answers=[dnswire.TYPE_A]),
        ("z.test", dnswire.TYPE_DNSKEY, True): reply(answers=[dnswire.TYPE_DNSKEY]),
    })
    assert classify_dnssec(resolver, "www.z.test", "z.test")[0] == BOGUS


def test_classify_error_when_cd_retry_also_fails():
    resolver = FakeResolver({
        ("www.z.test", dnswire.TYPE_A, False): reply(dnswire.RCODE_SERVFAIL),
        ("www.z.test", dnswire.TYPE_A, True): reply(dnswire.RCODE_SERVFAIL),
        ("z.test", dnswire.TYPE_DNSKEY, True): reply(),
    })
    status, detail = classify_dnssec(resolver, "www.z.test", "z.test")
    assert status == ERROR and "SERVFAIL" in detail


def test_classify_error_on_timeout_or_odd_rcode():
    resolver = FakeResolver({
        ("www.z.test", dnswire.TYPE_A, False): ResolverTimeout("no answer")})
    assert classify_dnssec(resolver, "www.z.test", "z.test")[0] == ERROR
    resolver = FakeResolver({("www.z.test", dnswire.TYPE_A, False): reply(5)})
    status, detail = classify_dnssec(resolver, "www.z.test", "z.test")
    assert status == ERROR and "rcode 5" in detail


def test_classify_error_when_dnskey_lookup_breaks():
    resolver = FakeResolver({
        ("www.z.test", dnswire.TYPE_A, False): reply(),
        ("z.test", dnswire.TYPE_DNSKEY, False): ResolverError("refused"),
    })
    status, detail = classify_dnssec(resolver, "www.z.test", "z.test")
    assert status == ERROR and "DNSKEY" in detail


# -- whole family against the UDP stub --------------------------------------

def family_results(zone_mode: str):
    zones = {"zone.test": DnsZone(zone_mode, {
        ("www.zone.test", dnswire.TYPE_A): [dnswire.rdata_a("192.0.2.20")],
    })}
    server = DnsStub(zones)
    try:
        resolver = Resolver(server.address, timeout=2.0)
        results = run_dns_checks("https://www.zone.test/", Config(), resolver, PSL)
        return {r.key: r for r in results}, server
    finally:
        server.close()


def test_family_reports_secure_zone():
    results, server = family_results("secure")
    assert results["dns.dnssec.status"].value == SECURE
    assert results["dns.dnssec.evaluated_name"].value == "www.zone.test"
    assert results["dns.addresses"].value == ["192.0.2.20"]
    assert all(r.status == STATUS_SUCCESS for r in results.values())
    # validated answer needs no key lookup
    assert not any(q[1] == dnswire.TYPE_DNSKEY for q in server.queries)


def test_family_reports_unsigned_zone():
    results, server = family_results("unsigned")
    assert results["dns.dnssec.status"].value == INSECURE
    dnskey_queries = [q for q in server.queries if q[1] == dnswire.TYPE_DNSKEY]
    assert dnskey_queries and dnskey_queries[0][0] == "zone.test"
    assert dnskey_queries[0][4] is True  # DO bit requested


def test_family_reports_bogus_zone():
    results, _ = family_results("bogus")
    assert results["dns.dnssec.status"].value == BOGUS
    assert results["dns.addresses"].value == []  # plain lookups SERVFAIL


def test_family_unreachable_resolver_is_fatal():
    silent = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)
    silent.bind(("127.0.0.1", 0))
    try:
        resolver = Resolver(silent.getsockname(), timeout=0.2, retries=0)
        with pytest.raises(FamilyError):
            run_dns_checks("https://www.zone.test/", Config(), resolver, PSL)
    finally:
        silent.close()
