"""Resource extraction against the regex-walk oracle and golden lists."""

from pathlib import Path

import pytest
from hypothesis import given, settings, strategies as st

from sitegrade.htmlres import extract_resources

from oracles import regex_extract

CORPUS = sorted((Path(__file__).parent / "data" / "corpus").glob("page*.html"))
BASE = "https://site.test/dir/page.html"


def test_corpus_has_twenty_pages():
    assert len(CORPUS) == 20


@pytest.mark.parametrize("page", CORPUS, ids=[p.name for p in CORPUS])
def test_extraction_equals_oracle_on_corpus(page):
    text = page.read_text(encoding="utf-8")
    assert extract_resources(text, BASE) == regex_extract(text, BASE)


def test_golden_page01():
    text = (CORPUS[0]).read_text(encoding="utf-8")
    assert extract_resources(text, BASE) == [
        "https://site.test/static/site.css",
        "https://trackhub.test/collect.js",
        "https://site.test/images/logo.png",
        "https://adnet.test/banner.gif",
        "https://socnet.test/widget",
    ]


def test_golden_page03_comments_and_cdata_skipped():
    text = Path(CORPUS[2]).read_text(encoding="utf-8")
    found = extract_resources(text, BASE)
    assert found == [
        "https://site.test/visible.png",
        "https://site.test/after-comment.png",
        "https://site.test/after-script.png",
        "https://site.test/after-style.png",
    ]
    assert not any("adnet" in url or "not-extracted" in url for url in found)


def test_golden_page06_base_tag_ignored():
    text = Path(CORPUS[5]).read_text(encoding="utf-8")
    found = extract_resources(text, BASE)
    assert "https://site.test/dir/rel-ignores-base.png" in found
    assert "https://site.test/up/one.png" in found
    assert "https://site.test/dir/dot/slash.png" in found
    assert "https://site.test/rooted.png" in found
    assert not any("evil.example" in url for url in found)


def test_golden_page07_non_http_filtered():
    text = Path(CORPUS[6]).read_text(encoding="utf-8")
    assert extract_resources(text, BASE) == ["https://kept.example/ok.png"]


def test_golden_page16_dedupe_keeps_first():
    text = Path(CORPUS[15]).read_text(encoding="utf-8")
    assert extract_resources(text, BASE) == [
        "https://trackhub.test/a.gif",
        "https://trackhub.test/a.gif?v=2",
        "https://site.test/same.js",
    ]


def test_golden_page19_attr_precedence():
    text = Path(CORPUS[18]).read_text(encoding="utf-8")
    found = extract_resources(text, BASE)
    # src is emitted before srcset regardless of attribute order
    assert found.index("https://site.test/listed-first.png") < \
        found.index("https://site.test/listed-second.png")
    assert found.index("https://site.test/src-still-first.js") < \
        found.index("https://site.test/href-wins-for-link.css")


def test_protocol_relative_resolves_with_page_scheme():
    html = '<img src="//cdn.example/x.png">'
    assert extract_resources(html, "https://site.test/") == \
        ["https://cdn.example/x.png"]
    assert extract_resources(html, "http://site.test/") == \
        ["http://cdn.example/x.png"]


def test_empty_and_tagless_input():
    assert extract_resources("", BASE) == []
    assert extract_resources("just text, no markup", BASE) == []


_words = st.sampled_from(
    ["/a.png", "/b.js", "https://x.test/c.gif", "//y.test/d.css",
     "rel/e.png", "../f.png", "data:x", "ftp://z/g", ""])
_tags = st.sampled_from(
    ["img", "script", "link", "iframe", "source", "embed", "div", "span"])
_attr = st.sampled_from(["src", "href", "srcset", "alt", "class"])


@settings(max_examples=150, deadline=None)
@given(st.lists(st.tuples(_tags, _attr, _words), min_size=0, max_size=12))
def test_generated_markup_agreement(parts):
    chunks = ["<html><body>"]
    for tag, attr, value in parts:
        chunks.append(f'<{tag} {attr}="{value}">filler</{tag}>')
    chunks.append("</body></html>")
    text = "\n".join(chunks)
    assert extract_resources(text, BASE) == regex_extract(text, BASE)
