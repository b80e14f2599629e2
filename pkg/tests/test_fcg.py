import pytest

from bowir.corpus_io import ParseError
from bowir.fcg import (FcgError, Paradigm, ParadigmSet, check_plain_index, expand_query,
                       generate_variants, load_paradigms, parse_paradigms)
from bowir.ranking import Query
from bowir.textpipe import PipelineConfig, StemRuleSet, load_stem_rules, stem

MATCH_ALL = "*\t0,s,med,mer,ming\n"


def test_load_match_all():
    ps = parse_paradigms(MATCH_ALL)
    assert ps.paradigms == (Paradigm("", ("", "s", "med", "mer", "ming")),)


def test_load_empty_and_order():
    assert len(load_paradigms(b"")) == 0
    ps = parse_paradigms("ing\t0,s\n*\t0,s\ns\t0,es\n")
    assert [p.match for p in ps] == ["ing", "", "s"]


@pytest.mark.parametrize("text", ["*\t\n", "x\t0,s,s\n", "x 0,s\n", "x\ts,,ed\n"])
def test_load_errors(text):
    with pytest.raises(ParseError) as exc:
        parse_paradigms("# header\n" + text)
    assert exc.value.line == 2


def test_generate_stem():
    assert generate_variants("stem", parse_paradigms(MATCH_ALL)) == {
        "stem", "stems", "stemmed", "stemmer", "stemming"}


def test_generate_identity():
    assert generate_variants("stem", ParadigmSet()) == {"stem"}
    assert generate_variants("walk", parse_paradigms("ing\t0,s\n")) == {"walk"}


def test_generate_collision_dedup():
    ps = parse_paradigms("s\t0,s\n")
    # strip "s" from "cats": base "cat" -> {"cat", "cats"}; "cats" is also the original
    out = generate_variants("cats", ps)
    assert out == {"cat", "cats"}
    assert len(out) < 1 + len(ps.paradigms[0].variants)


def test_first_match_wins():
    ps = parse_paradigms("ing\t0,s\ng\tx\n")
    assert generate_variants("walking", ps) == {"walking", "walk", "walks"}


def test_expand_query():
    ps = parse_paradigms(MATCH_ALL)
    q = expand_query(Query("1", {"stem": 1}), ps)
    assert q.terms == {"stem": 1, "stems": 1, "stemmed": 1, "stemmer": 1, "stemming": 1}
    assert expand_query(Query("1", {"stem": 2}), ParadigmSet()).terms == {"stem": 2}


def test_expand_query_additive():
    ps = parse_paradigms("s\t0\n")
    q = expand_query(Query("1", {"cats": 1, "cat": 1}), ps)
    assert q.terms == {"cat": 2, "cats": 1}


def test_expand_query_order_independent():
    ps = parse_paradigms(MATCH_ALL)
    a = expand_query(Query("1", {"a": 1, "b": 2}), ps)
    b = expand_query(Query("1", {"b": 2, "a": 1}), ps)
    assert list(a.terms.items()) == list(b.terms.items())
    assert len(a.terms) >= 2


@pytest.mark.parametrize("lang", ["en", "gu"])
def test_paired_resources_collapse(resources, lang):
    paradigms = load_paradigms(resources / f"{lang}_paradigms.tsv")
    rules = load_stem_rules(resources / f"{lang}_stemrules.tsv")
    roots = (resources / f"{lang}_roots.txt").read_text(encoding="utf-8").split()
    assert roots
    for root in roots:
        variants = generate_variants(root, paradigms)
        assert len(variants) > 1
        assert {stem(v, rules) for v in variants} == {stem(root, rules)}


def test_refuse_stemmed():
    with pytest.raises(FcgError, match="unstemmed"):
        check_plain_index(PipelineConfig(stemmer=StemRuleSet.from_pairs([("s", 2)])))
    check_plain_index(PipelineConfig())
