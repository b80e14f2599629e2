import random
import unicodedata

import pytest
from hypothesis import given, settings, strategies as st

from bowir.textpipe import (NormalizeOptions, PipelineConfig, StemRuleSet, StopList,
                            apply_stoplist, learn_suffix_rules, load_stem_rules, load_stoplist,
                            normalize, parse_stem_rules, save_stem_rules, stem, tokenize,
                            top_frequency_terms)


def _category_split(text):
    """Reference segmentation straight from the Unicode category of each code point."""
    out, cur = [], []
    for ch in text:
        if unicodedata.category(ch)[0] in "LMN":
            cur.append(ch)
        elif cur:
            out.append("".join(cur))
            cur = []
    if cur:
        out.append("".join(cur))
    return out


def test_tokenize_english():
    assert tokenize("cat chases rat") == ["cat", "chases", "rat"]


def test_tokenize_empty():
    assert tokenize("") == []


def test_tokenize_gujarati_punctuation():
    text = "રમત, રમતો; રમશે."
    # vowel signs (Mc/Mn) stay inside the token
    assert [unicodedata.category(c) for c in "રમતો"] == ["Lo", "Lo", "Lo", "Mc"]
    assert tokenize(text) == _category_split(text) == ["રમત", "રમતો", "રમશે"]


def test_tokenize_keeps_digits_and_drops_zero_width():
    assert tokenize("year 2010!") == ["year", "2010"]
    assert tokenize("ક્\u200cષ") == ["ક્ષ"]


@given(st.lists(st.text(alphabet=st.characters(whitelist_categories=("Lu", "Ll", "Lo", "Nd")),
                        min_size=1, max_size=8), max_size=10))
def test_tokenize_join_round_trip(tokens):
    assert tokenize(" ".join(tokens)) == tokens


def test_normalize_examples():
    assert normalize("The") == "the"
    assert normalize("ર\u200cમત") == "રમત"
    assert normalize("2010", NormalizeOptions("keep")) == "2010"
    assert normalize("2010", NormalizeOptions("drop")) == ""
    assert normalize("é") == "é"  # NFC


def test_normalize_bad_digit_policy():
    with pytest.raises(ValueError):
        NormalizeOptions("round")


@given(st.text(max_size=20))
def test_normalize_idempotent(s):
    assert normalize(normalize(s)) == normalize(s)


def test_apply_stoplist_examples():
    assert apply_stoplist(["the", "cat"], {"the"}) == ["cat"]
    assert apply_stoplist(["the", "cat"], set()) == ["the", "cat"]


def test_apply_stoplist_445_token_fixture():
    rng = random.Random(445)
    stop = [f"s{i}" for i in range(20)]
    tokens = [rng.choice(stop) for _ in range(178)] + [f"w{rng.randrange(300)}" for _ in range(267)]
    rng.shuffle(tokens)
    assert len(tokens) == 445
    survivors = apply_stoplist(tokens, StopList(stop))
    assert len(survivors) == sum(1 for t in tokens if t not in set(stop)) == 267
    assert survivors == [t for t in tokens if not t.startswith("s")]


def test_stoplist_file(tmp_path):
    p = tmp_path / "sw.txt"
    p.write_text("# comment\nThe\n\nand\nthe\n", encoding="utf-8")
    assert load_stoplist(p) == {"the", "and"}


def test_stem_examples():
    assert stem("studying", StemRuleSet.from_pairs([("ing", 3)])) == "study"
    assert stem("sing", StemRuleSet.from_pairs([("ing", 3)])) == "sing"


def test_stem_longest_suffix_wins():
    rules = StemRuleSet.from_pairs([("ો", 2), ("તો", 2)])
    # the two candidate strips, enumerated by hand
    assert "રમતો"[:-len("તો")] == "રમ" and "રમતો"[:-len("ો")] == "રમત"
    assert [r.suffix for r in rules] == ["તો", "ો"]
    assert stem("રમતો", rules) == "રમ"


def test_stem_single_pass():
    rules = StemRuleSet.from_pairs([("s", 1)])
    assert stem("bss", rules) == "bs"


def test_rule_order_canonical():
    rules = StemRuleSet.from_pairs([("b", 1), ("ab", 1), ("a", 1), ("zz", 1)])
    assert rules.suffixes() == ["ab", "zz", "a", "b"]


def test_rule_duplicates_rejected():
    with pytest.raises(ValueError):
        StemRuleSet.from_pairs([("a", 1), ("a", 2)])


def test_stem_rules_file_round_trip(tmp_path):
    rules = parse_stem_rules("! min_stem_len_default 4\ning\t3\ns\n")
    assert [(r.suffix, r.min_stem_len) for r in rules] == [("ing", 3), ("s", 4)]
    save_stem_rules(rules, tmp_path / "r.tsv")
    assert load_stem_rules(tmp_path / "r.tsv") == rules


@given(st.text(alphabet="abcdeો્ત", max_size=10),
       st.lists(st.tuples(st.text(alphabet="abcdeો્ત", min_size=1, max_size=3),
                          st.integers(1, 4)), max_size=6, unique_by=lambda r: r[0]))
def test_stem_prefix_property(term, pairs):
    rules = StemRuleSet.from_pairs(pairs)
    out = stem(term, rules)
    assert term.startswith(out)
    fired = [r for r in rules if term.endswith(r.suffix) and len(term) - len(r.suffix) >= r.min_stem_len]
    if fired:
        assert len(out) == len(term) - len(fired[0].suffix) >= fired[0].min_stem_len
    else:
        assert out == term


def test_top_frequency_terms():
    assert top_frequency_terms({"a": 5, "b": 3, "c": 3}, 2) == [("a", 5), ("b", 3)]
    assert top_frequency_terms({"b": 1, "a": 1}, 10) == [("a", 1), ("b", 1)]
    with pytest.raises(ValueError):
        top_frequency_terms({"a": 1}, 0)


def test_top_frequency_zipf():
    rng = random.Random(7)
    table = {f"t{i}": max(1, int(10000 / (i + 1) + rng.random() * 3)) for i in range(2000)}
    out = top_frequency_terms(table, 400)
    brute = sorted(table.items(), key=lambda kv: (-kv[1], kv[0]))[:400]
    assert out == brute and len(out) == 400
    assert all(a[1] >= b[1] for a, b in zip(out, out[1:]))


def _suffix_counts(lexicon, max_len, min_stem):
    counts = {}
    for t in lexicon:
        for s_len in range(1, max_len + 1):
            stem_part, suffix = t[:-s_len], t[-s_len:]
            if len(t) > s_len and len(stem_part) >= min_stem and stem_part in lexicon:
                counts[suffix] = counts.get(suffix, 0) + 1
    return counts


def test_learn_suffix_rules_examples():
    lex = {"play", "playing", "plays"}
    assert _suffix_counts(lex, 3, 3) == {"ing": 1, "s": 1}
    assert len(learn_suffix_rules(lex, 3, 2, 3)) == 0
    lex = {"play", "playing", "walk", "walking"}
    assert _suffix_counts(lex, 3, 3) == {"ing": 2}
    rules = learn_suffix_rules(lex, 3, 2, 3)
    assert [(r.suffix, r.min_stem_len) for r in rules] == [("ing", 3)]
    assert len(learn_suffix_rules(lex, 3, 5, 3)) == 0


def test_learn_suffix_rules_empty():
    with pytest.raises(ValueError):
        learn_suffix_rules(set(), 3, 1, 1)


@settings(max_examples=50)
@given(st.lists(st.text(alphabet="abcs", min_size=1, max_size=6), min_size=1, max_size=30),
       st.randoms())
def test_learn_suffix_rules_permutation_invariant(words, rnd):
    shuffled = list(words)
    rnd.shuffle(shuffled)
    a = learn_suffix_rules(words, 3, 2, 2)
    assert a == learn_suffix_rules(shuffled, 3, 2, 2)
    expected = {s for s, c in _suffix_counts(set(words), 3, 2).items() if c >= 2}
    assert set(a.suffixes()) == expected


def test_pipeline_config_canonical():
    base = PipelineConfig()
    assert "stoplist=none" in base.canonical() and "stemmer=none" in base.canonical()
    lines = base.canonical().splitlines()
    assert lines == sorted(lines)
    a = PipelineConfig(stoplist=StopList({"x"}))
    assert a == PipelineConfig(stoplist=StopList({"x"})) and a != base


def test_analyze_order():
    cfg = PipelineConfig(stoplist=StopList({"the"}), stemmer=StemRuleSet.from_pairs([("s", 2)]))
    assert cfg.analyze("The cats, the DOGS") == ["cat", "dog"]
