import pytest

from bowir.cli import main
from bowir.corpus_io import parse_qrels, parse_run
from bowir.evaluation import ranked_lists
from bowir.indexer import load_index, read_metadata
from bowir.textpipe import load_stoplist

from conftest import MINI, RESOURCES
from oracles import oracle_map
from synthetic import corpus


@pytest.fixture(scope="module")
def indexes(tmp_path_factory):
    root = tmp_path_factory.mktemp("idx")
    assert main(["index", "--corpus", str(MINI / "corpus"), "--out", str(root / "base")]) == 0
    assert main(["index", "--corpus", str(MINI / "corpus"), "--out", str(root / "stop"),
                 "--stoplist", str(RESOURCES / "gu_stoplist.txt")]) == 0
    assert main(["index", "--corpus", str(MINI / "corpus"), "--out", str(root / "stem"),
                 "--stem-rules", str(RESOURCES / "gu_stemrules.tsv")]) == 0
    return root


def test_index_summary(tmp_path, capsys):
    assert main(["index", "--corpus", str(MINI / "corpus"), "--out", str(tmp_path / "i")]) == 0
    out = dict(line.split("\t") for line in capsys.readouterr().out.splitlines())
    assert out["documents"] == "50"
    assert {"unique_terms", "total_tokens", "raw_tokens", "avg_doc_len"} <= set(out)
    meta = read_metadata(tmp_path / "i")
    assert meta["config.stoplist"] == "none" and meta["config.stemmer"] == "none"


def test_index_stoplist_disjoint(indexes):
    idx = load_index(indexes / "stop")
    assert not set(idx.terms) & load_stoplist(RESOURCES / "gu_stoplist.txt")


def test_index_missing_corpus(tmp_path, capsys):
    missing = tmp_path / "nope"
    assert main(["index", "--corpus", str(missing), "--out", str(tmp_path / "i")]) == 2
    assert str(missing) in capsys.readouterr().err


def _search(index, out, *extra):
    return main(["search", "--index", str(index), "--topics", str(MINI / "topics.txt"),
                 "--fields", "TD", "--model", "bm25", "--k", "10", "--tag", "t",
                 "--out", str(out), *extra])


def test_search_run_shape(indexes, tmp_path):
    assert _search(indexes / "base", tmp_path / "r.txt") == 0
    run = parse_run(tmp_path / "r.txt")
    assert 0 < len(run) <= 5 * 10
    for qid, docs in ranked_lists(run).items():
        ranks = [e.rank for e in run if e.qid == qid]
        assert ranks == list(range(1, len(ranks) + 1))


def test_search_deterministic(indexes, tmp_path):
    assert _search(indexes / "base", tmp_path / "a.txt") == 0
    assert _search(indexes / "base", tmp_path / "b.txt") == 0
    assert (tmp_path / "a.txt").read_bytes() == (tmp_path / "b.txt").read_bytes()


def test_search_fcg_refused_on_stemmed(indexes, tmp_path, capsys):
    code = _search(indexes / "stem", tmp_path / "r.txt", "--fcg", str(RESOURCES / "gu_paradigms.tsv"))
    assert code == 2
    assert "unstemmed" in capsys.readouterr().err
    assert not (tmp_path / "r.txt").exists()


def test_search_fcg_on_plain(indexes, tmp_path):
    assert _search(indexes / "base", tmp_path / "r.txt", "--fcg", str(RESOURCES / "gu_paradigms.tsv")) == 0


def test_search_usage_errors(indexes, tmp_path, capsys):
    assert _search(indexes / "base", tmp_path / "r", "--param", "gamma=1") == 1
    assert "gamma" in capsys.readouterr().err
    assert main(["search", "--index", str(indexes / "base"), "--topics", str(MINI / "topics.txt"),
                 "--model", "pl2", "--out", str(tmp_path / "r")]) == 1
    assert "pl2" in capsys.readouterr().err
    assert _search(indexes / "base", tmp_path / "r", "--param", "b=2") == 1


def test_search_index_from_env(indexes, tmp_path, monkeypatch):
    monkeypatch.setenv("BOWIR_INDEX", str(indexes / "base"))
    assert main(["search", "--topics", str(MINI / "topics.txt"), "--out", str(tmp_path / "r")]) == 0


def test_evaluate(indexes, tmp_path, capsys):
    _search(indexes / "base", tmp_path / "r.txt")
    capsys.readouterr()
    assert main(["evaluate", "--run", str(tmp_path / "r.txt"), "--qrels", str(MINI / "qrels.txt"),
                 "--format", "delim", "--collection-size", "50"]) == 0
    lines = capsys.readouterr().out.splitlines()
    header = lines[0].split("\t")
    rows = {ln.split("\t")[0]: dict(zip(header, ln.split("\t"))) for ln in lines[1:]}
    assert set(rows) == {"401", "402", "403", "404", "405", "ALL"}
    qrels = parse_qrels(MINI / "qrels.txt")
    expected = oracle_map(ranked_lists(parse_run(tmp_path / "r.txt")), qrels.relevant_by_query())
    assert float(rows["ALL"]["AP"]) == pytest.approx(expected, abs=1e-12)
    assert main(["evaluate", "--run", str(tmp_path / "r.txt"), "--qrels", str(MINI / "qrels.txt")]) == 0
    assert "queries evaluated: 5" in capsys.readouterr().out


def test_evaluate_zero_evaluable(tmp_path, capsys):
    (tmp_path / "r").write_text("9 Q0 d 1 1.0 t\n")
    (tmp_path / "q").write_text("1 0 d 0\n")
    assert main(["evaluate", "--run", str(tmp_path / "r"), "--qrels", str(tmp_path / "q")]) == 2
    assert "zero evaluable queries" in capsys.readouterr().err
    assert main(["evaluate", "--run", str(tmp_path / "missing"), "--qrels", str(tmp_path / "q")]) == 2


def _write_corpus(path, docs):
    path.mkdir()
    (path / "c.txt").write_text("".join(
        f"<doc><docno>{d.docid}</docno><text>{d.text}</text></doc>\n" for d in docs), encoding="utf-8")


def test_stopgen(tmp_path, capsys):
    docs, _ = corpus(300, seed=5, vocab_size=800, min_len=20)
    _write_corpus(tmp_path / "c", docs)
    assert main(["index", "--corpus", str(tmp_path / "c"), "--out", str(tmp_path / "i")]) == 0
    capsys.readouterr()
    assert main(["stopgen", "--index", str(tmp_path / "i"), "--top", "400"]) == 0
    rows = [ln.split("\t") for ln in capsys.readouterr().out.splitlines()]
    assert len(rows) == 400
    counts = [int(c) for _, c in rows]
    assert counts == sorted(counts, reverse=True)
    assert main(["stopgen", "--index", str(tmp_path / "i"), "--top", "0"]) == 1


def test_stemlearn(tmp_path):
    (tmp_path / "c").mkdir()
    (tmp_path / "c" / "f").write_text("<doc><docno>1</docno><text>play playing walk walking</text></doc>")
    assert main(["index", "--corpus", str(tmp_path / "c"), "--out", str(tmp_path / "i")]) == 0
    assert main(["stemlearn", "--index", str(tmp_path / "i"), "--max-suffix-len", "3",
                 "--min-freq", "2", "--min-stem-len", "3", "--out", str(tmp_path / "r.tsv")]) == 0
    assert "ing\t3" in (tmp_path / "r.tsv").read_text(encoding="utf-8").splitlines()
    # the learned file feeds straight back into indexing
    assert main(["index", "--corpus", str(tmp_path / "c"), "--out", str(tmp_path / "i2"),
                 "--stem-rules", str(tmp_path / "r.tsv")]) == 0
    assert load_index(tmp_path / "i2").terms == ("play", "walk")
    assert main(["stemlearn", "--index", str(tmp_path / "i"), "--max-suffix-len", "0",
                 "--min-freq", "2", "--min-stem-len", "3", "--out", str(tmp_path / "x")]) == 1


def test_no_command():
    assert main([]) == 1
