"""Command-line front end.

Subcommands::

    bowir index     --corpus DIR --out DIR [--stoplist FILE] [--stem-rules FILE] [--strict]
    bowir search    --index DIR --topics FILE --fields T|TD|TDN --model ID --k INT
                    --tag NAME --out RUN [--fcg FILE] [--param key=value ...]
    bowir evaluate  --run FILE --qrels FILE [--pk 5,10,100] [--collection-size N]
                    [--format text|delim]
    bowir stopgen   --index DIR --top K
    bowir stemlearn --index DIR --max-suffix-len L --min-freq F --min-stem-len M --out FILE

Exit status: 0 success, 1 usage error, 2 data error, 3 internal error.
``BOWIR_INDEX`` supplies ``--index`` when the flag is omitted.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from . import corpus_io, evaluation, fcg, indexer, ranking, textpipe

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INTERNAL = 0, 1, 2, 3

log = logging.getLogger("bowir")


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _positive_int(s: str) -> int:
    try:
        value = int(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {s!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {value}")
    return value


def _existing_file(path: str) -> Path:
    p = Path(path)
    if not p.is_file():
        raise DataError(f"file not found: {p}")
    return p


def _existing_dir(path: str) -> Path:
    p = Path(path)
    if not p.is_dir():
        raise DataError(f"directory not found: {p}")
    return p


def _index_dir(args) -> Path:
    path = args.index or os.environ.get("BOWIR_INDEX")
    if not path:
        raise UsageError("--index is required (or set BOWIR_INDEX)")
    return _existing_dir(path)


def _load_index(path: Path) -> indexer.InvertedIndex:
    try:
        return indexer.load_index(path)
    except indexer.IndexFormatError as exc:
        raise DataError(str(exc)) from None


# --------------------------------------------------------------------------
# commands


def cmd_index(args) -> int:
    corpus = _existing_dir(args.corpus)
    stoplist = textpipe.load_stoplist(_existing_file(args.stoplist)) if args.stoplist else None
    stemmer = None
    if args.stem_rules:
        try:
            stemmer = textpipe.load_stem_rules(_existing_file(args.stem_rules))
        except ValueError as exc:
            raise DataError(f"{args.stem_rules}: {exc}") from None
    config = textpipe.PipelineConfig(textpipe.NormalizeOptions(args.digits), stoplist, stemmer)

    errors: list[corpus_io.ParseError] = []
    docs = list(corpus_io.iter_corpus(corpus, strict=args.strict, errors=errors))
    if errors:
        print(f"warning: skipped {len(errors)} malformed document block(s)", file=sys.stderr)
    index = indexer.build_index(docs, config, n_jobs=args.jobs)
    indexer.save_index(index, args.out)

    s = index.stats
    print(f"documents\t{s.num_docs}")
    print(f"unique_terms\t{s.unique_terms}")
    print(f"raw_tokens\t{s.raw_tokens}")
    print(f"total_tokens\t{s.total_tokens}")
    print(f"avg_doc_len\t{s.avdl:.2f}")
    print(f"stoplist\t{'on' if stoplist is not None else 'off'}")
    print(f"stemmer\t{'on' if stemmer is not None else 'off'}")
    return EXIT_OK


def _parse_params(pairs: list[str]) -> ranking.ModelParams:
    overrides = {}
    for pair in pairs:
        key, sep, value = pair.partition("=")
        if not sep:
            raise UsageError(f"--param expects key=value, got {pair!r}")
        if key not in ranking.ModelParams.KEYS:
            raise UsageError(f"unknown model parameter {key!r}; "
                             f"expected one of {', '.join(ranking.ModelParams.KEYS)}")
        try:
            overrides[key] = float(value)
        except ValueError:
            raise UsageError(f"--param {key}: not a number: {value!r}") from None
    try:
        return ranking.ModelParams().with_overrides(overrides)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def cmd_search(args) -> int:
    if args.model not in ranking.MODEL_IDS:
        raise UsageError(f"unknown model {args.model!r}; expected one of {', '.join(ranking.MODEL_IDS)}")
    params = _parse_params(args.param)
    index = _load_index(_index_dir(args))
    paradigms = None
    if args.fcg:
        paradigms = fcg.load_paradigms(_existing_file(args.fcg))
        try:
            fcg.check_plain_index(index)
        except fcg.FcgError as exc:
            raise DataError(f"refusing --fcg: {exc}") from None
    topics = corpus_io.parse_topics(_existing_file(args.topics), strict=args.strict)

    skipped: list[str] = []
    entries = ranking.run_topics(index, topics, args.fields, args.model, params, args.k,
                                 args.tag or args.model, paradigms, skipped)
    for qid in skipped:
        print(f"warning: topic {qid}: empty query after text processing, skipped", file=sys.stderr)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    corpus_io.write_run(entries, out)
    print(f"wrote {len(entries)} lines for {len(topics) - len(skipped)} topic(s) to {out}",
          file=sys.stderr)
    return EXIT_OK


def cmd_evaluate(args) -> int:
    run = corpus_io.parse_run(_existing_file(args.run))
    qrels = corpus_io.parse_qrels(_existing_file(args.qrels))
    try:
        cutoffs = [int(k) for k in args.pk.split(",") if k.strip()]
    except ValueError:
        raise UsageError(f"--pk expects comma-separated integers, got {args.pk!r}") from None
    if not cutoffs or any(k < 1 for k in cutoffs):
        raise UsageError("--pk cutoffs must be positive integers")
    report = evaluation.evaluate(run, qrels, cutoffs, args.collection_size)
    sys.stdout.write(report.render(args.format))
    return EXIT_OK


def cmd_stopgen(args) -> int:
    index = _load_index(_index_dir(args))
    for term, count in textpipe.top_frequency_terms(index.collection_frequencies(), args.top):
        print(f"{term}\t{count}")
    return EXIT_OK


def cmd_stemlearn(args) -> int:
    index = _load_index(_index_dir(args))
    rules = textpipe.learn_suffix_rules(index.terms, args.max_suffix_len, args.min_freq,
                                        args.min_stem_len)
    textpipe.save_stem_rules(rules, args.out)
    print(f"wrote {len(rules)} rule(s) to {args.out}", file=sys.stderr)
    return EXIT_OK


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="bowir", description="Bag-of-words ad hoc retrieval experiments.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("index", help="build an index from a <doc> corpus directory")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--stoplist")
    p.add_argument("--stem-rules")
    p.add_argument("--digits", choices=textpipe.DIGIT_POLICIES, default="keep")
    p.add_argument("--jobs", type=_positive_int, default=1)
    p.add_argument("--strict", action="store_true")
    p.set_defaults(func=cmd_index)

    p = sub.add_parser("search", help="rank documents for a topic file")
    p.add_argument("--index")
    p.add_argument("--topics", required=True)
    p.add_argument("--fields", choices=ranking.FIELD_SETS, default="TD")
    p.add_argument("--model", default="bm25")
    p.add_argument("--k", type=_positive_int, default=ranking.DEFAULT_K)
    p.add_argument("--tag")
    p.add_argument("--out", required=True)
    p.add_argument("--fcg", help="paradigm file for frequent case generation")
    p.add_argument("--param", action="append", default=[], metavar="KEY=VALUE")
    p.add_argument("--strict", action="store_true")
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("evaluate", help="score a run against qrels")
    p.add_argument("--run", required=True)
    p.add_argument("--qrels", required=True)
    p.add_argument("--pk", default="5,10,100")
    p.add_argument("--collection-size", type=_positive_int)
    p.add_argument("--format", choices=("text", "delim"), default="text")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("stopgen", help="list the most frequent index terms")
    p.add_argument("--index")
    p.add_argument("--top", type=_positive_int, required=True)
    p.set_defaults(func=cmd_stopgen)

    p = sub.add_parser("stemlearn", help="learn suffix rules from the index lexicon")
    p.add_argument("--index")
    p.add_argument("--max-suffix-len", type=_positive_int, required=True)
    p.add_argument("--min-freq", type=_positive_int, required=True)
    p.add_argument("--min-stem-len", type=_positive_int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_stemlearn)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return EXIT_OK if not exc.code else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, OSError, ValueError, KeyError, indexer.InvertedIndexError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:  # pragma: no cover
        log.exception("internal error")
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
