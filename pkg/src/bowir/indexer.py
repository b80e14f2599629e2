"""Immutable inverted index with collection statistics.

Postings are held in compressed-sparse-row form: terms are sorted, and
``offsets[i]:offsets[i+1]`` slices the shared ``post_docs``/``post_tfs``
arrays for term ``i``. Document ordinals follow first-seen input order.
"""

from __future__ import annotations

import hashlib
import os
import shutil
import tempfile
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, NamedTuple

import numpy as np

from .corpus_io import Document
from .textpipe import (NormalizeOptions, PipelineConfig, StopList, parse_canonical,
                       parse_stem_rules, tokenize)

FORMAT_VERSION = 1

_META = "metadata.txt"
_STOPLIST = "stoplist.txt"
_STEMRULES = "stemrules.tsv"


class InvertedIndexError(Exception):
    """Base class for index build and storage errors."""


class DuplicateDocumentError(InvertedIndexError, ValueError):
    pass


class EmptyCollectionError(InvertedIndexError, ValueError):
    pass


class IndexFormatError(InvertedIndexError):
    pass


class IndexVersionError(IndexFormatError):
    pass


class IndexChecksumError(IndexFormatError):
    pass


class IndexTruncatedError(IndexFormatError):
    pass


@dataclass(frozen=True)
class CollectionStats:
    num_docs: int
    total_tokens: int
    avdl: float
    unique_terms: int
    # token count before normalization/stop/stem, for comparison with raw corpus figures
    raw_tokens: int = 0


@dataclass(frozen=True)
class LexiconEntry:
    term: str
    df: int
    cf: int
    offset: int


class Postings(NamedTuple):
    docs: np.ndarray
    tfs: np.ndarray

    def pairs(self) -> list[tuple[int, int]]:
        return list(zip(self.docs.tolist(), self.tfs.tolist()))


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


class InvertedIndex:
    """Read-only term -> (ordinal, tf) index. Build with :func:`build_index`."""

    def __init__(self, config: PipelineConfig, docids: Iterable[str], doclens, terms: Iterable[str],
                 df, cf, offsets, post_docs, post_tfs, raw_tokens: int = 0):
        self.config = config
        self.docids = tuple(docids)
        self.doclens = _frozen(np.asarray(doclens, dtype=np.int64))
        self.terms = tuple(terms)
        self.df = _frozen(np.asarray(df, dtype=np.int64))
        self.cf = _frozen(np.asarray(cf, dtype=np.int64))
        self.offsets = _frozen(np.asarray(offsets, dtype=np.int64))
        self.post_docs = _frozen(np.asarray(post_docs, dtype=np.int64))
        self.post_tfs = _frozen(np.asarray(post_tfs, dtype=np.int64))
        self.raw_tokens = int(raw_tokens)
        self._term_ids = {t: i for i, t in enumerate(self.terms)}
        self._ordinals = {d: i for i, d in enumerate(self.docids)}
        total = int(self.doclens.sum())
        n = len(self.docids)
        self._stats = CollectionStats(n, total, total / n if n else 0.0, len(self.terms),
                                      self.raw_tokens)

    def __repr__(self):
        s = self._stats
        return f"InvertedIndex(N={s.num_docs}, terms={s.unique_terms}, tokens={s.total_tokens})"

    def __len__(self) -> int:
        return len(self.docids)

    def __contains__(self, term: str) -> bool:
        return term in self._term_ids

    @property
    def stats(self) -> CollectionStats:
        return self._stats

    @property
    def stemmed(self) -> bool:
        return self.config.stemmer is not None

    def lookup(self, term: str) -> tuple[LexiconEntry, Postings] | None:
        i = self._term_ids.get(term)
        if i is None:
            return None
        lo, hi = self.offsets[i], self.offsets[i + 1]
        entry = LexiconEntry(term, int(self.df[i]), int(self.cf[i]), int(lo))
        return entry, Postings(self.post_docs[lo:hi], self.post_tfs[lo:hi])

    def doclen(self, ordinal: int) -> int:
        if not 0 <= ordinal < len(self.docids):
            raise IndexError(f"document ordinal {ordinal} out of range 0..{len(self.docids) - 1}")
        return int(self.doclens[ordinal])

    def docid(self, ordinal: int) -> str:
        if not 0 <= ordinal < len(self.docids):
            raise IndexError(f"document ordinal {ordinal} out of range 0..{len(self.docids) - 1}")
        return self.docids[ordinal]

    def ordinal(self, docid: str) -> int:
        return self._ordinals[docid]

    def collection_frequencies(self) -> dict[str, int]:
        return dict(zip(self.terms, self.cf.tolist()))

    def iter_postings(self) -> Iterator[tuple[LexiconEntry, Postings]]:
        for t in self.terms:
            yield self.lookup(t)

    def __eq__(self, other):
        if not isinstance(other, InvertedIndex):
            return NotImplemented
        return (self.config.canonical() == other.config.canonical()
                and self.docids == other.docids
                and self.terms == other.terms
                and self.raw_tokens == other.raw_tokens
                and all(np.array_equal(getattr(self, a), getattr(other, a))
                        for a in ("doclens", "df", "cf", "offsets", "post_docs", "post_tfs")))

    __hash__ = None


def lookup(index: InvertedIndex, term: str):
    return index.lookup(term)


def stats(index: InvertedIndex) -> CollectionStats:
    return index.stats


def doclen(index: InvertedIndex, ordinal: int) -> int:
    return index.doclen(ordinal)


# --------------------------------------------------------------------------
# building


def _index_chunk(args):
    """Partial index over one contiguous slice of documents."""
    start, texts, config = args
    postings: dict[str, tuple[list[int], list[int]]] = {}
    doclens = []
    raw = 0
    for i, text in enumerate(texts, start):
        raw += len(tokenize(text))
        terms = config.analyze(text)
        doclens.append(len(terms))
        for term, tf in Counter(terms).items():
            ords, tfs = postings.setdefault(term, ([], []))
            ords.append(i)
            tfs.append(tf)
    return postings, doclens, raw


def build_index(documents: Iterable[Document], config: PipelineConfig | None = None, *,
                n_jobs: int = 1, chunk_size: int | None = None) -> InvertedIndex:
    """Index ``documents`` under ``config`` (baseline when omitted).

    With ``n_jobs > 1`` documents are split into contiguous chunks, indexed in
    worker processes and merged term by term; the result equals a serial build.
    """
    config = config or PipelineConfig()
    docs = list(documents)
    if not docs:
        raise EmptyCollectionError("cannot build an index from zero documents")
    seen: set[str] = set()
    for d in docs:
        if d.docid in seen:
            raise DuplicateDocumentError(f"duplicate docid {d.docid!r}")
        if "\n" in d.docid or "\r" in d.docid:
            raise ValueError(f"docid contains a line break: {d.docid!r}")
        seen.add(d.docid)

    texts = [d.text for d in docs]
    if n_jobs is None or n_jobs < 1:
        n_jobs = os.cpu_count() or 1
    if chunk_size is None:
        chunk_size = max(1, -(-len(texts) // n_jobs))
    tasks = [(s, texts[s:s + chunk_size], config) for s in range(0, len(texts), chunk_size)]
    if n_jobs == 1 or len(tasks) == 1:
        parts = [_index_chunk(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=min(n_jobs, len(tasks))) as pool:
            parts = list(pool.map(_index_chunk, tasks))
    return _merge(config, [d.docid for d in docs], parts)


def _merge(config, docids, parts) -> InvertedIndex:
    terms = sorted(set().union(*(p[0].keys() for p in parts)))
    df = np.zeros(len(terms), dtype=np.int64)
    cf = np.zeros(len(terms), dtype=np.int64)
    offsets = np.zeros(len(terms) + 1, dtype=np.int64)
    docs_out: list[int] = []
    tfs_out: list[int] = []
    for i, term in enumerate(terms):
        # chunks cover ascending ordinal ranges, so concatenation keeps postings sorted
        for postings, _, _ in parts:
            hit = postings.get(term)
            if hit is not None:
                docs_out.extend(hit[0])
                tfs_out.extend(hit[1])
        offsets[i + 1] = len(docs_out)
        lo = offsets[i]
        df[i] = offsets[i + 1] - lo
        cf[i] = sum(tfs_out[lo:])
    doclens = [n for p in parts for n in p[1]]
    raw = sum(p[2] for p in parts)
    return InvertedIndex(config, docids, doclens, terms, df, cf, offsets, docs_out, tfs_out, raw)


# --------------------------------------------------------------------------
# persistence


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def _write_arrays(path: Path, *arrays: np.ndarray) -> None:
    with open(path, "wb") as fh:
        for a in arrays:
            fh.write(np.ascontiguousarray(a, dtype="<i8").tobytes())


def _write_lines(path: Path, items: Iterable[str]) -> None:
    with open(path, "wb") as fh:
        fh.write("\n".join(items).encode("utf-8"))


def save_index(index: InvertedIndex, directory: str | os.PathLike) -> Path:
    """Write ``index`` to ``directory``, replacing it atomically if present."""
    target = Path(directory)
    target.parent.mkdir(parents=True, exist_ok=True)
    tmp = Path(tempfile.mkdtemp(prefix=f".{target.name}.", dir=target.parent))
    try:
        files = {
            "lexicon.bin": lambda p: _write_lines(p, index.terms),
            "lexstats.bin": lambda p: _write_arrays(p, index.df, index.cf, index.offsets),
            "postings.bin": lambda p: _write_arrays(p, index.post_docs, index.post_tfs),
            "doctable.bin": lambda p: _write_lines(p, index.docids),
            "doclens.bin": lambda p: _write_arrays(p, index.doclens),
        }
        if index.config.stoplist is not None:
            files[_STOPLIST] = lambda p: p.write_text(index.config.stoplist.canonical(), encoding="utf-8")
        if index.config.stemmer is not None:
            files[_STEMRULES] = lambda p: p.write_text(index.config.stemmer.canonical(), encoding="utf-8")
        digests = []
        meta = [f"format_version={FORMAT_VERSION}"]
        s = index.stats
        meta += [f"stats.num_docs={s.num_docs}", f"stats.total_tokens={s.total_tokens}",
                 f"stats.avdl={s.avdl!r}", f"stats.unique_terms={s.unique_terms}",
                 f"stats.raw_tokens={s.raw_tokens}", f"stats.num_postings={len(index.post_docs)}"]
        meta += [f"config.{k}={v}" for k, v in parse_canonical(index.config.canonical()).items()]
        for name, writer in sorted(files.items()):
            writer(tmp / name)
            digest = _sha256(tmp / name)
            digests.append(f"{name}:{digest}")
            meta += [f"file.{name}.size={(tmp / name).stat().st_size}", f"file.{name}.sha256={digest}"]
        meta.append("checksum=" + hashlib.sha256("\n".join(digests).encode()).hexdigest())
        (tmp / _META).write_text("\n".join(meta) + "\n", encoding="utf-8")

        if target.exists():
            old = Path(tempfile.mkdtemp(prefix=f".{target.name}.old.", dir=target.parent))
            os.replace(target, old / "index")
            os.replace(tmp, target)
            shutil.rmtree(old, ignore_errors=True)
        else:
            os.replace(tmp, target)
    except BaseException:
        shutil.rmtree(tmp, ignore_errors=True)
        raise
    return target


def read_metadata(directory: str | os.PathLike) -> dict[str, str]:
    path = Path(directory) / _META
    if not path.is_file():
        raise IndexTruncatedError(f"{directory}: no {_META}")
    out = {}
    for line in path.read_text(encoding="utf-8").splitlines():
        if line:
            key, sep, value = line.partition("=")
            if not sep:
                raise IndexFormatError(f"{path}: malformed metadata line {line!r}")
            out[key] = value
    return out


def _read_int_arrays(path: Path, count: int, *lengths: int) -> list[np.ndarray]:
    data = np.frombuffer(path.read_bytes(), dtype="<i8").astype(np.int64)
    out, pos = [], 0
    for n in lengths:
        out.append(data[pos:pos + n])
        pos += n
    if pos != len(data):
        raise IndexFormatError(f"{path}: unexpected length")
    return out


def load_index(directory: str | os.PathLike) -> InvertedIndex:
    """Load an index written by :func:`save_index`, verifying version, sizes and checksums."""
    root = Path(directory)
    meta = read_metadata(root)
    version = meta.get("format_version")
    if version != str(FORMAT_VERSION):
        raise IndexVersionError(f"{root}: index format version {version}, expected {FORMAT_VERSION}")
    names = sorted(k[len("file."):-len(".size")] for k in meta if k.startswith("file.") and k.endswith(".size"))
    digests = []
    for name in names:
        path = root / name
        if not path.is_file() or path.stat().st_size != int(meta[f"file.{name}.size"]):
            raise IndexTruncatedError(f"{path}: missing or truncated")
        digest = _sha256(path)
        if digest != meta.get(f"file.{name}.sha256"):
            raise IndexChecksumError(f"{path}: checksum mismatch")
        digests.append(f"{name}:{digest}")
    if hashlib.sha256("\n".join(digests).encode()).hexdigest() != meta.get("checksum"):
        raise IndexChecksumError(f"{root}: metadata checksum mismatch")

    try:
        stoplist = None
        if (root / _STOPLIST).is_file():
            text = (root / _STOPLIST).read_text(encoding="utf-8")
            stoplist = StopList(t for t in text.split("\n") if t)
        stemmer = None
        if (root / _STEMRULES).is_file():
            stemmer = parse_stem_rules((root / _STEMRULES).read_text(encoding="utf-8"))
        config = PipelineConfig(NormalizeOptions(meta["config.digits"]), stoplist, stemmer)
        recorded = {k[len("config."):]: v for k, v in meta.items() if k.startswith("config.")}
        if parse_canonical(config.canonical()) != recorded:
            raise IndexFormatError(f"{root}: stored pipeline resources do not match metadata")

        n = int(meta["stats.num_docs"])
        t = int(meta["stats.unique_terms"])
        p = int(meta["stats.num_postings"])
        terms_raw = (root / "lexicon.bin").read_bytes().decode("utf-8")
        terms = terms_raw.split("\n") if terms_raw else []
        docids = (root / "doctable.bin").read_bytes().decode("utf-8").split("\n")
        df, cf, offsets = _read_int_arrays(root / "lexstats.bin", 3, t, t, t + 1)
        post_docs, post_tfs = _read_int_arrays(root / "postings.bin", 2, p, p)
        (doclens,) = _read_int_arrays(root / "doclens.bin", 1, n)
        if len(terms) != t or len(docids) != n:
            raise IndexFormatError(f"{root}: lexicon or doc table size disagrees with metadata")
        return InvertedIndex(config, docids, doclens, terms, df, cf, offsets, post_docs,
                             post_tfs, int(meta["stats.raw_tokens"]))
    except KeyError as exc:
        raise IndexFormatError(f"{root}: metadata lacks {exc.args[0]}") from None
