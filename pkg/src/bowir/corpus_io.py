"""Readers and writers for test-collection files.

Covers the four on-disk artifacts of an ad hoc retrieval experiment:
``<doc>`` document files, ``<top>`` topic files, TREC qrels and TREC run
files. All text is UTF-8; a leading byte-order mark is dropped.

Document and topic parsing is lenient by default: a malformed block is
reported (logged and appended to ``errors`` when a list is supplied) and
skipped. With ``strict=True`` the first bad block raises :class:`ParseError`.
"""

from __future__ import annotations

import io
import logging
import math
import os
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import BinaryIO, Iterable, Iterator, Union

logger = logging.getLogger(__name__)

Source = Union[bytes, str, os.PathLike, BinaryIO]

_BOM = b"\xef\xbb\xbf"
_CHUNK = 1 << 16


class ParseError(ValueError):
    """Malformed input. ``offset`` is a byte offset, ``line`` a 1-based line number."""

    def __init__(self, message: str, *, offset: int | None = None,
                 line: int | None = None, source: str | None = None):
        self.offset = offset
        self.line = line
        self.source = source
        where = []
        if source:
            where.append(source)
        if offset is not None:
            where.append(f"byte {offset}")
        if line is not None:
            where.append(f"line {line}")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)


@dataclass(frozen=True)
class Document:
    docid: str
    text: str

    def __post_init__(self):
        if not self.docid:
            raise ValueError("docid must be non-empty")


@dataclass(frozen=True)
class Topic:
    qid: str
    title: str
    description: str = ""
    narrative: str = ""

    def __post_init__(self):
        if not self.qid:
            raise ValueError("qid must be non-empty")
        if not self.title:
            raise ValueError(f"topic {self.qid}: title must be non-empty")


@dataclass
class Qrels:
    """Relevance judgments keyed by ``(qid, docid)``.

    ``duplicates`` counts lines that superseded an earlier judgment of the
    same pair (last one wins).
    """

    judgments: dict[tuple[str, str], int] = field(default_factory=dict)
    duplicates: int = 0

    def __len__(self) -> int:
        return len(self.judgments)

    def qids(self) -> list[str]:
        return sorted({q for q, _ in self.judgments})

    def grade(self, qid: str, docid: str) -> int | None:
        return self.judgments.get((qid, docid))

    def relevant(self, qid: str) -> set[str]:
        return {d for (q, d), g in self.judgments.items() if q == qid and g > 0}

    def relevant_by_query(self) -> dict[str, set[str]]:
        """Relevant sets for every judged query (possibly empty)."""
        out: dict[str, set[str]] = {}
        for (q, d), g in self.judgments.items():
            rel = out.setdefault(q, set())
            if g > 0:
                rel.add(d)
        return out


@dataclass(frozen=True)
class RunEntry:
    qid: str
    docid: str
    rank: int
    score: float
    tag: str


# --------------------------------------------------------------------------
# input plumbing


def _open_binary(source: Source) -> tuple[BinaryIO, bool, str | None]:
    if isinstance(source, (bytes, bytearray, memoryview)):
        return io.BytesIO(bytes(source)), True, None
    if isinstance(source, (str, os.PathLike)):
        return open(source, "rb"), True, os.fspath(source)
    if isinstance(source, io.TextIOBase):
        raise TypeError("expected a binary stream, got a text stream")
    return source, False, getattr(source, "name", None)


def _read_text(source: Source) -> tuple[str, str | None]:
    stream, owned, name = _open_binary(source)
    try:
        data = stream.read()
    finally:
        if owned:
            stream.close()
    if data.startswith(_BOM):
        data = data[len(_BOM):]
    try:
        return data.decode("utf-8"), name
    except UnicodeDecodeError as exc:
        raise ParseError(f"invalid UTF-8: {exc.reason}", offset=exc.start,
                         source=name) from None


def _tag(name: str) -> tuple[re.Pattern, re.Pattern]:
    # attributes inside the tag are tolerated and ignored
    opening = re.compile(rb"<" + name.encode() + rb"(?:\s[^>]*)?>", re.I)
    closing = re.compile(rb"</" + name.encode() + rb"\s*>", re.I)
    return opening, closing


def _iter_blocks(stream: BinaryIO, tag: str, name: str | None
                 ) -> Iterator[tuple[int, bytes | ParseError]]:
    """Stream ``<tag>...</tag>`` payloads as ``(byte offset, payload)``.

    Memory is bounded by the largest block plus one read chunk. Structural
    problems are yielded as ParseError values instead of payloads.
    """
    opening, closing = _tag(tag)
    buf = bytearray()
    base = 0  # stream offset of buf[0]
    eof = False
    first = True

    def fill() -> bool:
        nonlocal eof, first, base
        if eof:
            return False
        chunk = stream.read(_CHUNK)
        if first:
            first = False
            if chunk.startswith(_BOM):
                chunk = chunk[len(_BOM):]
                base += len(_BOM)
        if not chunk:
            eof = True
            return False
        buf.extend(chunk)
        return True

    fill()
    while True:
        m = opening.search(buf)
        if m is None:
            # keep a tail long enough to hold a split opening tag
            keep = 256
            if len(buf) > keep:
                base += len(buf) - keep
                del buf[:-keep]
            if not fill():
                return
            continue
        start = m.start()
        body_start = m.end()
        while True:
            c = closing.search(buf, body_start)
            nxt = opening.search(buf, body_start)
            if nxt is not None and (c is None or nxt.start() < c.start()):
                yield base + start, ParseError(f"unclosed <{tag}>", offset=base + start, source=name)
                base += nxt.start()
                del buf[:nxt.start()]
                break
            if c is not None:
                payload = bytes(buf[body_start:c.start()])
                yield base + start, payload
                base += c.end()
                del buf[:c.end()]
                break
            if not fill():
                yield base + start, ParseError(f"unclosed <{tag}> at end of input",
                                               offset=base + start, source=name)
                return


def _fields(payload: str, tag: str) -> list[str]:
    pattern = re.compile(
        r"<" + tag + r"(?:\s[^>]*)?>(.*?)(?:</" + tag + r"\s*>|(?=<[A-Za-z/])|\Z)",
        re.I | re.S)
    return pattern.findall(payload)


def _report(err: ParseError, strict: bool, errors: list | None) -> None:
    if strict:
        raise err
    logger.warning("skipping block: %s", err)
    if errors is not None:
        errors.append(err)


# --------------------------------------------------------------------------
# documents


def parse_documents(source: Source, *, strict: bool = False,
                    errors: list[ParseError] | None = None) -> Iterator[Document]:
    """Yield the documents of one ``<doc>`` file in file order.

    Each block must hold a ``<docno>``; its ``<text>`` payloads (if any) form
    the body. Anything else inside the block is ignored.
    """
    stream, owned, name = _open_binary(source)
    try:
        for offset, payload in _iter_blocks(stream, "doc", name):
            if isinstance(payload, ParseError):
                _report(payload, strict, errors)
                continue
            try:
                body = payload.decode("utf-8")
            except UnicodeDecodeError as exc:
                _report(ParseError(f"invalid UTF-8 in <doc>: {exc.reason}",
                                   offset=offset, source=name), strict, errors)
                continue
            docnos = _fields(body, "docno")
            if len(docnos) != 1 or not docnos[0].strip():
                what = "missing <docno>" if not docnos or not docnos[0].strip() else "multiple <docno>"
                _report(ParseError(what, offset=offset, source=name), strict, errors)
                continue
            text = " ".join(t.strip() for t in _fields(body, "text"))
            yield Document(docnos[0].strip(), text)
    finally:
        if owned:
            stream.close()


def iter_corpus(root: str | os.PathLike, *, strict: bool = False,
                errors: list[ParseError] | None = None) -> Iterator[Document]:
    """Parse every regular file below ``root``, visiting paths in sorted order."""
    root = Path(root)
    if not root.is_dir():
        raise FileNotFoundError(f"corpus directory not found: {root}")
    for path in sorted(p for p in root.rglob("*") if p.is_file()):
        yield from parse_documents(path, strict=strict, errors=errors)


# --------------------------------------------------------------------------
# topics

_NUM_PREFIX = re.compile(r"^\s*(?:number\s*:)?\s*", re.I)


def parse_topics(source: Source, *, strict: bool = False,
                 errors: list[ParseError] | None = None) -> list[Topic]:
    """Parse ``<top>`` blocks; ``<desc>`` and ``<narr>`` are optional."""
    stream, owned, name = _open_binary(source)
    topics: list[Topic] = []
    seen: set[str] = set()
    try:
        for offset, payload in _iter_blocks(stream, "top", name):
            if isinstance(payload, ParseError):
                _report(payload, strict, errors)
                continue
            try:
                body = payload.decode("utf-8")
            except UnicodeDecodeError as exc:
                _report(ParseError(f"invalid UTF-8 in <top>: {exc.reason}",
                                   offset=offset, source=name), strict, errors)
                continue
            nums = _fields(body, "num")
            titles = _fields(body, "title")
            qid = _NUM_PREFIX.sub("", nums[0]).strip() if nums else ""
            title = " ".join(titles[0].split()) if titles else ""
            if not qid or not title:
                missing = "<num>" if not qid else "<title>"
                _report(ParseError(f"topic block missing {missing}", offset=offset,
                                   source=name), strict, errors)
                continue
            if qid in seen:
                _report(ParseError(f"duplicate topic number {qid}", offset=offset,
                                   source=name), strict, errors)
                continue
            seen.add(qid)
            desc = _fields(body, "desc")
            narr = _fields(body, "narr")
            topics.append(Topic(
                qid, title,
                " ".join(desc[0].split()) if desc else "",
                " ".join(narr[0].split()) if narr else "",
            ))
    finally:
        if owned:
            stream.close()
    return topics


# --------------------------------------------------------------------------
# qrels


def parse_qrels(source: Source) -> Qrels:
    """Parse ``qid iteration docid grade`` lines. Later duplicates win."""
    text, name = _read_text(source)
    qrels = Qrels()
    for lineno, line in enumerate(text.splitlines(), 1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        parts = stripped.split()
        if len(parts) != 4:
            raise ParseError(f"expected 4 fields, got {len(parts)}", line=lineno, source=name)
        qid, _iteration, docid, grade_s = parts
        try:
            grade = int(grade_s)
        except ValueError:
            raise ParseError(f"non-integer grade {grade_s!r}", line=lineno, source=name) from None
        if grade < 0:
            raise ParseError(f"negative grade {grade}", line=lineno, source=name)
        key = (qid, docid)
        if key in qrels.judgments:
            qrels.duplicates += 1
            logger.warning("%s line %d: duplicate judgment for %s/%s, last wins",
                           name or "qrels", lineno, qid, docid)
        qrels.judgments[key] = grade
    return qrels


# --------------------------------------------------------------------------
# runs


class RunFormatError(ValueError):
    pass


def validate_run(entries: Iterable[RunEntry]) -> list[RunEntry]:
    """Check per-query rank contiguity, score order and docid uniqueness."""
    entries = list(entries)
    by_q: dict[str, list[RunEntry]] = {}
    for e in entries:
        for label, value in (("qid", e.qid), ("docid", e.docid), ("tag", e.tag)):
            if not value or any(ch.isspace() for ch in value):
                raise RunFormatError(f"qid {e.qid} rank {e.rank}: invalid {label} {value!r}")
        if not math.isfinite(e.score):
            raise RunFormatError(f"qid {e.qid} rank {e.rank}: non-finite score")
        by_q.setdefault(e.qid, []).append(e)
    for qid, rows in by_q.items():
        rows = sorted(rows, key=lambda r: r.rank)
        docids = set()
        for i, row in enumerate(rows, 1):
            if row.rank != i:
                raise RunFormatError(f"qid {qid} rank {row.rank}: non-contiguous rank")
            if row.docid in docids:
                raise RunFormatError(f"qid {qid} rank {row.rank}: duplicate docid {row.docid}")
            docids.add(row.docid)
            if i > 1 and row.score > rows[i - 2].score:
                raise RunFormatError(f"qid {qid} rank {row.rank}: score increases with rank")
    return entries


def format_run_line(e: RunEntry) -> str:
    # repr() is the shortest string that round-trips the float exactly
    return f"{e.qid} Q0 {e.docid} {e.rank} {e.score!r} {e.tag}\n"


def write_run(entries: Iterable[RunEntry], sink) -> None:
    """Write entries in TREC run format to a path or text stream."""
    entries = validate_run(entries)
    if isinstance(sink, (str, os.PathLike)):
        with open(sink, "w", encoding="utf-8", newline="\n") as fh:
            fh.writelines(format_run_line(e) for e in entries)
    else:
        sink.writelines(format_run_line(e) for e in entries)


def parse_run(source: Source) -> list[RunEntry]:
    text, name = _read_text(source)
    out = []
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        parts = line.split()
        if len(parts) != 6:
            raise ParseError(f"expected 6 fields, got {len(parts)}", line=lineno, source=name)
        qid, _q0, docid, rank_s, score_s, tag = parts
        try:
            rank = int(rank_s)
            score = float(score_s)
        except ValueError:
            raise ParseError(f"bad rank or score in {line.strip()!r}", line=lineno,
                             source=name) from None
        if rank < 1:
            raise ParseError(f"rank must be positive, got {rank}", line=lineno, source=name)
        out.append(RunEntry(qid, docid, rank, score, tag))
    return out
