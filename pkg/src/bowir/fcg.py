"""Frequent case generation: expand query terms into inflected variants.

A paradigm file lists, per line, a match suffix and the variant suffixes to
generate::

    *	0,s,med,mer,ming

``*`` matches every term and ``0`` stands for the empty suffix. The first
paradigm whose suffix ends the term wins; the suffix is stripped and each
variant suffix appended. Variants are matched against a plain (unstemmed)
index, each inheriting the weight of the term it came from.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterable

from .corpus_io import ParseError, Source, _read_text
from .textpipe import normalize


class FcgError(ValueError):
    pass


@dataclass(frozen=True)
class Paradigm:
    match: str  # "" matches every term
    variants: tuple[str, ...]

    def __post_init__(self):
        if not self.variants:
            raise ValueError("paradigm needs at least one variant suffix")
        if len(set(self.variants)) != len(self.variants):
            raise ValueError("duplicate variant suffix")

    def applies_to(self, term: str) -> bool:
        if not self.match:
            return True
        return len(term) > len(self.match) and term.endswith(self.match)


@dataclass(frozen=True)
class ParadigmSet:
    paradigms: tuple[Paradigm, ...] = ()

    def __len__(self):
        return len(self.paradigms)

    def __iter__(self):
        return iter(self.paradigms)


def parse_paradigms(text: str, name: str | None = None) -> ParadigmSet:
    out = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        match, sep, rest = line.partition("\t")
        if not sep:
            raise ParseError("expected match_suffix<TAB>variants", line=lineno, source=name)
        match = match.strip()
        match = "" if match == "*" else normalize(match)
        variants = [v.strip() for v in rest.split(",")]
        if not rest.strip() or any(not v for v in variants):
            raise ParseError("empty variant list or empty variant", line=lineno, source=name)
        variants = ["" if v == "0" else normalize(v) for v in variants]
        if len(set(variants)) != len(variants):
            raise ParseError("duplicate variant suffix", line=lineno, source=name)
        out.append(Paradigm(match, tuple(variants)))
    return ParadigmSet(tuple(out))


def load_paradigms(source: Source) -> ParadigmSet:
    text, name = _read_text(source)
    return parse_paradigms(text, name)


def generate_variants(term: str, paradigms: ParadigmSet | Iterable[Paradigm]) -> set[str]:
    """All variant forms of ``term``; the term itself is always included."""
    for p in paradigms:
        if p.applies_to(term):
            base = term[:len(term) - len(p.match)]
            return {term} | {base + v for v in p.variants}
    return {term}


def expand_query(query, paradigms: ParadigmSet):
    """Replace each term by its variants at equal weight; coinciding variants add up."""
    if not paradigms:
        return query
    weights: dict[str, int] = {}
    for term in sorted(query.terms):
        qtf = query.terms[term]
        for v in generate_variants(term, paradigms):
            weights[v] = weights.get(v, 0) + qtf
    return replace(query, terms=dict(sorted(weights.items())))


def check_plain_index(index_or_config) -> None:
    """Refuse expansion against an index built with a stemmer."""
    config = getattr(index_or_config, "config", index_or_config)
    if config.stemmer is not None:
        raise FcgError("frequent case generation requires a plain (unstemmed) index: variants "
                       "are matched against inflected word forms, but this index was stemmed")

