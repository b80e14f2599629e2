"""Text-to-term pipeline: tokenization, normalization, stop words, stemming.

Also hosts the two resource-building helpers used when preparing a new
language: frequency-ranked stop-word candidates and suffix-rule learning
from a lexicon.
"""

from __future__ import annotations

import hashlib
import os
import unicodedata
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import regex

# Zero-width characters that never separate words.
_ZERO_WIDTH = dict.fromkeys(map(ord, "​‌‍⁠﻿"))
_WORD = regex.compile(r"[\p{L}\p{M}\p{N}]+")

DIGIT_POLICIES = ("keep", "drop")


def tokenize(text: str) -> list[str]:
    """Split on whitespace and punctuation, keeping runs of letters, marks and digits."""
    return _WORD.findall(text.translate(_ZERO_WIDTH))


@dataclass(frozen=True)
class NormalizeOptions:
    digits: str = "keep"

    def __post_init__(self):
        if self.digits not in DIGIT_POLICIES:
            raise ValueError(f"digit policy must be one of {DIGIT_POLICIES}, got {self.digits!r}")


def normalize(token: str, config: "PipelineConfig | NormalizeOptions | None" = None) -> str:
    """NFC, zero-width removal and case folding; all-digit tokens vanish under ``digits='drop'``."""
    if config is None:
        digits = "keep"
    elif isinstance(config, PipelineConfig):
        digits = config.normalize.digits
    else:
        digits = config.digits
    term = token.translate(_ZERO_WIDTH)
    # lower() can leave a non-NFC string behind (and vice versa); iterate to a fixed point
    for _ in range(4):
        nxt = unicodedata.normalize("NFC", term).lower()
        if nxt == term:
            break
        term = nxt
    if digits == "drop" and term and term.isdigit():
        return ""
    return term


class StopList(frozenset):
    """Set of normalized stop terms."""

    @classmethod
    def from_terms(cls, terms: Iterable[str], options: NormalizeOptions | None = None) -> "StopList":
        out = (normalize(t, options) for t in terms)
        return cls(t for t in out if t)

    def canonical(self) -> str:
        return "".join(t + "\n" for t in sorted(self))

    def digest(self) -> str:
        return hashlib.sha256(self.canonical().encode("utf-8")).hexdigest()


def load_stoplist(path: str | os.PathLike) -> StopList:
    """One term per line; ``#`` starts a comment line, blank lines are skipped."""
    with open(path, encoding="utf-8-sig") as fh:
        lines = (ln.strip() for ln in fh)
        return StopList.from_terms(ln for ln in lines if ln and not ln.startswith("#"))


def save_stoplist(stoplist: Iterable[str], path: str | os.PathLike) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(StopList(stoplist).canonical())


def apply_stoplist(terms: Sequence[str], stoplist: Iterable[str] | None) -> list[str]:
    if not stoplist:
        return list(terms)
    stop = stoplist if isinstance(stoplist, (set, frozenset)) else set(stoplist)
    return [t for t in terms if t not in stop]


@dataclass(frozen=True)
class StemRule:
    suffix: str
    min_stem_len: int

    def __post_init__(self):
        if not self.suffix:
            raise ValueError("suffix must be non-empty")
        if self.min_stem_len < 1:
            raise ValueError(f"min_stem_len must be positive, got {self.min_stem_len}")


@dataclass(frozen=True)
class StemRuleSet:
    """Suffix-stripping rules kept in canonical order: longest suffix first, then lexicographic."""

    rules: tuple[StemRule, ...] = ()
    default_min_stem_len: int = 2

    def __post_init__(self):
        rules = tuple(r if isinstance(r, StemRule) else StemRule(*r) for r in self.rules)
        seen = set()
        for r in rules:
            if r.suffix in seen:
                raise ValueError(f"duplicate suffix {r.suffix!r}")
            seen.add(r.suffix)
        if self.default_min_stem_len < 1:
            raise ValueError("default_min_stem_len must be positive")
        object.__setattr__(self, "rules", tuple(sorted(rules, key=lambda r: (-len(r.suffix), r.suffix))))

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[str, int]], default_min_stem_len: int = 2) -> "StemRuleSet":
        return cls(tuple(StemRule(s, m) for s, m in pairs), default_min_stem_len)

    def __len__(self) -> int:
        return len(self.rules)

    def __iter__(self):
        return iter(self.rules)

    def suffixes(self) -> list[str]:
        return [r.suffix for r in self.rules]

    def canonical(self) -> str:
        lines = [f"! min_stem_len_default {self.default_min_stem_len}\n"]
        lines += [f"{r.suffix}\t{r.min_stem_len}\n" for r in self.rules]
        return "".join(lines)

    def digest(self) -> str:
        return hashlib.sha256(self.canonical().encode("utf-8")).hexdigest()


def parse_stem_rules(text: str) -> StemRuleSet:
    """Parse ``suffix<TAB>min_stem_len`` lines with an optional default header.

    A line holding only a suffix takes the default minimum stem length.
    """
    default = 2
    pairs: list[tuple[str, int | None]] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("!"):
            parts = line[1:].split()
            if len(parts) != 2 or parts[0] != "min_stem_len_default":
                raise ValueError(f"line {lineno}: unknown header {line!r}")
            default = _positive_int(parts[1], lineno)
            continue
        parts = line.split("\t")
        if len(parts) > 2:
            raise ValueError(f"line {lineno}: expected suffix<TAB>min_stem_len")
        suffix = normalize(parts[0].strip())
        if not suffix:
            raise ValueError(f"line {lineno}: empty suffix")
        pairs.append((suffix, _positive_int(parts[1], lineno) if len(parts) == 2 else None))
    try:
        return StemRuleSet(tuple(StemRule(s, default if m is None else m) for s, m in pairs), default)
    except ValueError as exc:
        raise ValueError(f"stem rules: {exc}") from None


def _positive_int(s: str, lineno: int) -> int:
    try:
        value = int(s.strip())
    except ValueError:
        raise ValueError(f"line {lineno}: not an integer: {s!r}") from None
    if value < 1:
        raise ValueError(f"line {lineno}: expected a positive integer, got {value}")
    return value


def load_stem_rules(path: str | os.PathLike) -> StemRuleSet:
    with open(path, encoding="utf-8-sig") as fh:
        return parse_stem_rules(fh.read())


def save_stem_rules(rules: StemRuleSet, path: str | os.PathLike) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(rules.canonical())


def stem(term: str, rules: StemRuleSet | None) -> str:
    """Strip the first (longest) matching suffix that leaves a long enough stem.

    Single pass: at most one rule fires.
    """
    if not rules:
        return term
    n = len(term)
    for rule in rules.rules:
        if n - len(rule.suffix) >= rule.min_stem_len and term.endswith(rule.suffix):
            return term[:n - len(rule.suffix)]
    return term


def top_frequency_terms(frequencies: Mapping[str, int], k: int) -> list[tuple[str, int]]:
    """The ``k`` most frequent terms, ties broken alphabetically.

    Output is a candidate list for manual curation, not a stop list.
    """
    if k <= 0:
        raise ValueError(f"k must be positive, got {k}")
    return sorted(frequencies.items(), key=lambda kv: (-kv[1], kv[0]))[:k]


def learn_suffix_rules(lexicon: Iterable[str], max_suffix_len: int, min_freq: int,
                       min_stem_len: int) -> StemRuleSet:
    """Learn suffixes that attach to at least ``min_freq`` words already in the lexicon.

    A term ``t = stem + s`` counts toward suffix ``s`` when ``stem`` is itself a
    lexicon member of length >= ``min_stem_len``.
    """
    words = set(lexicon)
    if not words:
        raise ValueError("lexicon is empty")
    if max_suffix_len < 1 or min_freq < 1 or min_stem_len < 1:
        raise ValueError("max_suffix_len, min_freq and min_stem_len must be positive")
    counts: Counter[str] = Counter()
    for t in words:
        for n in range(1, min(max_suffix_len, len(t) - min_stem_len) + 1):
            if t[:-n] in words:
                counts[t[-n:]] += 1
    return StemRuleSet(
        tuple(StemRule(s, min_stem_len) for s, c in counts.items() if c >= min_freq),
        min_stem_len,
    )


@dataclass(frozen=True)
class PipelineConfig:
    """Transforms applied to document and query text.

    The baseline configuration has neither a stop list nor a stemmer.
    """

    normalize: NormalizeOptions = field(default_factory=NormalizeOptions)
    stoplist: StopList | None = None
    stemmer: StemRuleSet | None = None

    def canonical(self) -> str:
        items = {
            "casefold": "simple",
            "digits": self.normalize.digits,
            "nfc": "on",
            "stemmer": f"sha256:{self.stemmer.digest()}" if self.stemmer is not None else "none",
            "stoplist": f"sha256:{self.stoplist.digest()}" if self.stoplist is not None else "none",
            "zero_width": "strip",
        }
        return "".join(f"{k}={items[k]}\n" for k in sorted(items))

    def __eq__(self, other):
        if not isinstance(other, PipelineConfig):
            return NotImplemented
        return self.canonical() == other.canonical()

    def __hash__(self):
        return hash(self.canonical())

    def analyze(self, text: str) -> list[str]:
        """Run tokenize, normalize, stop-word removal and stemming over ``text``."""
        terms = [t for t in (normalize(tok, self.normalize) for tok in tokenize(text)) if t]
        terms = apply_stoplist(terms, self.stoplist)
        if self.stemmer:
            terms = [stem(t, self.stemmer) for t in terms]
            if self.stoplist:
                # a stem may coincide with a stop word
                terms = apply_stoplist(terms, self.stoplist)
        return terms


def parse_canonical(text: str) -> dict[str, str]:
    out = {}
    for line in text.splitlines():
        if line:
            key, _, value = line.partition("=")
            out[key] = value
    return out
