"""Five bag-of-words ranking models and top-k search over an inverted index.

A document's score is the sum over matching query terms of
``qtf * w(term, doc)``. Only documents containing at least one query term
are candidates. Ties are broken by document ordinal, ascending.

The per-term weight functions accept scalars or numpy arrays for the
per-document arguments (``tf``, ``dl``) so one call can score a whole
postings list.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, replace
from typing import Iterable, Mapping

import numpy as np

from .corpus_io import RunEntry, Topic
from .indexer import CollectionStats, InvertedIndex
from .textpipe import PipelineConfig

MODEL_IDS = ("tfidf", "bm25", "dirichlet_lm", "hiemstra_lm", "in_expb2")
FIELD_SETS = ("T", "TD", "TDN")
DEFAULT_K = 1000
SCORE_DIGITS = 12


class PipelineMismatchError(ValueError):
    pass


class UnknownModelError(ValueError):
    pass


class EmptyQueryError(ValueError):
    def __init__(self, qid: str):
        self.qid = qid
        super().__init__(f"empty query for topic {qid}")


@dataclass(frozen=True)
class ModelParams:
    k1: float = 1.2
    b: float = 0.75
    mu: float = 2500.0
    lam: float = 0.15
    c: float = 1.0

    def __post_init__(self):
        if not self.k1 >= 0:
            raise ValueError(f"k1 must be >= 0, got {self.k1}")
        if not 0 <= self.b <= 1:
            raise ValueError(f"b must lie in [0, 1], got {self.b}")
        if not self.mu > 0:
            raise ValueError(f"mu must be > 0, got {self.mu}")
        if not 0 < self.lam < 1:
            raise ValueError(f"lambda must lie in (0, 1), got {self.lam}")
        if not self.c > 0:
            raise ValueError(f"c must be > 0, got {self.c}")

    # command-line and estimator spelling -> field name
    KEYS = {"k1": "k1", "b": "b", "mu": "mu", "lambda": "lam", "c": "c"}

    def with_overrides(self, overrides: Mapping[str, float]) -> "ModelParams":
        changes = {}
        for key, value in overrides.items():
            if key not in self.KEYS:
                raise KeyError(f"unknown model parameter {key!r}; expected one of {sorted(self.KEYS)}")
            changes[self.KEYS[key]] = float(value)
        return replace(self, **changes)


@dataclass(frozen=True)
class Query:
    qid: str
    terms: dict[str, int]
    fields: str = "T"
    # canonical PipelineConfig text the terms were produced under
    pipeline: str = ""

    def __post_init__(self):
        for t, w in self.terms.items():
            if w < 1:
                raise ValueError(f"query {self.qid}: term {t!r} has weight {w} < 1")


@dataclass(frozen=True)
class ScoredDoc:
    ordinal: int
    score: float


# --------------------------------------------------------------------------
# per-term weights


def _check_collection(df, n):
    if n <= 0:
        raise ValueError("collection has no documents")
    if df <= 0:
        raise ValueError("document frequency must be positive (skip unseen terms)")


def _check_tf(tf):
    if np.any(np.asarray(tf) < 1):
        raise ValueError("tf must be >= 1")


def _length_factor(dl, avdl, params):
    return params.k1 * (1.0 - params.b + params.b * np.divide(dl, avdl))


def score_tfidf(tf, df, dl, params: ModelParams, N, avdl):
    """Saturated tf times ``ln(1 + N/df)``."""
    _check_tf(tf)
    _check_collection(df, N)
    return tf / (tf + _length_factor(dl, avdl, params)) * math.log(1.0 + N / df)


def score_bm25(tf, df, dl, params: ModelParams, N, avdl):
    _check_tf(tf)
    _check_collection(df, N)
    idf = math.log((N - df + 0.5) / (df + 0.5) + 1.0)
    return idf * tf * (params.k1 + 1.0) / (tf + _length_factor(dl, avdl, params))


def score_dirichlet(tf, F, dl, params: ModelParams, total_tokens):
    """Dirichlet-smoothed log likelihood of one matching term."""
    if total_tokens <= 0:
        raise ValueError("collection has no tokens")
    if F < 1:
        raise ValueError("collection frequency must be >= 1")
    return np.log((tf + params.mu * F / total_tokens) / (dl + params.mu))


def score_hiemstra(tf, F, dl, params: ModelParams, total_tokens):
    _check_tf(tf)
    if F < 1 or total_tokens <= 0:
        raise ValueError("collection frequency and size must be positive")
    if np.any(np.asarray(dl) < 1):
        raise RuntimeError("document with a matching term has zero length")
    lam = params.lam
    return np.log1p(lam * tf * total_tokens / ((1.0 - lam) * F * dl))


def score_in_expb2(tf, df, F, dl, params: ModelParams, N, avdl):
    """DFR In_expB2: inverse expected df, Bernoulli after-effect, normalization 2."""
    _check_tf(tf)
    _check_collection(df, N)
    tfn = tf * np.log2(1.0 + params.c * avdl / dl)
    after_effect = (F + 1.0) / (df * (tfn + 1.0))
    n_exp = N * (1.0 - ((N - 1.0) / N) ** F)
    return after_effect * tfn * math.log2((N + 1.0) / (n_exp + 0.5))


def term_weight(model: str, tf, df: int, cf: int, dl, stats: CollectionStats, params: ModelParams):
    """Dispatch to the named model with the index's collection statistics."""
    if model == "tfidf":
        return score_tfidf(tf, df, dl, params, stats.num_docs, stats.avdl)
    if model == "bm25":
        return score_bm25(tf, df, dl, params, stats.num_docs, stats.avdl)
    if model == "dirichlet_lm":
        return score_dirichlet(tf, cf, dl, params, stats.total_tokens)
    if model == "hiemstra_lm":
        return score_hiemstra(tf, cf, dl, params, stats.total_tokens)
    if model == "in_expb2":
        return score_in_expb2(tf, df, cf, dl, params, stats.num_docs, stats.avdl)
    raise UnknownModelError(f"unknown model {model!r}; expected one of {', '.join(MODEL_IDS)}")


# --------------------------------------------------------------------------
# queries


def _topic_text(topic: Topic, fields: str) -> str:
    if fields not in FIELD_SETS:
        raise ValueError(f"fields must be one of {FIELD_SETS}, got {fields!r}")
    parts = [topic.title]
    if "D" in fields:
        parts.append(topic.description)
    if "N" in fields:
        parts.append(topic.narrative)
    return " ".join(parts)


def query_from_text(qid: str, text: str, config: PipelineConfig, fields: str = "T") -> Query:
    terms = Counter(config.analyze(text))
    if not terms:
        raise EmptyQueryError(qid)
    return Query(qid, dict(sorted(terms.items())), fields, config.canonical())


def build_query(topic: Topic, fields: str, config: PipelineConfig, fcg=None) -> Query:
    """Build a weighted query from the selected topic fields.

    ``fcg`` is an optional paradigm set; its variants expand every term.
    Expansion needs plain word forms, so it is refused under a stemmer.
    """
    query = query_from_text(topic.qid, _topic_text(topic, fields), config, fields)
    if fcg is not None:
        from .fcg import check_plain_index, expand_query
        check_plain_index(config)
        query = expand_query(query, fcg)
    return query


# --------------------------------------------------------------------------
# search


def score_all(index: InvertedIndex, query: Query, model: str, params: ModelParams | None = None
              ) -> tuple[np.ndarray, np.ndarray]:
    """Accumulated scores for every ordinal plus a candidate mask."""
    if model not in MODEL_IDS:
        raise UnknownModelError(f"unknown model {model!r}; expected one of {', '.join(MODEL_IDS)}")
    canonical = index.config.canonical()
    if query.pipeline and query.pipeline != canonical:
        raise PipelineMismatchError(
            "query pipeline does not match index pipeline\n"
            f"query:\n{query.pipeline}index:\n{canonical}")
    params = params or ModelParams()
    st = index.stats
    scores = np.zeros(st.num_docs, dtype=np.float64)
    candidate = np.zeros(st.num_docs, dtype=bool)
    # fixed term order keeps floating-point accumulation deterministic
    for term in sorted(query.terms):
        hit = index.lookup(term)
        if hit is None:
            continue
        entry, post = hit
        # weigh each distinct (tf, dl) once: equal inputs must give bit-equal
        # weights, which vectorized log kernels do not promise across lanes
        dl = index.doclens[post.docs]
        pairs, inverse = np.unique(np.stack([post.tfs, dl]), axis=1, return_inverse=True)
        w = term_weight(model, pairs[0].astype(np.float64), entry.df, entry.cf,
                        pairs[1].astype(np.float64), st, params)
        scores[post.docs] += query.terms[term] * np.asarray(w)[inverse.reshape(-1)]
        candidate[post.docs] = True
    return scores, candidate


def search(index: InvertedIndex, query: Query, model: str = "bm25",
           params: ModelParams | None = None, k: int = DEFAULT_K) -> list[ScoredDoc]:
    """Top-``k`` candidates by descending score, ties by ascending ordinal."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    scores, candidate = score_all(index, query, model, params)
    ords = np.flatnonzero(candidate)
    rounded = round_significant(scores[ords])
    # lexsort: last key is primary
    order = np.lexsort((ords, -rounded))[:k]
    return [ScoredDoc(int(ords[i]), float(rounded[i])) for i in order]


def round_significant(x: np.ndarray, digits: int = SCORE_DIGITS) -> np.ndarray:
    """Round to ``digits`` significant figures.

    Mathematically equal scores reached through different float paths (say
    tf/dl = 1/3 and 3/9) differ in the last bits; rounding makes them tie
    exactly so ordinal order decides, as it must.
    """
    x = np.asarray(x, dtype=np.float64)
    out = np.zeros_like(x)
    nz = x != 0
    scale = 10.0 ** (digits - 1 - np.floor(np.log10(np.abs(x[nz]))))
    out[nz] = np.round(x[nz] * scale) / scale
    return out



def run_topics(index: InvertedIndex, topics: Iterable[Topic], fields: str = "TD",
               model: str = "bm25", params: ModelParams | None = None, k: int = DEFAULT_K,
               tag: str | None = None, fcg=None,
               skipped: list[str] | None = None) -> list[RunEntry]:
    """Search every topic and return one ranked block per topic.

    Topics whose query is empty after the pipeline are left out; their qids
    are appended to ``skipped`` when a list is given.
    """
    if fcg is not None:
        from .fcg import check_plain_index
        check_plain_index(index)
    tag = tag or model
    entries: list[RunEntry] = []
    for topic in topics:
        try:
            query = build_query(topic, fields, index.config, fcg)
        except EmptyQueryError:
            if skipped is not None:
                skipped.append(topic.qid)
            continue
        for rank, hit in enumerate(search(index, query, model, params, k), 1):
            entries.append(RunEntry(topic.qid, index.docids[hit.ordinal], rank, hit.score, tag))
    return entries
