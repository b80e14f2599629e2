"""scikit-learn style wrappers so the toolkit composes with Pipelines and grid search.

``Retriever.fit`` builds the index, ``predict`` returns ranked docids and
``score`` returns MAP against a :class:`~bowir.corpus_io.Qrels`. Model
parameters round-trip through ``get_params``/``set_params``, so a sweep can
``clone`` one estimator per setting and share an index via ``from_index``.
"""

from __future__ import annotations

import os

from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from . import evaluation, fcg, indexer, ranking, textpipe
from .validation import (check_documents, check_fields, check_model, check_positive_int,
                         check_texts, check_topics)


def _resolve_stoplist(stoplist, digits):
    if stoplist is None:
        return None
    if isinstance(stoplist, (str, os.PathLike)):
        return textpipe.load_stoplist(stoplist)
    return textpipe.StopList.from_terms(stoplist, textpipe.NormalizeOptions(digits))


def _resolve_rules(rules):
    if rules is None or isinstance(rules, textpipe.StemRuleSet):
        return rules
    if isinstance(rules, (str, os.PathLike)):
        return textpipe.load_stem_rules(rules)
    return textpipe.StemRuleSet.from_pairs(rules)


def _resolve_paradigms(paradigms):
    if paradigms is None or isinstance(paradigms, fcg.ParadigmSet):
        return paradigms
    return fcg.load_paradigms(paradigms)


def make_config(stoplist=None, stem_rules=None, digits="keep") -> textpipe.PipelineConfig:
    return textpipe.PipelineConfig(textpipe.NormalizeOptions(digits),
                                   _resolve_stoplist(stoplist, digits), _resolve_rules(stem_rules))


class TextAnalyzer(TransformerMixin, BaseEstimator):
    """Turn raw texts into lists of index terms.

    Parameters
    ----------
    stoplist : path or iterable of str, optional
    stem_rules : StemRuleSet, path, or iterable of (suffix, min_stem_len), optional
    digits : {"keep", "drop"}
    """

    def __init__(self, stoplist=None, stem_rules=None, digits="keep"):
        self.stoplist = stoplist
        self.stem_rules = stem_rules
        self.digits = digits

    def fit(self, X=None, y=None):
        self.config_ = make_config(self.stoplist, self.stem_rules, self.digits)
        return self

    def transform(self, X):
        check_is_fitted(self, "config_")
        return [self.config_.analyze(t) for t in check_texts(X)]


class SuffixRuleLearner(TransformerMixin, BaseEstimator):
    """Learn suffix-stripping rules from a lexicon, then stem with them."""

    def __init__(self, max_suffix_len=4, min_freq=5, min_stem_len=2):
        self.max_suffix_len = max_suffix_len
        self.min_freq = min_freq
        self.min_stem_len = min_stem_len

    def fit(self, X, y=None):
        self.rules_ = textpipe.learn_suffix_rules(
            check_texts(X),
            check_positive_int(self.max_suffix_len, "max_suffix_len"),
            check_positive_int(self.min_freq, "min_freq"),
            check_positive_int(self.min_stem_len, "min_stem_len"))
        return self

    def transform(self, X):
        check_is_fitted(self, "rules_")
        return [textpipe.stem(t, self.rules_) for t in check_texts(X)]


class StopwordCandidates(BaseEstimator):
    """Most frequent terms of a text collection, for manual stop-list curation."""

    def __init__(self, top_k=400, digits="keep"):
        self.top_k = top_k
        self.digits = digits

    def fit(self, X, y=None):
        config = make_config(digits=self.digits)
        counts: dict[str, int] = {}
        for text in check_texts(X):
            for term in config.analyze(text):
                counts[term] = counts.get(term, 0) + 1
        self.candidates_ = textpipe.top_frequency_terms(
            counts, check_positive_int(self.top_k, "top_k"))
        return self


class Retriever(BaseEstimator):
    """Index a collection and rank it for queries under one of five models.

    ``X`` for :meth:`fit` holds documents (``Document``, ``(docid, text)`` or
    str); ``X`` for :meth:`predict` holds topics (``Topic``, ``(qid, text)`` or
    str). Passing ``paradigms`` turns on frequent case generation, which needs
    ``stem_rules=None``.
    """

    def __init__(self, model="bm25", k1=1.2, b=0.75, mu=2500.0, lam=0.15, c=1.0, k=1000,
                 fields="TD", stoplist=None, stem_rules=None, paradigms=None, digits="keep",
                 n_jobs=1):
        self.model = model
        self.k1 = k1
        self.b = b
        self.mu = mu
        self.lam = lam
        self.c = c
        self.k = k
        self.fields = fields
        self.stoplist = stoplist
        self.stem_rules = stem_rules
        self.paradigms = paradigms
        self.digits = digits
        self.n_jobs = n_jobs

    def fit(self, X, y=None):
        config = make_config(self.stoplist, self.stem_rules, self.digits)
        if self.paradigms is not None:
            fcg.check_plain_index(config)
        self.index_ = indexer.build_index(check_documents(X), config, n_jobs=self.n_jobs)
        return self

    @classmethod
    def from_index(cls, index: indexer.InvertedIndex, **params) -> "Retriever":
        """Wrap an already built (or loaded) index without re-indexing."""
        est = cls(**params)
        est.index_ = index
        return est

    @property
    def model_params_(self) -> ranking.ModelParams:
        return ranking.ModelParams(self.k1, self.b, self.mu, self.lam, self.c)

    def run(self, X, tag=None) -> list:
        """Ranked run entries for every query in ``X``."""
        check_is_fitted(self, "index_")
        return ranking.run_topics(
            self.index_, check_topics(X), check_fields(self.fields), check_model(self.model),
            self.model_params_, check_positive_int(self.k, "k"), tag,
            _resolve_paradigms(self.paradigms))

    def predict(self, X) -> list[list[str]]:
        """Ranked docids per query; an empty list when the query has no terms."""
        topics = check_topics(X)
        by_q: dict[str, list[str]] = {t.qid: [] for t in topics}
        for e in self.run(topics):
            by_q[e.qid].append(e.docid)
        return [by_q[t.qid] for t in topics]

    def score(self, X, y) -> float:
        """Mean average precision of the run for ``X`` against qrels ``y``."""
        return evaluation.mean_average_precision(self.run(X), y)
