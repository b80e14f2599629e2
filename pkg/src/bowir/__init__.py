"""Bag-of-words ad hoc retrieval: indexing, ranking, query expansion and evaluation.

The scikit-learn style wrappers live in :mod:`bowir.estimators`.
"""

from .corpus_io import (Document, ParseError, Qrels, RunEntry, Topic, iter_corpus,
                        parse_documents, parse_qrels, parse_run, parse_topics, write_run)
from .evaluation import (MetricsReport, average_precision, evaluate, fallout,
                         mean_average_precision, precision_at_k, recall)
from .fcg import ParadigmSet, expand_query, generate_variants, load_paradigms
from .indexer import CollectionStats, InvertedIndex, build_index, load_index, save_index
from .ranking import (MODEL_IDS, ModelParams, Query, ScoredDoc, build_query, run_topics,
                      score_bm25, score_dirichlet, score_hiemstra, score_in_expb2,
                      score_tfidf, search)
from .textpipe import (NormalizeOptions, PipelineConfig, StemRuleSet, StopList,
                       apply_stoplist, learn_suffix_rules, normalize, stem, tokenize,
                       top_frequency_terms)

__version__ = "0.1.0"
