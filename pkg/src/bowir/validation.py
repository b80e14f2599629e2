"""Input coercion and checks shared by the estimator wrappers."""

from __future__ import annotations

from typing import Iterable

from .corpus_io import Document, Topic
from .ranking import FIELD_SETS, MODEL_IDS


def check_documents(X) -> list[Document]:
    """Accept Documents, ``(docid, text)`` pairs or bare strings (numbered from 0)."""
    docs = []
    for i, item in enumerate(X):
        if isinstance(item, Document):
            docs.append(item)
        elif isinstance(item, str):
            docs.append(Document(str(i), item))
        elif isinstance(item, tuple) and len(item) == 2:
            docs.append(Document(str(item[0]), str(item[1])))
        else:
            raise TypeError(f"document {i}: expected Document, (docid, text) or str, "
                            f"got {type(item).__name__}")
    if not docs:
        raise ValueError("at least one document is required")
    return docs


def check_topics(X) -> list[Topic]:
    """Accept Topics, ``(qid, text)`` pairs or bare strings used as titles."""
    topics = []
    for i, item in enumerate(X):
        if isinstance(item, Topic):
            topics.append(item)
        elif isinstance(item, str):
            topics.append(Topic(str(i), item))
        elif isinstance(item, tuple) and len(item) == 2:
            topics.append(Topic(str(item[0]), str(item[1])))
        else:
            raise TypeError(f"query {i}: expected Topic, (qid, text) or str, "
                            f"got {type(item).__name__}")
    return topics


def check_model(model: str) -> str:
    if model not in MODEL_IDS:
        raise ValueError(f"model must be one of {MODEL_IDS}, got {model!r}")
    return model


def check_fields(fields: str) -> str:
    if fields not in FIELD_SETS:
        raise ValueError(f"fields must be one of {FIELD_SETS}, got {fields!r}")
    return fields


def check_positive_int(value, name: str) -> int:
    if isinstance(value, bool) or int(value) != value or value < 1:
        raise ValueError(f"{name} must be a positive integer, got {value!r}")
    return int(value)


def check_texts(X: Iterable) -> list[str]:
    if isinstance(X, str):
        raise TypeError("expected an iterable of strings, got a single string")
    out = list(X)
    for i, x in enumerate(out):
        if not isinstance(x, str):
            raise TypeError(f"item {i}: expected str, got {type(x).__name__}")
    return out
