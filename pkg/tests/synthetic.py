"""Deterministic synthetic corpora for tests."""

import random

from bowir.corpus_io import Document


def zipf_vocab(rng, size):
    letters = "abcdefghijklmnopqrstuvwxyz"
    vocab = set()
    while len(vocab) < size:
        vocab.add("".join(rng.choice(letters) for _ in range(rng.randint(2, 7))))
    return sorted(vocab)


def corpus(n_docs, seed=0, vocab_size=500, min_len=0, max_len=60, suffixes=("", "s", "ing", "ed")):
    rng = random.Random(seed)
    vocab = zipf_vocab(rng, vocab_size)
    weights = [1 / (i + 1) for i in range(len(vocab))]
    docs = []
    for i in range(n_docs):
        n = rng.randint(min_len, max_len)
        words = [w + rng.choice(suffixes) for w in rng.choices(vocab, weights, k=n)]
        # sprinkle punctuation and case so the tokenizer has work to do
        text = " ".join(w.upper() if rng.random() < 0.05 else w for w in words)
        text = text.replace(" ", ", ", n // 10)
        docs.append(Document(f"doc{i:05d}", text))
    return docs, vocab


def small_corpus(rng, n_docs, vocab_size=12, max_len=15):
    vocab = [f"w{i}" for i in range(vocab_size)]
    weights = [1 / (i + 1) for i in range(vocab_size)]
    docs = []
    for i in range(n_docs):
        n = rng.randint(1, max_len)
        docs.append(Document(f"d{i}", " ".join(rng.choices(vocab, weights, k=n))))
    return docs, vocab
