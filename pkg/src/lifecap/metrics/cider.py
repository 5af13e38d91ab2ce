"""CIDEr: TF-IDF weighted n-gram cosine similarity.

Plain CIDEr, not the length-penalised and clipped CIDEr-D. Document
frequency counts how many images' reference sets contain an n-gram, and the
IDF of an n-gram is ``log(N / max(1, df))`` over ``N`` images. A corpus of a
single image therefore gives every n-gram zero weight and scores 0.
"""

from __future__ import annotations

import math
from collections import Counter

from lifecap.errors import UndefinedScoreError
from lifecap.metrics.ngrams import ngram_counts

SCALE = 10.0


def document_frequency(pairs, max_n=4) -> Counter:
    df = Counter()
    for _, refs in pairs:
        seen = set()
        for ref in refs:
            for n in range(1, max_n + 1):
                seen.update(ngram_counts(ref, n))
        df.update(seen)
    return df


def _tfidf(tokens, n, df, log_n):
    return {g: c * (log_n - math.log(max(1.0, df.get(g, 0)))) for g, c in ngram_counts(tokens, n).items()}


def _cosine(a, b):
    na = math.sqrt(sum(v * v for v in a.values()))
    nb = math.sqrt(sum(v * v for v in b.values()))
    if na == 0.0 or nb == 0.0:
        return 0.0
    dot = sum(v * b.get(g, 0.0) for g, v in a.items())
    return dot / (na * nb)


def cider_per_pair(pairs, max_n=4) -> list[float]:
    pairs = list(pairs)
    if not pairs:
        raise UndefinedScoreError("CIDEr is undefined on an empty corpus")
    df = document_frequency(pairs, max_n)
    log_n = math.log(len(pairs))
    scores = []
    for cand, refs in pairs:
        per_n = []
        for n in range(1, max_n + 1):
            vc = _tfidf(cand, n, df, log_n)
            sims = [_cosine(vc, _tfidf(ref, n, df, log_n)) for ref in refs]
            per_n.append(sum(sims) / len(sims))
        scores.append(SCALE * sum(per_n) / max_n)
    return scores


def cider(pairs, max_n=4) -> float:
    scores = cider_per_pair(pairs, max_n)
    return sum(scores) / len(scores)
