"""BLEU with clipped n-gram precision and brevity penalty."""

from __future__ import annotations

import math

from lifecap.errors import InvalidInputError, UndefinedScoreError
from lifecap.metrics.ngrams import ngram_counts


def _closest_ref_len(cand_len, refs):
    # ties go to the shorter reference
    return min((abs(len(r) - cand_len), len(r)) for r in refs)[1]


def sentence_stats(candidate, references, max_n):
    """Clipped matches and totals per order, candidate length, effective ref length."""
    matches, totals = [], []
    for n in range(1, max_n + 1):
        cand = ngram_counts(candidate, n)
        max_ref = {}
        for ref in references:
            for g, c in ngram_counts(ref, n).items():
                max_ref[g] = max(max_ref.get(g, 0), c)
        matches.append(sum(min(c, max_ref.get(g, 0)) for g, c in cand.items()))
        totals.append(max(len(candidate) - n + 1, 0))
    return matches, totals, len(candidate), _closest_ref_len(len(candidate), references)


def _combine(matches, totals, c, r):
    if c == 0 or any(m == 0 for m in matches):
        return 0.0
    log_p = sum(math.log(m / t) for m, t in zip(matches, totals)) / len(matches)
    bp = math.exp(min(0.0, 1.0 - r / c))
    return bp * math.exp(log_p)


def bleu_n(pairs, n: int, sentence_level: bool = False) -> float:
    """Corpus BLEU-n over ``(candidate_tokens, [reference_tokens, ...])`` pairs.

    Clipped matches, n-gram totals and lengths are pooled over the corpus
    before the precisions are combined. With ``sentence_level=True`` the
    per-pair scores are averaged instead.
    """
    if n not in (1, 2, 3, 4):
        raise InvalidInputError(f"BLEU order must be 1..4, got {n}")
    pairs = list(pairs)
    if not pairs:
        raise UndefinedScoreError("BLEU is undefined on an empty corpus")
    stats = [sentence_stats(cand, refs, n) for cand, refs in pairs]
    if sentence_level:
        return sum(_combine(*s) for s in stats) / len(stats)
    matches = [sum(s[0][i] for s in stats) for i in range(n)]
    totals = [sum(s[1][i] for s in stats) for i in range(n)]
    c = sum(s[2] for s in stats)
    r = sum(s[3] for s in stats)
    return _combine(matches, totals, c, r)
