"""Brute-force reference implementations used only by the tests.

Deliberately written without touching the code paths they check: plain
Python loops and math, no shared helpers from the package.
"""

import itertools
import math


def enumerate_sentences(vocab_size, start_id, stop_id, max_len):
    """All sentences the decoder may emit: STOP-terminated up to max_len, or
    exactly max_len tokens without STOP."""
    words = [k for k in range(vocab_size) if k not in (start_id, stop_id)]
    for length in range(1, max_len + 1):
        for body in itertools.product(words, repeat=length - 1):
            yield body + (stop_id,)
        if length == max_len:
            for body in itertools.product(words, repeat=length):
                yield body


def sentence_log_prob(predictor, feature, tokens, start_id, bias=None):
    total = 0.0
    for t, tok in enumerate(tokens):
        act = list(predictor.activations(feature, tokens[:t]))
        logits = [a for k, a in enumerate(act) if k != start_id]
        m = max(logits)
        log_z = m + math.log(sum(math.exp(a - m) for a in logits))
        total += act[tok] - log_z
        if bias is not None:
            total += bias[t][tok]
    return total


def exhaustive_argmax(predictor, feature, max_len, bias=None):
    v = predictor.vocab
    best = None
    for s in enumerate_sentences(len(v), v.start_id, v.stop_id, max_len):
        score = sentence_log_prob(predictor, feature, s, v.start_id, bias)
        if best is None or score > best[0] + 1e-12:
            best = (score, s)
    return best


def brute_force_min_energy(unary, beta):
    """Minimum over all labellings, summed in the same left-to-right order as
    the library's energy function; returns (energy, lexicographically first
    minimiser)."""
    K, C = len(unary), len(unary[0])
    best = None
    for lab in itertools.product(range(C), repeat=K):
        total = unary[0][lab[0]]
        for i in range(1, K):
            prev = total + beta if lab[i] != lab[i - 1] else total
            total = unary[i][lab[i]] + prev
        if best is None or total < best[0]:
            best = (total, list(lab))
    return best


def lcs_recursive(a, b):
    @__import__("functools").lru_cache(maxsize=None)
    def go(i, j):
        if i == len(a) or j == len(b):
            return 0
        if a[i] == b[j]:
            return 1 + go(i + 1, j + 1)
        return max(go(i + 1, j), go(i, j + 1))

    return go(0, 0)
