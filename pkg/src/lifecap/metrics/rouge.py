"""ROUGE-L: LCS-based F-measure."""

from __future__ import annotations

from lifecap.errors import UndefinedScoreError

BETA = 1.2


def lcs_length(a, b) -> int:
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0]
        for j, y in enumerate(b):
            cur.append(prev[j] + 1 if x == y else max(prev[j + 1], cur[j]))
        prev = cur
    return prev[-1]


def rouge_l_sentence(candidate, references, beta=BETA) -> float:
    best = 0.0
    for ref in references:
        lcs = lcs_length(candidate, ref)
        if lcs == 0:
            continue
        p = lcs / len(candidate)
        r = lcs / len(ref)
        f = ((1 + beta**2) * r * p) / (r + beta**2 * p)
        best = max(best, f)
    return best


def rouge_l(pairs, beta=BETA) -> float:
    pairs = list(pairs)
    if not pairs:
        raise UndefinedScoreError("ROUGE-L is undefined on an empty corpus")
    return sum(rouge_l_sentence(c, refs, beta) for c, refs in pairs) / len(pairs)
