"""METEOR with staged exact / stem / synonym unigram alignment.

Score per reference is ``Fmean * (1 - 0.5 * (chunks / matches) ** 3)`` with
``Fmean = 10 P R / (R + 9 P)``. Each pair keeps its best reference and the
corpus score is the mean over pairs.
"""

from __future__ import annotations

from typing import Mapping

from lifecap.errors import UndefinedScoreError
from lifecap.metrics.stem import porter_stem


def load_synonyms(path) -> dict[str, frozenset[str]]:
    """Read ``word syn1 syn2 ...`` lines; every line is one symmetric group."""
    table: dict[str, set[str]] = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            group = line.lower().split()
            for w in group:
                table.setdefault(w, set()).update(g for g in group if g != w)
    return {w: frozenset(s) for w, s in table.items()}


def _stages(synonyms):
    yield lambda a, b: a == b
    yield lambda a, b: porter_stem(a) == porter_stem(b)
    if synonyms:
        yield lambda a, b: b in synonyms.get(a, ()) or a in synonyms.get(b, ())


def align(candidate, reference, synonyms: Mapping[str, frozenset] | None = None) -> dict[int, int]:
    """Map candidate positions to reference positions, one stage at a time.

    Within a stage candidate tokens are visited left to right; each takes the
    reference slot right after its predecessor's match when that slot fits,
    otherwise the first fitting slot after the last match, otherwise the
    first fitting slot overall. This keeps matched runs contiguous.
    """
    mapping: dict[int, int] = {}
    for match in _stages(synonyms):
        used = set(mapping.values())
        for i, tok in enumerate(candidate):
            if i in mapping:
                continue
            free = [j for j, r in enumerate(reference) if j not in used and match(tok, r)]
            if not free:
                continue
            prev = mapping.get(i - 1)
            last = max(used) if used else -1
            if prev is not None and prev + 1 in free:
                j = prev + 1
            else:
                after = [j for j in free if j > last]
                j = after[0] if after else free[0]
            mapping[i] = j
            used.add(j)
    return mapping


def count_chunks(mapping: dict[int, int]) -> int:
    chunks = 0
    prev = None
    for i in sorted(mapping):
        j = mapping[i]
        if prev is None or i != prev[0] + 1 or j != prev[1] + 1:
            chunks += 1
        prev = (i, j)
    return chunks


def meteor_sentence(candidate, reference, synonyms=None, alpha=0.9, beta=3.0, gamma=0.5) -> float:
    mapping = align(candidate, reference, synonyms)
    m = len(mapping)
    if m == 0:
        return 0.0
    p = m / len(candidate)
    r = m / len(reference)
    fmean = p * r / (alpha * p + (1 - alpha) * r)
    penalty = gamma * (count_chunks(mapping) / m) ** beta
    return fmean * (1 - penalty)


def meteor(pairs, synonyms=None) -> float:
    pairs = list(pairs)
    if not pairs:
        raise UndefinedScoreError("METEOR is undefined on an empty corpus")
    total = 0.0
    for cand, refs in pairs:
        total += max(meteor_sentence(cand, ref, synonyms) for ref in refs)
    return total / len(pairs)
