"""Canonical tokenisation shared by every metric and by keyword matching."""

import string

_PUNCT = string.punctuation + "“”‘’"


def tokenize(text: str) -> tuple[str, ...]:
    """Lowercase, split on whitespace, strip punctuation from token ends."""
    out = []
    for tok in text.lower().split():
        tok = tok.strip(_PUNCT)
        if tok:
            out.append(tok)
    return tuple(out)


def as_tokens(sentence) -> tuple[str, ...]:
    """Accept either raw text or an already tokenised sequence."""
    if isinstance(sentence, str):
        return tokenize(sentence)
    return tokenize(" ".join(sentence))
