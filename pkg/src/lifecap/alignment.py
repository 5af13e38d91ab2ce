"""Region-word alignment score between a sentence and an image."""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from lifecap.errors import InvalidInputError


class EmptySentenceWarning(UserWarning):
    """No token of the sentence has a word vector; the score defaults to 0."""


@dataclass
class RegionSet:
    vectors: np.ndarray
    image_id: str = ""

    def __post_init__(self):
        v = np.asarray(self.vectors, dtype=float)
        if v.ndim != 2 or v.shape[0] == 0:
            raise InvalidInputError(f"image {self.image_id!r}: regions must be a nonempty list of equal-length vectors")
        if not np.all(np.isfinite(v)):
            raise InvalidInputError(f"image {self.image_id!r}: region vectors contain non-finite values")
        self.vectors = v

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]


class AlignmentModel:
    """Word-vector lookup.

    ``oov_policy`` is ``"drop"`` (skip unknown tokens) or ``"zero"`` (embed
    them as the zero vector). Both give the same score whenever at least one
    token is known, since a zero vector can never beat a real max unless
    every inner product is negative.
    """

    def __init__(self, word_vectors: Mapping[str, Sequence[float]], oov_policy: str = "drop"):
        if oov_policy not in ("drop", "zero"):
            raise InvalidInputError(f"unknown oov_policy {oov_policy!r}")
        self.oov_policy = oov_policy
        self.vectors = {w: np.asarray(v, dtype=float) for w, v in word_vectors.items()}
        dims = {v.shape for v in self.vectors.values()}
        if len(dims) > 1:
            raise InvalidInputError(f"word vectors have mixed shapes {sorted(dims)}")
        self.dim = dims.pop()[0] if dims else 0

    def embed(self, sentence: Sequence[str]) -> np.ndarray:
        """Stack the vectors of the sentence's distinct embeddable tokens."""
        rows = []
        seen = set()
        for tok in sentence:
            if tok in seen:
                continue
            seen.add(tok)
            vec = self.vectors.get(tok)
            if vec is None and self.oov_policy == "zero":
                vec = np.zeros(self.dim)
            if vec is not None:
                rows.append(vec)
        return np.array(rows).reshape(len(rows), self.dim)

    @classmethod
    def load(cls, path, oov_policy="drop") -> "AlignmentModel":
        """Read a text file of ``token f1 f2 ... fD`` lines."""
        table = {}
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                parts = line.split()
                if not parts:
                    continue
                try:
                    table[parts[0]] = [float(x) for x in parts[1:]]
                except ValueError:
                    raise InvalidInputError(f"{path}:{lineno}: non-numeric vector component") from None
        return cls(table, oov_policy=oov_policy)

    def save(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            for tok in sorted(self.vectors):
                fh.write(tok + " " + " ".join(repr(float(x)) for x in self.vectors[tok]) + "\n")


def align_score(sentence: Sequence[str], regions: RegionSet, model: AlignmentModel) -> float:
    """Sum over regions of the best inner product with any sentence word."""
    if regions.dim != model.dim:
        raise InvalidInputError(f"region dimension {regions.dim} does not match word-vector dimension {model.dim}")
    words = model.embed(sentence)
    if len(words) == 0:
        warnings.warn(f"no embeddable words in {' '.join(sentence)!r}", EmptySentenceWarning, stacklevel=2)
        return 0.0
    # per-pair reductions, not a matrix product: BLAS blocking would let a
    # pair's rounding depend on how many other words are present
    sims = np.sum(regions.vectors[:, None, :] * words[None, :, :], axis=2)
    return float(np.sum(np.max(sims, axis=1)))


def unary_cost(sentence, regions, model) -> float:
    """Cost of labelling an image with ``sentence``; lower is better."""
    return -align_score(sentence, regions, model)
