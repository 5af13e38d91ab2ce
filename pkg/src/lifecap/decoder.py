"""Diverse candidate caption generation.

Captions are decoded with beam search over a pluggable next-word predictor.
Several rounds are run; every round after the first penalises words that an
earlier round placed at the same sentence position, which pushes later rounds
toward different phrasings of the same image.
"""

from __future__ import annotations

import abc
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from lifecap.errors import InvalidConfigError, InvalidInputError

START = "<s>"
STOP = "</s>"


class Vocabulary:
    """Dense token <-> id mapping including the reserved START/STOP tokens."""

    def __init__(self, tokens: Iterable[str]):
        tokens = list(tokens)
        if START not in tokens:
            tokens.insert(0, START)
        if STOP not in tokens:
            tokens.insert(1, STOP)
        if len(set(tokens)) != len(tokens):
            dupes = sorted({t for t in tokens if tokens.count(t) > 1})
            raise InvalidConfigError(f"duplicate vocabulary tokens: {dupes}")
        self.tokens = tokens
        self.index = {tok: i for i, tok in enumerate(tokens)}

    def __len__(self):
        return len(self.tokens)

    def __contains__(self, token):
        return token in self.index

    @property
    def start_id(self) -> int:
        return self.index[START]

    @property
    def stop_id(self) -> int:
        return self.index[STOP]

    def encode(self, words: Sequence[str]) -> tuple[int, ...]:
        try:
            return tuple(self.index[w] for w in words)
        except KeyError as exc:
            raise InvalidInputError(f"token {exc.args[0]!r} not in vocabulary") from None

    def decode(self, ids: Sequence[int]) -> tuple[str, ...]:
        """Map ids back to words, dropping START/STOP markers."""
        skip = (self.start_id, self.stop_id)
        return tuple(self.tokens[i] for i in ids if i not in skip)


class Predictor(abc.ABC):
    """Next-word model: activation scores over the vocabulary.

    Implementations must be deterministic and must not mutate state in
    :meth:`activations`, so one instance can serve concurrent decodes.
    """

    vocab: Vocabulary

    @abc.abstractmethod
    def activations(self, feature: np.ndarray, prefix: Sequence[int]) -> np.ndarray:
        """Return pre-softmax scores (length ``len(vocab)``) for the next token."""


class ToyPredictor(Predictor):
    """Nearest-centroid bigram model, a desk-scale stand-in for a trained LSTM.

    The image feature picks a cluster by nearest centroid (ties to the lower
    cluster id); the cluster's table maps the previous token to a row of
    activations. Missing rows default to all zeros.
    """

    def __init__(self, vocab: Vocabulary, centroids, bigrams: dict[int, dict[str, Sequence[float]]]):
        self.vocab = vocab
        self.centroids = np.atleast_2d(np.asarray(centroids, dtype=float))
        self.tables: dict[int, dict[int, np.ndarray]] = {}
        for cluster, rows in bigrams.items():
            cluster = int(cluster)
            if not 0 <= cluster < len(self.centroids):
                raise InvalidConfigError(f"bigram table for unknown cluster {cluster}")
            table = {}
            for prev, row in rows.items():
                row = np.asarray(row, dtype=float)
                if row.shape != (len(vocab),):
                    raise InvalidConfigError(
                        f"cluster {cluster}, previous token {prev!r}: expected {len(vocab)} activations, got {row.shape}"
                    )
                if prev not in vocab:
                    raise InvalidConfigError(f"cluster {cluster}: unknown previous token {prev!r}")
                table[vocab.index[prev]] = row
            self.tables[cluster] = table
        self._zeros = np.zeros(len(vocab))

    def cluster_of(self, feature) -> int:
        d = np.sum((self.centroids - np.asarray(feature, dtype=float)) ** 2, axis=1)
        return int(np.argmin(d))

    def activations(self, feature, prefix):
        prev = prefix[-1] if prefix else self.vocab.start_id
        row = self.tables.get(self.cluster_of(feature), {}).get(prev)
        return self._zeros if row is None else row

    @classmethod
    def load(cls, path) -> "ToyPredictor":
        """Read the JSON model file described in ``docs/formats.md``."""
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
        return cls.from_dict(data)

    @classmethod
    def from_dict(cls, data) -> "ToyPredictor":
        try:
            vocab = Vocabulary(data["vocab"])
            return cls(vocab, data["centroids"], data["bigrams"])
        except KeyError as exc:
            raise InvalidConfigError(f"predictor file missing key {exc.args[0]!r}") from None

    def to_dict(self):
        return {
            "vocab": list(self.vocab.tokens),
            "centroids": self.centroids.tolist(),
            "bigrams": {
                str(c): {self.vocab.tokens[p]: row.tolist() for p, row in sorted(t.items())}
                for c, t in sorted(self.tables.items())
            },
        }

    def save(self, path):
        Path(path).write_text(json.dumps(self.to_dict(), indent=1) + "\n", encoding="utf-8")


@dataclass(frozen=True)
class CaptionHypothesis:
    tokens: tuple[int, ...]
    log_score: float
    round: int = 1
    # biased score used for ranking inside beam search; not a model likelihood
    search_score: float = field(default=0.0, compare=False)

    def words(self, vocab: Vocabulary) -> tuple[str, ...]:
        return vocab.decode(self.tokens)

    def text(self, vocab: Vocabulary) -> str:
        return " ".join(self.words(vocab))


@dataclass(frozen=True)
class DecoderConfig:
    beam_size: int = 5
    rounds: int = 3
    diversity_penalty: float = 2.0
    max_len: int = 20

    def __post_init__(self):
        if self.beam_size < 1:
            raise InvalidConfigError("beam_size must be positive")
        if self.rounds < 1:
            raise InvalidConfigError("rounds must be positive")
        if self.max_len < 1:
            raise InvalidConfigError("max_len must be positive")
        if not self.diversity_penalty >= 0:
            raise InvalidConfigError("diversity_penalty must be nonnegative")

    @property
    def candidates_per_image(self) -> int:
        return self.beam_size * self.rounds


def log_softmax(x: np.ndarray) -> np.ndarray:
    m = np.max(x)
    shifted = x - m
    return shifted - np.log(np.sum(np.exp(shifted)))


def zero_bias(config: DecoderConfig, vocab_size: int) -> np.ndarray:
    return np.zeros((config.max_len, vocab_size))


def _rank_key(item):
    # higher biased score first; ties go to the lexicographically smaller id
    # sequence, which also puts a prefix ahead of its extensions
    return (-item[0], item[2])


def beam_search(predictor: Predictor, image_feature, config: DecoderConfig, bias=None) -> list[CaptionHypothesis]:
    """Decode up to ``beam_size`` captions for one image.

    At each step every live prefix is extended by every token (START is never
    emitted) and the ``beam_size`` best extensions under the biased score are
    kept. Extensions ending in STOP move to a finished pool. Prefixes still
    alive at ``max_len`` are finished as they stand. With a nonpositive bias
    the search also ends early once the pool holds ``beam_size`` sentences
    and no live prefix scores above the worst of them.

    The bias is added to the log-softmax of each step, so a hypothesis'
    biased score is its log-likelihood plus the bias entries it touches.
    ``log_score`` on the result is the unbiased log-likelihood.
    """
    vocab = predictor.vocab
    V = len(vocab)
    if V <= 2:
        raise InvalidConfigError("vocabulary holds no words besides START/STOP")
    if config.beam_size < 1:
        raise InvalidConfigError("beam_size must be positive")
    if bias is None:
        bias = zero_bias(config, V)
    bias = np.asarray(bias, dtype=float)
    if bias.shape != (config.max_len, V):
        raise InvalidInputError(f"bias table must have shape {(config.max_len, V)}, got {bias.shape}")

    b = config.beam_size
    start, stop = vocab.start_id, vocab.stop_id
    feature = np.asarray(image_feature, dtype=float)
    emit = np.ones(V, dtype=bool)
    emit[start] = False
    token_ids = np.flatnonzero(emit)

    monotone = bool(np.all(bias <= 0))
    # (biased score, unbiased score, tokens)
    live = [(0.0, 0.0, ())]
    finished = []
    for t in range(config.max_len):
        expansions = []
        for biased, plain, tokens in live:
            act = np.asarray(predictor.activations(feature, tokens), dtype=float)
            logp = np.full(V, -np.inf)
            logp[emit] = log_softmax(act[emit])
            step_biased = logp + bias[t]
            for k in token_ids:
                expansions.append((biased + step_biased[k], plain + logp[k], tokens + (int(k),)))
        expansions.sort(key=_rank_key)
        live = []
        for item in expansions[:b]:
            (finished if item[2][-1] == stop else live).append(item)
        if t == config.max_len - 1:
            finished.extend(live)
            break
        if not live:
            break
        if monotone and len(finished) >= b:
            # extensions can only lose score, so once no live prefix beats the
            # b-th finished sentence nothing better can appear
            kth = sorted(finished, key=_rank_key)[b - 1][0]
            if max(item[0] for item in live) <= kth:
                break

    finished.sort(key=_rank_key)
    return [
        CaptionHypothesis(tokens=tokens, log_score=min(float(plain), 0.0), search_score=float(biased))
        for biased, plain, tokens in finished[:b]
    ]


def diversity_bias(history: Sequence[Sequence[CaptionHypothesis]], config: DecoderConfig, vocab: Vocabulary) -> np.ndarray:
    """Bias table penalising (position, word) pairs used by earlier rounds.

    Each earlier round contributes ``-diversity_penalty`` once per pair that
    appears in any of its kept hypotheses. STOP is never penalised.
    """
    counts = np.zeros((config.max_len, len(vocab)))
    for hyps in history:
        used = np.zeros_like(counts, dtype=bool)
        for hyp in hyps:
            for pos, tok in enumerate(hyp.tokens):
                if tok != vocab.stop_id and pos < config.max_len:
                    used[pos, tok] = True
        counts += used
    return -config.diversity_penalty * counts


def diverse_m_best(predictor: Predictor, image_feature, config: DecoderConfig) -> list[CaptionHypothesis]:
    """Run ``config.rounds`` rounds of penalised beam search and concatenate them."""
    history: list[list[CaptionHypothesis]] = []
    out = []
    for r in range(1, config.rounds + 1):
        bias = diversity_bias(history, config, predictor.vocab)
        hyps = [
            CaptionHypothesis(h.tokens, h.log_score, round=r, search_score=h.search_score)
            for h in beam_search(predictor, image_feature, config, bias)
        ]
        history.append(hyps)
        out.extend(hyps)
    return out


@dataclass
class PooledSentence:
    words: tuple[str, ...]
    # image id -> best log score that image's decoder gave this sentence
    sources: dict[str, float] = field(default_factory=dict)

    @property
    def text(self) -> str:
        return " ".join(self.words)


@dataclass
class CandidateSet:
    sentences: list[PooledSentence] = field(default_factory=list)

    def __len__(self):
        return len(self.sentences)

    def __iter__(self):
        return iter(self.sentences)

    def __getitem__(self, i):
        return self.sentences[i]

    def index_of(self, words) -> int:
        for i, s in enumerate(self.sentences):
            if s.words == tuple(words):
                return i
        raise KeyError(words)


def pool_candidates(per_image: Iterable[tuple[str, Iterable[tuple[Sequence[str], float]]]]) -> CandidateSet:
    """Merge every image's candidates into one deduplicated set.

    ``per_image`` yields ``(image_id, [(words, log_score), ...])``. Sentences
    are identified by their word tuple and kept in order of first appearance.
    """
    pooled = CandidateSet()
    where: dict[tuple[str, ...], PooledSentence] = {}
    for image_id, cands in per_image:
        for words, score in cands:
            words = tuple(words)
            entry = where.get(words)
            if entry is None:
                entry = where[words] = PooledSentence(words)
                pooled.sentences.append(entry)
            prev = entry.sources.get(image_id)
            entry.sources[image_id] = score if prev is None else max(prev, score)
    return pooled
