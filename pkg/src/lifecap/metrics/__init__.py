"""Caption evaluation: BLEU-1..4, CIDEr, METEOR, ROUGE-L and their mean."""

from __future__ import annotations

from dataclasses import asdict, dataclass

from lifecap.errors import InvalidInputError
from lifecap.metrics.bleu import bleu_n
from lifecap.metrics.cider import cider
from lifecap.metrics.meteor import meteor
from lifecap.metrics.rouge import rouge_l
from lifecap.metrics.stem import porter_stem
from lifecap.metrics.tokenize import as_tokens, tokenize

SCORE_NAMES = ("bleu1", "bleu2", "bleu3", "bleu4", "cider", "meteor", "rouge_l")
HEADERS = ("Bleu-1", "Bleu-2", "Bleu-3", "Bleu-4", "CIDEr", "METEOR", "ROUGE", "Mean")


@dataclass(frozen=True)
class EvalPair:
    candidate: tuple[str, ...]
    references: tuple[tuple[str, ...], ...]

    @classmethod
    def make(cls, candidate, references) -> "EvalPair":
        """Build a pair from raw text or token sequences, normalising tokens."""
        refs = tuple(as_tokens(r) for r in references)
        if not refs:
            raise InvalidInputError("an evaluation pair needs at least one reference")
        return cls(as_tokens(candidate), refs)

    def __iter__(self):
        yield self.candidate
        yield self.references


@dataclass(frozen=True)
class EvalReport:
    bleu1: float
    bleu2: float
    bleu3: float
    bleu4: float
    cider: float
    meteor: float
    rouge_l: float

    @property
    def scores(self) -> tuple[float, ...]:
        return tuple(getattr(self, k) for k in SCORE_NAMES)

    @property
    def mean(self) -> float:
        return sum(self.scores) / len(SCORE_NAMES)

    def to_dict(self):
        d = asdict(self)
        d["mean"] = self.mean
        return d

    def table_row(self, label="") -> str:
        cells = [f"{x:.3f}" for x in (*self.scores, self.mean)]
        return " | ".join([label, *cells]) if label else " | ".join(cells)


def report_from_scores(scores) -> EvalReport:
    """Wrap seven precomputed scores (Table-1 column order) in a report."""
    scores = [float(x) for x in scores]
    if len(scores) != len(SCORE_NAMES):
        raise InvalidInputError(f"expected {len(SCORE_NAMES)} scores, got {len(scores)}")
    return EvalReport(*scores)


def summarize(pairs, synonyms=None, sentence_level_bleu=False) -> EvalReport:
    pairs = [p if isinstance(p, EvalPair) else EvalPair.make(*p) for p in pairs]
    return EvalReport(
        *(bleu_n(pairs, n, sentence_level=sentence_level_bleu) for n in (1, 2, 3, 4)),
        cider(pairs),
        meteor(pairs, synonyms),
        rouge_l(pairs),
    )


__all__ = [
    "EvalPair",
    "EvalReport",
    "HEADERS",
    "SCORE_NAMES",
    "bleu_n",
    "cider",
    "meteor",
    "porter_stem",
    "report_from_scores",
    "rouge_l",
    "summarize",
    "tokenize",
]
