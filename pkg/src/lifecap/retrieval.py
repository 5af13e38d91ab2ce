"""Keyword-based detection of privacy-sensitive images from their captions."""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from lifecap.errors import InvalidConfigError, InvalidInputError, UndefinedScoreError
from lifecap.metrics.stem import porter_stem
from lifecap.metrics.tokenize import as_tokens

PLACE_KEYWORDS = ("toilet", "bathroom", "locker", "lavatory", "washroom")
DISPLAY_KEYWORDS = ("computer", "laptop", "iphone", "smartphone", "screen")


class SensitivityLabel(enum.IntEnum):
    NOT_SENSITIVE = 0
    SENSITIVE_PLACE = 1
    DISPLAY = 2

    @property
    def short(self) -> str:
        return _SHORT[self]

    @property
    def sensitive(self) -> bool:
        return self is not SensitivityLabel.NOT_SENSITIVE

    @classmethod
    def parse(cls, value) -> "SensitivityLabel":
        if isinstance(value, SensitivityLabel):
            return value
        key = str(value).strip().lower().replace("_", "").replace("-", "")
        try:
            return _ALIASES[key]
        except KeyError:
            raise InvalidInputError(f"unknown sensitivity label {value!r}") from None


_SHORT = {
    SensitivityLabel.NOT_SENSITIVE: "NotSen",
    SensitivityLabel.SENSITIVE_PLACE: "Place",
    SensitivityLabel.DISPLAY: "Display",
}
_ALIASES = {
    "notsen": SensitivityLabel.NOT_SENSITIVE,
    "notsensitive": SensitivityLabel.NOT_SENSITIVE,
    "none": SensitivityLabel.NOT_SENSITIVE,
    "0": SensitivityLabel.NOT_SENSITIVE,
    "place": SensitivityLabel.SENSITIVE_PLACE,
    "sensitiveplace": SensitivityLabel.SENSITIVE_PLACE,
    "1": SensitivityLabel.SENSITIVE_PLACE,
    "display": SensitivityLabel.DISPLAY,
    "2": SensitivityLabel.DISPLAY,
}

THREE_WAY = ("NotSen", "Place", "Display")
TWO_WAY = ("NotSen", "Sensitive")


@dataclass(frozen=True)
class KeywordConfig:
    place_keywords: frozenset[str] = frozenset(PLACE_KEYWORDS)
    display_keywords: frozenset[str] = frozenset(DISPLAY_KEYWORDS)
    captions_per_image: int = 5
    match_mode: str = "exact"

    def __post_init__(self):
        place = frozenset(k.lower() for k in self.place_keywords)
        display = frozenset(k.lower() for k in self.display_keywords)
        object.__setattr__(self, "place_keywords", place)
        object.__setattr__(self, "display_keywords", display)
        if self.match_mode not in ("exact", "stem"):
            raise InvalidConfigError(f"match_mode must be 'exact' or 'stem', got {self.match_mode!r}")
        if self.captions_per_image < 1:
            raise InvalidConfigError("captions_per_image must be positive")
        if not place or not display:
            raise InvalidConfigError("both keyword lists must be nonempty")
        if self._norm_set(place) & self._norm_set(display):
            raise InvalidConfigError("place and display keyword lists overlap")

    def _norm(self, tok):
        return porter_stem(tok) if self.match_mode == "stem" else tok

    def _norm_set(self, words):
        return {self._norm(w) for w in words}

    def matches(self, tokens: Iterable[str], keywords: frozenset[str]) -> set[str]:
        """Keywords found among ``tokens``."""
        present = {self._norm(t) for t in tokens}
        return {k for k in keywords if self._norm(k) in present}

    @classmethod
    def load(cls, path) -> "KeywordConfig":
        """Read a JSON object with ``place`` and ``display`` keyword lists."""
        try:
            with open(path, encoding="utf-8") as fh:
                data = json.load(fh)
            return cls(
                place_keywords=frozenset(data["place"]),
                display_keywords=frozenset(data["display"]),
                captions_per_image=int(data.get("captions_per_image", 5)),
                match_mode=data.get("match_mode", "exact"),
            )
        except (KeyError, TypeError, ValueError, AttributeError) as exc:
            if isinstance(exc, InvalidConfigError):
                raise
            raise InvalidConfigError(f"{path}: malformed keyword config ({exc})") from None


@dataclass
class Detection:
    label: SensitivityLabel
    confidence: float
    matched: tuple[str, ...] = ()


def classify_image(captions: Sequence, config: KeywordConfig = KeywordConfig()) -> Detection:
    """Label an image from its top captions.

    Any place keyword wins over display keywords. Confidence is the share
    of ``captions_per_image`` captions that contain a keyword of the winning
    class.
    """
    captions = [as_tokens(c) for c in list(captions)[: config.captions_per_image]]
    for label, keywords in (
        (SensitivityLabel.SENSITIVE_PLACE, config.place_keywords),
        (SensitivityLabel.DISPLAY, config.display_keywords),
    ):
        hits = [config.matches(c, keywords) for c in captions]
        n_hit = sum(1 for h in hits if h)
        if n_hit:
            matched = tuple(sorted(set().union(*hits)))
            return Detection(label, n_hit / config.captions_per_image, matched)
    return Detection(SensitivityLabel.NOT_SENSITIVE, 0.0)


@dataclass
class ConfusionMatrix:
    classes: tuple[str, ...]
    matrix: np.ndarray
    counts: np.ndarray
    # actual classes with no examples; their rows are NaN
    undefined_rows: tuple[str, ...] = ()

    def to_csv(self) -> str:
        lines = ["actual\\predicted," + ",".join(self.classes)]
        for name, row in zip(self.classes, self.matrix):
            lines.append(name + "," + ",".join("nan" if np.isnan(x) else f"{x:.6f}" for x in row))
        return "\n".join(lines) + "\n"

    def to_dict(self):
        return {
            "classes": list(self.classes),
            "matrix": [[None if np.isnan(x) else float(x) for x in row] for row in self.matrix],
            "counts": self.counts.astype(int).tolist(),
            "undefined_rows": list(self.undefined_rows),
        }


def confusion_matrix(predictions: Sequence[tuple], mode: str = "3way") -> ConfusionMatrix:
    """Row-normalised confusion matrix; rows are actual classes."""
    if not predictions:
        raise InvalidInputError("confusion matrix needs at least one prediction")
    if mode in ("3way", "3-way"):
        classes = THREE_WAY
        index = int
    elif mode in ("2way", "2-way"):
        classes = TWO_WAY
        index = lambda lab: int(lab.sensitive)  # noqa: E731
    else:
        raise InvalidInputError(f"unknown confusion mode {mode!r}")
    k = len(classes)
    counts = np.zeros((k, k))
    for actual, predicted in predictions:
        counts[index(SensitivityLabel.parse(actual)), index(SensitivityLabel.parse(predicted))] += 1
    totals = counts.sum(axis=1, keepdims=True)
    with np.errstate(invalid="ignore", divide="ignore"):
        matrix = np.where(totals > 0, counts / totals, np.nan)
    undefined = tuple(classes[i] for i in range(k) if totals[i, 0] == 0)
    return ConfusionMatrix(classes, matrix, counts, undefined)


@dataclass(frozen=True)
class PRPoint:
    threshold: float
    precision: float
    recall: float


def pr_curve(scored: Sequence[tuple[bool, float]]) -> list[PRPoint]:
    """Precision and recall at each distinct confidence, highest threshold first.

    An item counts as retrieved when its confidence is at least the threshold.
    """
    scored = [(bool(y), float(s)) for y, s in scored]
    if not scored:
        raise InvalidInputError("pr_curve needs at least one scored item")
    if any(not 0.0 <= s <= 1.0 for _, s in scored):
        raise InvalidInputError("confidences must lie in [0, 1]")
    positives = sum(y for y, _ in scored)
    if positives == 0:
        raise UndefinedScoreError("recall is undefined without positive items")
    points = []
    for thr in sorted({s for _, s in scored}, reverse=True):
        tp = sum(1 for y, s in scored if s >= thr and y)
        fp = sum(1 for y, s in scored if s >= thr and not y)
        points.append(PRPoint(thr, tp / (tp + fp), tp / positives))
    return points


def pr_csv(points: Sequence[PRPoint]) -> str:
    lines = ["threshold,precision,recall"]
    lines += [f"{p.threshold!r},{p.precision!r},{p.recall!r}" for p in points]
    return "\n".join(lines) + "\n"


@dataclass
class RetrievalResult:
    detections: dict[str, Detection] = field(default_factory=dict)
    confusion_3way: ConfusionMatrix | None = None
    confusion_2way: ConfusionMatrix | None = None
    pr_points: list[PRPoint] = field(default_factory=list)


def evaluate_retrieval(captions_by_image: dict[str, Sequence], config: KeywordConfig, truth: dict | None = None) -> RetrievalResult:
    """Classify every image and, given ground truth, score the classifier.

    The PR curve treats both sensitive classes as positive.
    """
    result = RetrievalResult({img: classify_image(caps, config) for img, caps in captions_by_image.items()})
    if truth:
        missing = sorted(set(truth) - set(result.detections))
        if missing:
            raise InvalidInputError(f"labels given for images without captions: {missing[:10]}")
        pairs = [(SensitivityLabel.parse(truth[img]), result.detections[img].label) for img in sorted(truth)]
        result.confusion_3way = confusion_matrix(pairs, "3way")
        result.confusion_2way = confusion_matrix(pairs, "2way")
        scored = [(SensitivityLabel.parse(truth[img]).sensitive, result.detections[img].confidence) for img in sorted(truth)]
        if any(y for y, _ in scored):
            result.pr_points = pr_curve(scored)
    return result
