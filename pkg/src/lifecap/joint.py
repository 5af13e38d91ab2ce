"""Temporal smoothing of caption choices on a chain.

Every image picks one sentence from the pooled candidate set. The energy of
a labelling is the sum of per-image costs plus ``beta`` for each pair of
neighbours that disagree; it is minimised exactly by dynamic programming.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from lifecap.errors import InvalidInputError


@dataclass
class EnergyInstance:
    unary: np.ndarray
    images: list[str] = field(default_factory=list)
    sentences: list[tuple[str, ...]] = field(default_factory=list)
    timestamps: list[str] = field(default_factory=list)

    def __post_init__(self):
        u = np.asarray(self.unary, dtype=float)
        if u.ndim != 2 or u.shape[0] < 1 or u.shape[1] < 1:
            raise InvalidInputError(f"unary matrix must be K x |C| with K, |C| >= 1, got shape {u.shape}")
        if not np.all(np.isfinite(u)):
            raise InvalidInputError("unary matrix contains non-finite costs")
        self.unary = u
        K, C = u.shape
        if not self.images:
            self.images = [str(i) for i in range(K)]
        if not self.sentences:
            self.sentences = [(f"c{j}",) for j in range(C)]
        if len(self.images) != K or len(self.sentences) != C:
            raise InvalidInputError("image/sentence lists do not match the unary matrix shape")
        if self.timestamps and len(self.timestamps) != K:
            raise InvalidInputError("timestamp list does not match the number of images")

    @property
    def num_images(self) -> int:
        return self.unary.shape[0]

    @property
    def num_candidates(self) -> int:
        return self.unary.shape[1]


@dataclass
class DiarySegment:
    start_index: int
    end_index: int
    label: int
    sentence: tuple[str, ...]
    image_ids: list[str]
    start_time: str = ""
    end_time: str = ""

    @property
    def text(self) -> str:
        return " ".join(self.sentence)

    def __len__(self):
        return self.end_index - self.start_index + 1


def _check_labeling(instance, labeling):
    labeling = [int(x) for x in labeling]
    if len(labeling) != instance.num_images:
        raise InvalidInputError(f"labeling has length {len(labeling)}, expected {instance.num_images}")
    for i, s in enumerate(labeling):
        if not 0 <= s < instance.num_candidates:
            raise InvalidInputError(f"label {s} at position {i} out of range [0, {instance.num_candidates})")
    return labeling


def energy(instance: EnergyInstance, labeling: Sequence[int], beta: float) -> float:
    """Unary costs plus ``beta`` per label change.

    Accumulates left to right as ``total = unary[i] + (total + beta*change)``,
    the same order the forward recurrence uses.
    """
    labeling = _check_labeling(instance, labeling)
    u = instance.unary
    total = u[0, labeling[0]]
    for i in range(1, len(labeling)):
        prev = total + beta if labeling[i] != labeling[i - 1] else total
        total = u[i, labeling[i]] + prev
    return float(total)


def _potts_step(cost_to_go: np.ndarray, beta: float) -> np.ndarray:
    # best continuation for each label: stay, or jump to the global best and pay beta
    return np.minimum(cost_to_go, cost_to_go.min() + beta)


def _naive_step(cost_to_go: np.ndarray, beta: float) -> np.ndarray:
    C = len(cost_to_go)
    trans = cost_to_go[None, :] + beta * (1 - np.eye(C))
    return trans.min(axis=1)


def _solve(instance: EnergyInstance, beta: float, step) -> tuple[list[int], float]:
    if not beta >= 0:
        raise InvalidInputError("beta must be nonnegative")
    u = instance.unary
    K = u.shape[0]
    # G[i, c]: minimal energy of images i..K-1 given image i takes label c
    G = np.empty_like(u)
    G[K - 1] = u[K - 1]
    for i in range(K - 2, -1, -1):
        G[i] = u[i] + step(G[i + 1], beta)
    # choose left to right so ties resolve to the lowest index at the earliest position
    labeling = [int(np.argmin(G[0]))]
    for i in range(1, K):
        penalty = np.full(u.shape[1], beta)
        penalty[labeling[-1]] = 0.0
        labeling.append(int(np.argmin(G[i] + penalty)))
    return labeling, energy(instance, labeling, beta)


def viterbi_joint(instance: EnergyInstance, beta: float) -> tuple[list[int], float]:
    """Exact minimum-energy labelling in O(K * |C|) time."""
    return _solve(instance, beta, _potts_step)


def viterbi_naive(instance: EnergyInstance, beta: float) -> tuple[list[int], float]:
    """Same result through the generic O(K * |C|^2) transition scan."""
    return _solve(instance, beta, _naive_step)


def count_transitions(labeling: Sequence[int]) -> int:
    return sum(1 for a, b in zip(labeling, labeling[1:]) if a != b)


def group_segments(instance: EnergyInstance, labeling: Sequence[int]) -> list[DiarySegment]:
    labeling = _check_labeling(instance, labeling)
    ts = instance.timestamps
    segments = []
    start = 0
    for i in range(1, len(labeling) + 1):
        if i == len(labeling) or labeling[i] != labeling[start]:
            lab = labeling[start]
            segments.append(
                DiarySegment(
                    start_index=start,
                    end_index=i - 1,
                    label=lab,
                    sentence=tuple(instance.sentences[lab]),
                    image_ids=list(instance.images[start:i]),
                    start_time=ts[start] if ts else "",
                    end_time=ts[i - 1] if ts else "",
                )
            )
            start = i
    return segments


def cost_matrix_text(instance: EnergyInstance) -> tuple[str, str]:
    """The unary matrix as CSV text plus a one-sentence-per-line sidecar."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["image_id"] + [str(j) for j in range(instance.num_candidates)])
    for img, row in zip(instance.images, instance.unary):
        w.writerow([img] + [repr(float(x)) for x in row])
    sentences = "".join(" ".join(s) + "\n" for s in instance.sentences)
    return buf.getvalue(), sentences


def write_cost_matrix(instance: EnergyInstance, path, sentences_path):
    table, sentences = cost_matrix_text(instance)
    Path(path).write_text(table, encoding="utf-8")
    Path(sentences_path).write_text(sentences, encoding="utf-8")


def read_cost_matrix(path, sentences_path=None) -> EnergyInstance:
    """Inverse of :func:`write_cost_matrix`; the sidecar is optional."""
    images, rows = [], []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise InvalidInputError(f"{path}: empty cost matrix")
        for lineno, rec in enumerate(reader, 2):
            if not rec:
                continue
            try:
                rows.append([float(x) for x in rec[1:]])
            except ValueError:
                raise InvalidInputError(f"{path}:{lineno}: non-numeric cost") from None
            images.append(rec[0])
    if not rows:
        raise InvalidInputError(f"{path}: cost matrix has no rows")
    if len({len(r) for r in rows}) != 1:
        raise InvalidInputError(f"{path}: ragged cost matrix")
    sentences = []
    if sentences_path is not None:
        with open(sentences_path, encoding="utf-8") as fh:
            sentences = [tuple(line.split()) for line in fh.read().splitlines()]
    return EnergyInstance(np.array(rows), images=images, sentences=sentences)
