"""End-to-end stream captioning: decode, pool, score, smooth, segment."""

from __future__ import annotations

import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from lifecap.alignment import AlignmentModel, EmptySentenceWarning, align_score
from lifecap.decoder import (
    CandidateSet,
    DecoderConfig,
    Predictor,
    ToyPredictor,
    diverse_m_best,
    pool_candidates,
)
from lifecap.errors import InvalidConfigError, InvalidInputError
from lifecap.formats import (
    Candidate,
    StreamManifest,
    candidate_to_json,
    dumps,
    write_atomically,
)
from lifecap.joint import DiarySegment, EnergyInstance, energy, group_segments, viterbi_joint
from lifecap.metrics import EvalPair, EvalReport, HEADERS, summarize
from lifecap.metrics.tokenize import tokenize
from lifecap.retrieval import KeywordConfig, RetrievalResult, evaluate_retrieval, pr_csv

# stands in for an infinite cost when an image never proposed a sentence
FOREIGN_COST = 1e9


@dataclass
class PipelineConfig:
    decoder: DecoderConfig = field(default_factory=DecoderConfig)
    beta: float = 1.0
    keywords: KeywordConfig = field(default_factory=KeywordConfig)
    predictor_path: str | None = None
    word_vectors_path: str | None = None
    output_dir: str | None = None
    window: int | None = None
    foreign_cost: float = FOREIGN_COST
    oov_policy: str = "drop"
    workers: int = 1

    def __post_init__(self):
        if not self.beta >= 0:
            raise InvalidConfigError("beta must be nonnegative")
        if self.window is not None and self.window < 1:
            raise InvalidConfigError("window must be a positive number of images")
        for attr in ("predictor_path", "word_vectors_path"):
            p = getattr(self, attr)
            if p is not None and not Path(p).is_file():
                raise FileNotFoundError(p)


@dataclass
class Models:
    predictor: Predictor | None = None
    alignment: AlignmentModel | None = None

    @classmethod
    def load(cls, config: PipelineConfig) -> "Models":
        predictor = ToyPredictor.load(config.predictor_path) if config.predictor_path else None
        alignment = AlignmentModel.load(config.word_vectors_path, config.oov_policy) if config.word_vectors_path else None
        return cls(predictor, alignment)


@dataclass
class PipelineResult:
    candidates: dict[str, list[Candidate]]
    pooled: CandidateSet
    instance: EnergyInstance
    labeling: list[int]
    energy: float
    segments: list[DiarySegment]
    retrieval: RetrievalResult
    report: EvalReport | None = None
    files: dict[str, str] = field(default_factory=dict)


def generate_candidates(manifest: StreamManifest, config: PipelineConfig, predictor: Predictor | None) -> dict[str, list[Candidate]]:
    """Per-image candidate list: precomputed ones if present, else decoded."""

    def one(rec):
        if rec.candidates:
            return rec.candidates
        if predictor is None:
            raise InvalidConfigError(f"image {rec.image_id!r} needs decoding but no predictor was given")
        hyps = diverse_m_best(predictor, rec.feature, config.decoder)
        return [Candidate(h.text(predictor.vocab), h.log_score, h.round) for h in hyps]

    with ThreadPoolExecutor(max_workers=max(1, config.workers)) as pool:
        lists = list(pool.map(one, manifest.records))
    return {rec.image_id: cands for rec, cands in zip(manifest.records, lists)}


def pool(manifest: StreamManifest, candidates: dict[str, list[Candidate]]) -> CandidateSet:
    """Pool the stream's candidates, leaving out captions with no words."""
    per_image = []
    for rec in manifest.records:
        toks = [(tokenize(c.text), c.log_score) for c in candidates[rec.image_id]]
        per_image.append((rec.image_id, [(t, s) for t, s in toks if t]))
    return pool_candidates(per_image)


def build_unary(manifest: StreamManifest, pooled: CandidateSet, model: AlignmentModel | None, foreign_cost=FOREIGN_COST) -> np.ndarray:
    """K x |C| cost matrix.

    Images with regions are scored by negated alignment against every pooled
    sentence. Images without regions fall back to ``-log_score`` for the
    sentences they proposed themselves and ``foreign_cost`` for the rest.
    """
    K, C = len(manifest), len(pooled)
    unary = np.empty((K, C))
    for i, rec in enumerate(manifest.records):
        if rec.regions is not None and model is not None:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", EmptySentenceWarning)
                unary[i] = [-align_score(s.words, rec.regions, model) for s in pooled]
        elif rec.regions is not None:
            raise InvalidConfigError(f"image {rec.image_id!r} has regions but no word vectors were given")
        else:
            for j, s in enumerate(pooled):
                own = s.sources.get(rec.image_id)
                unary[i, j] = foreign_cost if own is None else -own
    return unary


def smooth(instance: EnergyInstance, beta: float, window: int | None = None) -> tuple[list[int], float]:
    """Minimum-energy labelling, optionally solved independently per window."""
    if window is None or window >= instance.num_images:
        return viterbi_joint(instance, beta)
    labeling = []
    for lo in range(0, instance.num_images, window):
        sub = EnergyInstance(instance.unary[lo : lo + window])
        labeling.extend(viterbi_joint(sub, beta)[0])
    return labeling, energy(instance, labeling, beta)


def top_captions(cands: list[Candidate], k: int) -> list[str]:
    order = sorted(range(len(cands)), key=lambda j: (-cands[j].log_score, j))
    return [cands[j].text for j in order[:k]]


def diary_text(segments: list[DiarySegment]) -> str:
    lines = []
    for seg in segments:
        n = len(seg)
        lines.append(f"{seg.start_time} - {seg.end_time}  [{n} image{'s' if n != 1 else ''}]  {seg.text}")
    return "\n".join(lines) + "\n"


def diary_json(segments: list[DiarySegment], stream_id="") -> str:
    return dumps(
        {
            "stream_id": stream_id,
            "segments": [
                {
                    "start_index": s.start_index,
                    "end_index": s.end_index,
                    "start_time": s.start_time,
                    "end_time": s.end_time,
                    "sentence": s.text,
                    "label": s.label,
                    "image_ids": s.image_ids,
                }
                for s in segments
            ],
        }
    ) + "\n"


def candidates_jsonl(manifest: StreamManifest, candidates: dict[str, list[Candidate]]) -> str:
    return "".join(
        dumps({"image_id": r.image_id, "timestamp": r.timestamp, "candidates": [candidate_to_json(c) for c in candidates[r.image_id]]}) + "\n"
        for r in manifest.records
    )


def report_files(report: EvalReport, label="") -> dict[str, str]:
    table = " | ".join(["", *HEADERS]) + "\n" + report.table_row(label) + "\n"
    return {"eval.json": dumps(report.to_dict()) + "\n", "eval.txt": table}


def retrieval_files(result: RetrievalResult) -> dict[str, str]:
    files = {
        "predictions.jsonl": "".join(
            dumps({"image_id": img, "label": d.label.short, "confidence": d.confidence, "matched": list(d.matched)}) + "\n"
            for img, d in result.detections.items()
        )
    }
    if result.confusion_3way is not None:
        files["confusion_3way.csv"] = result.confusion_3way.to_csv()
        files["confusion_2way.csv"] = result.confusion_2way.to_csv()
        files["retrieval.json"] = dumps(
            {"confusion_3way": result.confusion_3way.to_dict(), "confusion_2way": result.confusion_2way.to_dict()}
        ) + "\n"
    if result.pr_points:
        files["pr.csv"] = pr_csv(result.pr_points)
    return files


def run_pipeline(
    manifest: StreamManifest,
    config: PipelineConfig,
    models: Models | None = None,
    references: dict[str, list[str]] | None = None,
    truth: dict[str, str] | None = None,
) -> PipelineResult:
    """Caption a whole stream and write its outputs.

    Nothing is written unless every stage succeeds; with no ``output_dir``
    the result is only returned.
    """
    if not len(manifest):
        raise InvalidInputError("manifest is empty")
    if models is None:
        models = Models.load(config)

    candidates = generate_candidates(manifest, config, models.predictor)
    pooled = pool(manifest, candidates)
    if not len(pooled):
        raise InvalidInputError("no candidate sentences were produced")
    unary = build_unary(manifest, pooled, models.alignment, config.foreign_cost)
    instance = EnergyInstance(
        unary,
        images=[r.image_id for r in manifest.records],
        sentences=[s.words for s in pooled],
        timestamps=[r.timestamp for r in manifest.records],
    )
    labeling, total = smooth(instance, config.beta, config.window)
    segments = group_segments(instance, labeling)

    k = config.keywords.captions_per_image
    retrieval = evaluate_retrieval(
        {img: top_captions(c, k) for img, c in candidates.items()}, config.keywords, truth
    )

    report = None
    if references is not None:
        missing = [r.image_id for r in manifest.records if not references.get(r.image_id)]
        if missing:
            raise InvalidInputError(f"no reference sentences for images: {missing[:10]}")
        report = summarize(
            EvalPair.make(instance.sentences[lab], references[img]) for img, lab in zip(instance.images, labeling)
        )

    files = {
        "candidates.jsonl": candidates_jsonl(manifest, candidates),
        "selection.jsonl": "".join(
            dumps({"image_id": img, "label": lab, "text": " ".join(instance.sentences[lab])}) + "\n"
            for img, lab in zip(instance.images, labeling)
        ),
        "labeling.json": dumps(
            {"beta": config.beta, "energy": total, "labels": labeling, "num_candidates": instance.num_candidates}
        ) + "\n",
        "diary.txt": diary_text(segments),
        "diary.json": diary_json(segments, manifest.stream_id),
        **retrieval_files(retrieval),
    }
    if report is not None:
        files.update(report_files(report, manifest.stream_id))
    if config.output_dir is not None:
        write_atomically(config.output_dir, files)
    return PipelineResult(candidates, pooled, instance, labeling, total, segments, retrieval, report, files)
