"""Joint captioning of lifelogging photo streams."""

from lifecap.alignment import AlignmentModel, RegionSet, align_score, unary_cost
from lifecap.decoder import (
    CaptionHypothesis,
    CandidateSet,
    DecoderConfig,
    Predictor,
    ToyPredictor,
    Vocabulary,
    beam_search,
    diverse_m_best,
    pool_candidates,
)
from lifecap.errors import (
    InvalidConfigError,
    InvalidInputError,
    LifecapError,
    ManifestError,
    UndefinedScoreError,
)
from lifecap.formats import ImageRecord, StreamManifest, load_manifest
from lifecap.joint import DiarySegment, EnergyInstance, energy, group_segments, viterbi_joint
from lifecap.metrics import EvalPair, EvalReport, summarize
from lifecap.pipeline import PipelineConfig, run_pipeline
from lifecap.retrieval import KeywordConfig, SensitivityLabel, classify_image, confusion_matrix, pr_curve

__version__ = "0.1.0"

__all__ = [
    "AlignmentModel",
    "RegionSet",
    "align_score",
    "unary_cost",
    "CaptionHypothesis",
    "CandidateSet",
    "DecoderConfig",
    "Predictor",
    "ToyPredictor",
    "Vocabulary",
    "beam_search",
    "diverse_m_best",
    "pool_candidates",
    "InvalidConfigError",
    "InvalidInputError",
    "LifecapError",
    "ManifestError",
    "UndefinedScoreError",
    "ImageRecord",
    "StreamManifest",
    "load_manifest",
    "DiarySegment",
    "EnergyInstance",
    "energy",
    "group_segments",
    "viterbi_joint",
    "EvalPair",
    "EvalReport",
    "summarize",
    "PipelineConfig",
    "run_pipeline",
    "KeywordConfig",
    "SensitivityLabel",
    "classify_image",
    "confusion_matrix",
    "pr_curve",
]
