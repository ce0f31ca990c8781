"""Multi-modal visual place recognition: SPM-coded semantics fused with BoW-coded images."""

from .bow import BowCode, Vocabulary, build_vocab, describe, detect_keypoints, encode_bow, to_gray
from .core import (
    ClassStats,
    FeatureVector,
    ImageBuffer,
    ProbabilityMap,
    SemanticMap,
    ValidationError,
    argmax_map,
)
from .image_metrics import ImgScores, img_scores
from .retrieval import FusionConfig, LandmarkEntry, LandmarkIndex, RecallReport, eval_recall, fused_similarity, query
from .semantics_metrics import ConfusionMatrix, SegScores, confusion, seg_scores, weighted_ce
from .spm import SpmCode, SpmConfig, encode_spm, spm_weight
from .synth import LandmarkSample, NoiseSpec, WorldSpec, degrade, generate_world

__version__ = "0.1.0"

__all__ = [
    "BowCode",
    "Vocabulary",
    "build_vocab",
    "describe",
    "detect_keypoints",
    "encode_bow",
    "to_gray",
    "ClassStats",
    "FeatureVector",
    "ImageBuffer",
    "ProbabilityMap",
    "SemanticMap",
    "ValidationError",
    "argmax_map",
    "ImgScores",
    "img_scores",
    "FusionConfig",
    "LandmarkEntry",
    "LandmarkIndex",
    "RecallReport",
    "eval_recall",
    "fused_similarity",
    "query",
    "ConfusionMatrix",
    "SegScores",
    "confusion",
    "seg_scores",
    "weighted_ce",
    "SpmCode",
    "SpmConfig",
    "encode_spm",
    "spm_weight",
    "LandmarkSample",
    "NoiseSpec",
    "WorldSpec",
    "degrade",
    "generate_world",
]
