"""Experiment plumbing shared by the CLI and the acceptance tests.

A *source* says which inputs stand in for perception output:
``ground_truth`` uses the static image and static labels as-is; ``degraded``
runs :func:`mmvpr.synth.degrade` and codes the argmax of the noisy
probability map together with the noisy image.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple

import numpy as np

from .bow import DEFAULT_MAX_KP, DEFAULT_THRESHOLD, Vocabulary, bow_from_bits, extract
from .core import ImageBuffer, SemanticMap, ValidationError, argmax_map
from .retrieval import FusionConfig, LandmarkEntry, LandmarkIndex, RecallReport, eval_recall
from .spm import SpmConfig, encode_spm
from .synth import LandmarkSample, NoiseSpec, degrade

SOURCES = ("ground_truth", "degraded")


@dataclass(frozen=True)
class Perception:
    """How query/landmark inputs are produced from a sample."""

    source: str = "ground_truth"
    noise: NoiseSpec = NoiseSpec()
    image_role: str = "static"
    seed: int = 0

    def __post_init__(self):
        if self.source not in SOURCES:
            raise ValidationError("source", f"expected one of {SOURCES}, got {self.source!r}")
        if self.image_role not in ("static", "dynamic"):
            raise ValidationError("image_role", f"expected 'static' or 'dynamic', got {self.image_role!r}")

    def inputs(self, sample: LandmarkSample) -> Tuple[SemanticMap, ImageBuffer]:
        if self.source == "ground_truth":
            img = sample.static_image if self.image_role == "static" else sample.dynamic_image
            return sample.static_semantics, img
        probs, img = degrade(sample, self.noise, self.seed, self.image_role)
        return argmax_map(probs), img


@dataclass(frozen=True)
class Coder:
    vocab: Vocabulary
    spm: SpmConfig
    use_idf: bool = False
    max_kp: int = DEFAULT_MAX_KP
    threshold: int = DEFAULT_THRESHOLD

    def encode(self, semantics: SemanticMap, image: ImageBuffer):
        g = bow_from_bits(extract(image, self.max_kp, self.threshold), self.vocab, self.use_idf)
        return g, encode_spm(semantics, self.spm)


def build_index(samples: Sequence[LandmarkSample], coder: Coder, perception: Perception = Perception()) -> LandmarkIndex:
    entries = []
    for s in samples:
        g, h = coder.encode(*perception.inputs(s))
        entries.append(LandmarkEntry(s.id, g, h))
    return LandmarkIndex(entries, coder.spm)


def query_codes(samples: Sequence[LandmarkSample], coder: Coder, perception: Perception):
    return [(coder.encode(*perception.inputs(s)), s.id) for s in samples]


def training_descriptors(
    samples: Sequence[LandmarkSample],
    perception: Perception,
    max_kp: int = DEFAULT_MAX_KP,
    threshold: int = DEFAULT_THRESHOLD,
) -> List[np.ndarray]:
    """Per-image descriptor bit matrices for vocabulary training."""
    return [extract(perception.inputs(s)[1], max_kp, threshold) for s in samples]


@dataclass(frozen=True)
class BenchRow:
    levels: int
    recall: RecallReport
    coding_ms: float


def bench_coding(
    samples: Sequence[LandmarkSample],
    vocab: Vocabulary,
    levels: Sequence[int],
    query_perception: Perception,
    repetitions: int = 5,
    alpha: float = 0.5,
    use_idf: bool = False,
    cutoffs: Sequence[int] = (1, 5, 10),
) -> List[BenchRow]:
    """Recall and per-query coding time for each pyramid depth.

    The index holds ground-truth codes. Query perception outputs are produced
    once up front; only the coding of both modalities (BoW on the image, SPM
    on the label map) is timed. After one untimed warm-up pass, each query is
    coded ``repetitions`` times per level with the levels interleaved, so slow
    drift in machine load hits every level alike. Per level the reported time
    is the per-query median, averaged over queries.
    """
    if repetitions < 1:
        raise ValidationError("repetitions", f"need at least one repetition, got {repetitions}")
    if not samples:
        raise ValidationError("samples", "benchmark needs at least one landmark")
    k = samples[0].static_semantics.num_classes
    inputs = [query_perception.inputs(s) for s in samples]
    coders = [Coder(vocab, SpmConfig(L, k), use_idf) for L in levels]
    codes = [[c.encode(m, img) for m, img in inputs] for c in coders]  # doubles as warm-up

    times = np.zeros((len(coders), len(inputs), repetitions))
    for qi, (m, img) in enumerate(inputs):
        for rep in range(repetitions):
            for li, coder in enumerate(coders):
                t0 = time.perf_counter()
                coder.encode(m, img)
                times[li, qi, rep] = time.perf_counter() - t0

    ids = [s.id for s in samples]
    rows = []
    for li, coder in enumerate(coders):
        index = build_index(samples, coder)
        report = eval_recall(index, list(zip(codes[li], ids)), FusionConfig(alpha), cutoffs)
        per_query = np.median(times[li], axis=1)
        rows.append(BenchRow(coder.spm.levels, report, 1000.0 * float(per_query.mean())))
    return rows


def recall_row(report: RecallReport, cutoffs: Sequence[int] = (1, 5, 10)) -> Dict[str, float]:
    row = {f"R@{c}": report.r_at[c] for c in cutoffs}
    row["R@1%"] = report.r_at_1pct
    return row
