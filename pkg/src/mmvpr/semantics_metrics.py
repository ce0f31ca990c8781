"""Segmentation metrics (PA, MPA, MIoU, FWIoU) and the class-weighted CE score."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .core import ClassStats, ProbabilityMap, SemanticMap, ValidationError

CLAMP_FLOOR = 1e-12


class NonFiniteLossError(ArithmeticError):
    """A ground-truth class has zero probability, so its log is -inf."""

    def __init__(self, position: Tuple[int, int], label: int):
        self.position = position
        self.label = label
        super().__init__(f"S[{position[0]}, {position[1]}, {label}] = 0 gives a non-finite loss")


@dataclass(frozen=True, eq=False)
class ConfusionMatrix:
    """counts[i, j] = pixels of ground-truth class i predicted as class j."""

    counts: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.counts)
        if c.ndim != 2 or c.shape[0] != c.shape[1]:
            raise ValidationError("counts", f"expected a square matrix, got shape {c.shape}")
        if (c < 0).any():
            pos = tuple(int(i) for i in np.argwhere(c < 0)[0])
            raise ValidationError("counts", "negative count", pos)
        c = c.astype(np.int64)
        c.flags.writeable = False
        object.__setattr__(self, "counts", c)

    @property
    def num_classes(self) -> int:
        return self.counts.shape[0]

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def __add__(self, other: "ConfusionMatrix") -> "ConfusionMatrix":
        return ConfusionMatrix(self.counts + other.counts)


@dataclass(frozen=True)
class SegScores:
    pa: float
    mpa: float
    miou: float
    fwiou: float
    # NaN marks a class absent from both ground truth and prediction.
    per_class_iou: Tuple[float, ...]


def confusion(gt: SemanticMap, pred: SemanticMap) -> ConfusionMatrix:
    if gt.shape != pred.shape:
        raise ValidationError("pred", f"shape {pred.shape} does not match ground truth {gt.shape}")
    if gt.num_classes != pred.num_classes:
        raise ValidationError("pred", f"K={pred.num_classes} does not match ground truth K={gt.num_classes}")
    k = gt.num_classes
    flat = gt.labels.ravel().astype(np.int64) * k + pred.labels.ravel()
    return ConfusionMatrix(np.bincount(flat, minlength=k * k).reshape(k, k))


def seg_scores(cm: ConfusionMatrix) -> SegScores:
    counts = cm.counts.astype(np.float64)
    total = counts.sum()
    if total <= 0:
        raise ValidationError("counts", "confusion matrix is empty")
    diag = np.diag(counts)
    rows = counts.sum(axis=1)
    cols = counts.sum(axis=0)
    union = rows + cols - diag

    with np.errstate(invalid="ignore", divide="ignore"):
        class_acc = np.where(rows > 0, diag / rows, np.nan)
        iou = np.where(union > 0, diag / union, np.nan)

    pa = diag.sum() / total
    mpa = float(np.nanmean(class_acc))
    miou = float(np.nanmean(iou))
    fwiou = float(np.sum((rows / total) * np.nan_to_num(iou, nan=0.0)))
    return SegScores(float(pa), mpa, miou, fwiou, tuple(float(v) for v in iou))


def ce_weight(r_c: float, epsilon: float = 0.02) -> float:
    """Per-class weight 1/log(r_c + 1 + eps); rarer classes weigh more."""
    return 1.0 / np.log(r_c + 1.0 + epsilon)


def weighted_ce(
    s: ProbabilityMap,
    gt: SemanticMap,
    stats: ClassStats,
    reduction: str = "sum",
    clamp: bool = False,
) -> float:
    """Class-weighted cross entropy of ``s`` against ``gt`` (natural log).

    Each pixel contributes ``-log(S[i, j, c]) / log(r_c + 1 + eps)`` with ``c``
    its ground-truth class. A zero probability on the true class raises
    :class:`NonFiniteLossError` unless ``clamp`` is set, in which case the
    probability is floored at 1e-12.
    """
    if reduction not in ("sum", "mean"):
        raise ValueError(f"reduction must be 'sum' or 'mean', got {reduction!r}")
    if (s.height, s.width) != gt.shape:
        raise ValidationError("gt", f"shape {gt.shape} does not match probabilities {(s.height, s.width)}")
    if s.num_classes != gt.num_classes or stats.num_classes != s.num_classes:
        raise ValidationError(
            "num_classes",
            f"S has K={s.num_classes}, gt K={gt.num_classes}, stats K={stats.num_classes}",
        )
    rows, cols = np.indices(gt.shape)
    p = s.probs[rows, cols, gt.labels]
    if clamp:
        p = np.maximum(p, CLAMP_FLOOR)
    elif (p <= 0).any():
        r, c = (int(i) for i in np.argwhere(p <= 0)[0])
        raise NonFiniteLossError((r, c), int(gt.labels[r, c]))
    r = np.asarray(stats.frequencies)
    weights = 1.0 / np.log(r + 1.0 + stats.epsilon)
    terms = -weights[gt.labels] * np.log(p)
    return float(terms.sum() if reduction == "sum" else terms.mean())
