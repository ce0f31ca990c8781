"""Spatial-pyramid coding of a semantic label map.

Level ``l`` splits the map into a 2^l x 2^l grid. Cell ``(r, c)`` covers rows
``[r*H // 2^l, (r+1)*H // 2^l)`` and the analogous columns, so maps whose sides
are not powers of two are still partitioned deterministically and level-l
cells are always unions of their four level-(l+1) children.

Code vector layout (part of the on-disk format): levels 0..L in order, cells
row-major within a level, classes fastest-varying within a cell. Each level
block holds raw pixel counts scaled by :func:`spm_weight`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import FeatureVector, SemanticMap, ValidationError

MAX_LEVELS = 10


@dataclass(frozen=True)
class SpmConfig:
    levels: int
    num_classes: int

    def __post_init__(self):
        if not 0 <= self.levels <= MAX_LEVELS:
            raise ValidationError("levels", f"L must be in [0, {MAX_LEVELS}], got {self.levels}")
        if self.num_classes < 2:
            raise ValidationError("num_classes", f"K must be >= 2, got {self.num_classes}")

    @property
    def code_length(self) -> int:
        return code_length(self.num_classes, self.levels)


@dataclass(frozen=True, eq=False)
class SpmCode:
    vector: FeatureVector
    config: SpmConfig

    def __post_init__(self):
        n = self.config.code_length
        if len(self.vector) != n:
            raise ValidationError("vector", f"length {len(self.vector)} != K(4^(L+1)-1)/3 = {n}")
        neg = self.vector.values < 0
        if neg.any():
            raise ValidationError("vector", "negative entry", (int(np.argmax(neg)),))

    @property
    def values(self) -> np.ndarray:
        return self.vector.values

    def __eq__(self, other):
        if not isinstance(other, SpmCode):
            return NotImplemented
        return self.config == other.config and self.vector == other.vector


def code_length(num_classes: int, levels: int) -> int:
    return num_classes * (4 ** (levels + 1) - 1) // 3


def spm_weight(level: int, levels: int) -> float:
    """Level weight: 2^-L for the whole-image level, 2^(l-L-1) otherwise."""
    if not 0 <= level <= levels:
        raise ValidationError("level", f"level {level} outside [0, {levels}]")
    if level == 0:
        return 2.0 ** (-levels)
    return 2.0 ** (level - levels - 1)


def cell_bounds(size: int, level: int) -> np.ndarray:
    n = 1 << level
    return (np.arange(n + 1, dtype=np.int64) * size) // n


def level_histograms(labels: np.ndarray, num_classes: int, level: int) -> np.ndarray:
    """Unweighted per-cell class counts, shape (2^l, 2^l, K)."""
    n = 1 << level
    rb = cell_bounds(labels.shape[0], level)
    cb = cell_bounds(labels.shape[1], level)
    out = np.zeros((n, n, num_classes), dtype=np.int64)
    for r in range(n):
        band = labels[rb[r]:rb[r + 1]]
        for c in range(n):
            cell = band[:, cb[c]:cb[c + 1]]
            out[r, c] = np.bincount(cell.ravel(), minlength=num_classes)
    return out


def encode_spm(m: SemanticMap, cfg: SpmConfig) -> SpmCode:
    if m.num_classes != cfg.num_classes:
        raise ValidationError("num_classes", f"map has K={m.num_classes}, config expects K={cfg.num_classes}")
    blocks = []
    for level in range(cfg.levels + 1):
        hist = level_histograms(m.labels, cfg.num_classes, level)
        blocks.append(spm_weight(level, cfg.levels) * hist.ravel())
    return SpmCode(FeatureVector(np.concatenate(blocks)), cfg)
