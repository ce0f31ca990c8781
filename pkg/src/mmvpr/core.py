"""Domain types shared across the package.

All grids are row-major with the origin at the top-left pixel. Every type
validates itself on construction and freezes its arrays, so instances can be
shared freely between threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

PROB_SUM_TOL = 1e-4
CLASS_STATS_SUM_TOL = 1e-6


class ValidationError(ValueError):
    """Raised when a value violates a type invariant.

    ``field`` names the offending attribute and ``position`` (when known) the
    grid coordinate or vector index at fault.
    """

    def __init__(self, field: str, message: str, position: Optional[Tuple[int, ...]] = None):
        self.field = field
        self.position = position
        where = f" at {position}" if position is not None else ""
        super().__init__(f"{field}{where}: {message}")


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.ascontiguousarray(arr)
    if arr.flags.writeable:
        arr = arr.copy()
        arr.flags.writeable = False
    return arr


def _first_position(mask: np.ndarray) -> Tuple[int, ...]:
    return tuple(int(i) for i in np.argwhere(mask)[0])


@dataclass(frozen=True, eq=False)
class SemanticMap:
    """Per-pixel class labels, shape (H, W), values in [0, num_classes)."""

    labels: np.ndarray
    num_classes: int

    def __post_init__(self):
        labels = np.asarray(self.labels)
        if labels.ndim != 2:
            raise ValidationError("labels", f"expected a 2-D grid, got shape {labels.shape}")
        if labels.shape[0] < 1 or labels.shape[1] < 1:
            raise ValidationError("labels", f"empty grid {labels.shape}")
        if int(self.num_classes) < 2:
            raise ValidationError("num_classes", f"need at least 2 classes, got {self.num_classes}")
        if not np.issubdtype(labels.dtype, np.integer):
            if not np.all(np.equal(np.mod(labels, 1), 0)):
                raise ValidationError("labels", "non-integer label", _first_position(np.mod(labels, 1) != 0))
        bad = (labels < 0) | (labels >= self.num_classes)
        if bad.any():
            pos = _first_position(bad)
            raise ValidationError("labels", f"label {labels[pos]} outside [0, {self.num_classes})", pos)
        object.__setattr__(self, "num_classes", int(self.num_classes))
        object.__setattr__(self, "labels", _frozen(labels.astype(np.int32)))

    @property
    def height(self) -> int:
        return self.labels.shape[0]

    @property
    def width(self) -> int:
        return self.labels.shape[1]

    @property
    def shape(self) -> Tuple[int, int]:
        return self.labels.shape

    def __eq__(self, other):
        if not isinstance(other, SemanticMap):
            return NotImplemented
        return self.num_classes == other.num_classes and np.array_equal(self.labels, other.labels)


@dataclass(frozen=True, eq=False)
class ProbabilityMap:
    """Per-pixel class distributions, shape (H, W, K)."""

    probs: np.ndarray

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=np.float64)
        if probs.ndim != 3:
            raise ValidationError("probs", f"expected (H, W, K) array, got shape {probs.shape}")
        h, w, k = probs.shape
        if h < 1 or w < 1:
            raise ValidationError("probs", f"empty grid {probs.shape}")
        if k < 2:
            raise ValidationError("probs", f"need at least 2 classes, got {k}")
        bad = ~np.isfinite(probs) | (probs < 0) | (probs > 1)
        if bad.any():
            pos = _first_position(bad)
            raise ValidationError("probs", f"entry {probs[pos]!r} outside [0, 1]", pos)
        off = np.abs(probs.sum(axis=2) - 1.0) > PROB_SUM_TOL
        if off.any():
            pos = _first_position(off)
            raise ValidationError("probs", f"pixel sums to {probs[pos].sum():.6f}, not 1", pos)
        object.__setattr__(self, "probs", _frozen(probs))

    @property
    def height(self) -> int:
        return self.probs.shape[0]

    @property
    def width(self) -> int:
        return self.probs.shape[1]

    @property
    def num_classes(self) -> int:
        return self.probs.shape[2]

    def __eq__(self, other):
        if not isinstance(other, ProbabilityMap):
            return NotImplemented
        return np.array_equal(self.probs, other.probs)

    @classmethod
    def one_hot(cls, m: SemanticMap) -> "ProbabilityMap":
        probs = np.zeros(m.shape + (m.num_classes,), dtype=np.float64)
        rows, cols = np.indices(m.shape)
        probs[rows, cols, m.labels] = 1.0
        return cls(probs)


@dataclass(frozen=True, eq=False)
class ImageBuffer:
    """8-bit image stored as an (H, W, C) array with C in {1, 3}.

    A 2-D array is accepted and treated as grayscale.
    """

    samples: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.samples)
        if s.ndim == 2:
            s = s[:, :, None]
        if s.ndim != 3 or s.shape[2] not in (1, 3):
            raise ValidationError("samples", f"expected (H, W) or (H, W, 1|3), got shape {np.shape(self.samples)}")
        if s.shape[0] < 1 or s.shape[1] < 1:
            raise ValidationError("samples", f"empty image {s.shape}")
        if s.dtype != np.uint8:
            if not np.issubdtype(s.dtype, np.number):
                raise ValidationError("samples", f"non-numeric dtype {s.dtype}")
            bad = (s < 0) | (s > 255) | (np.mod(s, 1) != 0)
            if bad.any():
                pos = _first_position(bad)
                raise ValidationError("samples", f"value {s[pos]!r} is not an 8-bit intensity", pos)
            s = s.astype(np.uint8)
        object.__setattr__(self, "samples", _frozen(s))

    @property
    def height(self) -> int:
        return self.samples.shape[0]

    @property
    def width(self) -> int:
        return self.samples.shape[1]

    @property
    def channels(self) -> int:
        return self.samples.shape[2]

    @property
    def plane(self) -> np.ndarray:
        """(H, W) view of a grayscale image."""
        if self.channels != 1:
            raise ValidationError("channels", f"expected grayscale, got {self.channels} channels")
        return self.samples[:, :, 0]

    def __eq__(self, other):
        if not isinstance(other, ImageBuffer):
            return NotImplemented
        return np.array_equal(self.samples, other.samples)


@dataclass(frozen=True)
class ClassStats:
    """Class proportions in a training corpus, used to weight the CE score."""

    frequencies: Tuple[float, ...]
    epsilon: float = 0.02

    def __post_init__(self):
        r = np.asarray(self.frequencies, dtype=np.float64).ravel()
        if r.size < 2:
            raise ValidationError("frequencies", "need at least 2 classes")
        bad = ~np.isfinite(r) | (r < 0) | (r > 1)
        if bad.any():
            i = int(np.argmax(bad))
            raise ValidationError("frequencies", f"r={r[i]!r} outside [0, 1]", (i,))
        if abs(r.sum() - 1.0) > CLASS_STATS_SUM_TOL:
            raise ValidationError("frequencies", f"sum is {r.sum():.9f}, expected 1")
        if not (self.epsilon > 0):
            raise ValidationError("epsilon", f"must be > 0, got {self.epsilon}")
        object.__setattr__(self, "frequencies", tuple(float(v) for v in r))

    @property
    def num_classes(self) -> int:
        return len(self.frequencies)

    @classmethod
    def from_maps(cls, maps, epsilon: float = 0.02) -> "ClassStats":
        maps = list(maps)
        k = maps[0].num_classes
        counts = np.zeros(k, dtype=np.int64)
        for m in maps:
            counts += np.bincount(m.labels.ravel(), minlength=k)
        return cls(tuple(counts / counts.sum()), epsilon)


@dataclass(frozen=True, eq=False)
class FeatureVector:
    """Dense, finite, real-valued vector."""

    values: np.ndarray = field()

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 1:
            raise ValidationError("values", f"expected 1-D vector, got shape {v.shape}")
        bad = ~np.isfinite(v)
        if bad.any():
            i = int(np.argmax(bad))
            raise ValidationError("values", f"non-finite entry {v[i]!r}", (i,))
        object.__setattr__(self, "values", _frozen(v))

    def __len__(self) -> int:
        return self.values.shape[0]

    @property
    def length(self) -> int:
        return len(self)

    def __eq__(self, other):
        if not isinstance(other, FeatureVector):
            return NotImplemented
        return np.array_equal(self.values, other.values)


def argmax_map(s: ProbabilityMap) -> SemanticMap:
    """Label each pixel with its most probable class; ties go to the lowest index."""
    # np.argmax returns the first maximal index, which is the tie rule we want.
    return SemanticMap(np.argmax(s.probs, axis=2), s.num_classes)
