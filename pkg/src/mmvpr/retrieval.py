"""Landmark index, fused visual/semantic similarity, top-K query and recall@K."""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .bow import BowCode
from .core import ValidationError
from .spm import SpmCode, SpmConfig

Codes = Tuple[BowCode, SpmCode]

# Scores are ranked after rounding to this many decimals so that
# mathematically equal scores that differ by float rounding still fall under
# the ascending-id tie rule.
RANK_DECIMALS = 12


@dataclass(frozen=True)
class FusionConfig:
    alpha: float = 0.5

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValidationError("alpha", f"must be in [0, 1], got {self.alpha}")


@dataclass(frozen=True)
class LandmarkEntry:
    id: int
    g: BowCode
    h: SpmCode

    def __post_init__(self):
        if int(self.id) < 0:
            raise ValidationError("id", f"landmark ids are non-negative, got {self.id}")


@dataclass(frozen=True)
class RecallReport:
    """Recall at the reporting cutoffs plus the full curve R@1..R@N."""

    r_at: Dict[int, float]
    pct_cutoff: int
    curve: Tuple[float, ...]
    num_queries: int
    ranks: Tuple[int, ...] = field(repr=False, default=())

    @property
    def r_at_1pct(self) -> float:
        return self.r_at[self.pct_cutoff]


def top_percent_cutoff(n: int, percent: int = 1) -> int:
    """max(1, ceil(percent% of n)), computed in integers."""
    return max(1, -(-n * percent // 100))


def cosine(u: np.ndarray, v: np.ndarray) -> float:
    """Cosine of two vectors; 1 if both are zero, 0 if exactly one is."""
    if u.shape != v.shape:
        raise ValidationError("vector", f"dimension mismatch {u.shape} vs {v.shape}")
    nu = np.linalg.norm(u)
    nv = np.linalg.norm(v)
    if nu == 0 and nv == 0:
        return 1.0
    if nu == 0 or nv == 0:
        return 0.0
    return float(np.dot(u / nu, v / nv))


def fused_similarity(q: Codes, l: Codes, cfg: FusionConfig = FusionConfig()) -> float:
    a = cfg.alpha
    return a * cosine(q[0].values, l[0].values) + (1.0 - a) * cosine(q[1].values, l[1].values)


def _unit_rows(mat: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    norms = np.linalg.norm(mat, axis=1)
    safe = np.where(norms > 0, norms, 1.0)
    return mat / safe[:, None], norms == 0


def _cosines(unit: np.ndarray, zero: np.ndarray, v: np.ndarray) -> np.ndarray:
    nv = np.linalg.norm(v)
    if nv == 0:
        return zero.astype(np.float64)
    return np.where(zero, 0.0, unit @ (v / nv))


class LandmarkIndex:
    """In-memory store of landmark codes with exhaustive fused-score search.

    Queries only read the cached normalised matrices, so they may run
    concurrently; :meth:`add` and :meth:`remove` take a lock and invalidate
    the cache.
    """

    def __init__(self, entries: Iterable[LandmarkEntry] = (), spm_config: Optional[SpmConfig] = None):
        self._entries: Dict[int, LandmarkEntry] = {}
        self.spm_config = spm_config
        self._lock = threading.Lock()
        self._cache = None
        for e in entries:
            self.add(e)

    def __len__(self) -> int:
        return len(self._entries)

    def __iter__(self):
        return iter(self.entries)

    @property
    def entries(self) -> List[LandmarkEntry]:
        return [self._entries[i] for i in sorted(self._entries)]

    @property
    def g_dim(self) -> Optional[int]:
        return len(self.entries[0].g.vector) if self._entries else None

    @property
    def h_dim(self) -> Optional[int]:
        return len(self.entries[0].h.vector) if self._entries else None

    def add(self, entry: LandmarkEntry) -> None:
        with self._lock:
            if entry.id in self._entries:
                raise ValidationError("id", f"duplicate landmark id {entry.id}")
            if self._entries:
                first = next(iter(self._entries.values()))
                if len(entry.g.vector) != len(first.g.vector):
                    raise ValidationError("g", f"landmark {entry.id}: g-dim {len(entry.g.vector)} != {len(first.g.vector)}")
                if len(entry.h.vector) != len(first.h.vector):
                    raise ValidationError("h", f"landmark {entry.id}: h-dim {len(entry.h.vector)} != {len(first.h.vector)}")
            if self.spm_config is None:
                self.spm_config = entry.h.config
            elif entry.h.config != self.spm_config:
                raise ValidationError("h", f"landmark {entry.id}: SPM config {entry.h.config} != {self.spm_config}")
            self._entries[entry.id] = entry
            self._cache = None

    def remove(self, landmark_id: int) -> None:
        with self._lock:
            del self._entries[landmark_id]
            self._cache = None

    def _matrices(self):
        cache = self._cache
        if cache is None:
            entries = self.entries
            ids = np.array([e.id for e in entries], dtype=np.int64)
            g_unit, g_zero = _unit_rows(np.stack([e.g.values for e in entries]))
            h_unit, h_zero = _unit_rows(np.stack([e.h.values for e in entries]))
            cache = (ids, g_unit, g_zero, h_unit, h_zero)
            self._cache = cache
        return cache

    def scores(self, q: Codes, cfg: FusionConfig = FusionConfig()) -> Tuple[np.ndarray, np.ndarray]:
        """(ids, fused scores) for every landmark, in ascending id order."""
        if not self._entries:
            raise ValidationError("index", "index is empty")
        ids, g_unit, g_zero, h_unit, h_zero = self._matrices()
        if q[0].values.shape[0] != g_unit.shape[1]:
            raise ValidationError("g", f"query g-dim {q[0].values.shape[0]} != index g-dim {g_unit.shape[1]}")
        if q[1].values.shape[0] != h_unit.shape[1]:
            raise ValidationError("h", f"query h-dim {q[1].values.shape[0]} != index h-dim {h_unit.shape[1]}")
        a = cfg.alpha
        s = a * _cosines(g_unit, g_zero, q[0].values) + (1.0 - a) * _cosines(h_unit, h_zero, q[1].values)
        return ids, s

    def query(self, q: Codes, k: int, cfg: FusionConfig = FusionConfig()) -> List[Tuple[int, float]]:
        if k < 1:
            raise ValidationError("k", f"k must be >= 1, got {k}")
        ids, s = self.scores(q, cfg)
        order = np.lexsort((ids, -rank_key(s)))[:k]
        return [(int(ids[i]), float(s[i])) for i in order]


def rank_key(scores: np.ndarray) -> np.ndarray:
    return np.round(scores, RANK_DECIMALS)


def _as_index(index) -> LandmarkIndex:
    return index if isinstance(index, LandmarkIndex) else LandmarkIndex(index)


def query(index, q: Codes, k: int, cfg: FusionConfig = FusionConfig()) -> List[Tuple[int, float]]:
    """Top-min(k, N) landmarks by fused similarity; ties by ascending id.

    ``index`` is a :class:`LandmarkIndex` or any iterable of entries.
    """
    return _as_index(index).query(q, k, cfg)


def eval_recall(
    index,
    queries: Sequence[Tuple[Codes, int]],
    cfg: FusionConfig = FusionConfig(),
    cutoffs: Sequence[int] = (1, 5, 10),
) -> RecallReport:
    """Recall@K over ``queries`` given as ((g, h), true_id) pairs."""
    idx = _as_index(index)
    n = len(idx)
    known = set(idx._entries)
    ranks = []
    for codes, true_id in queries:
        if true_id not in known:
            raise ValidationError("true_id", f"landmark {true_id} is not in the index")
        ids, s = idx.scores(codes, cfg)
        s = rank_key(s)
        t = s[ids == true_id][0]
        # Rank under the (score desc, id asc) order.
        ahead = np.count_nonzero((s > t) | ((s == t) & (ids < true_id)))
        ranks.append(int(ahead) + 1)
    if not ranks:
        raise ValidationError("queries", "no queries to evaluate")
    r = np.asarray(ranks)
    hits = np.bincount(r, minlength=n + 1)[1:]
    curve = np.cumsum(hits) / len(r)
    pct = top_percent_cutoff(n)
    r_at = {}
    for c in sorted(set(cutoffs) | {pct}):
        if c < 1:
            raise ValidationError("cutoffs", f"cutoff must be >= 1, got {c}")
        r_at[c] = float(curve[min(c, n) - 1])
    return RecallReport(r_at, pct, tuple(float(v) for v in curve), len(r), tuple(ranks))
