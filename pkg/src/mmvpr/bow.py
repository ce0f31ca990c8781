"""Bag-of-visual-words coding over binary local descriptors.

Pipeline: FAST-style segment-test corners on the raw grayscale image, 256-bit
BRIEF-style descriptors on a 3x3 box-smoothed copy, nearest-word assignment
under Hamming distance against a flat vocabulary learned by k-majority
clustering, then an (optionally idf-weighted) L2-normalised word histogram.

No orientation or scale handling: queries are upright, single-scale frames.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from ._brief_pairs import BRIEF_PAIRS
from .core import FeatureVector, ImageBuffer, ValidationError

DESCRIPTOR_BITS = 256
DESCRIPTOR_BYTES = DESCRIPTOR_BITS // 8
PATCH_MARGIN = 16
ARC_LENGTH = 12
MIN_DETECT_SIZE = 7

DEFAULT_MAX_KP = 500
DEFAULT_THRESHOLD = 20
DEFAULT_VOCAB_SIZE = 1000
DEFAULT_MAX_ITERS = 50

# 16-pixel Bresenham circle of radius 3 as (dx, dy), clockwise from the top.
CIRCLE = np.array([
    (0, -3), (1, -3), (2, -2), (3, -1), (3, 0), (3, 1), (2, 2), (1, 3),
    (0, 3), (-1, 3), (-2, 2), (-3, 1), (-3, 0), (-3, -1), (-2, -2), (-1, -3),
])
_COMPASS = (0, 4, 8, 12)
_DIAGONALS = (2, 6, 10, 14)
_PAIRS = np.array(BRIEF_PAIRS, dtype=np.int64)

_ASSIGN_CHUNK = 8192


@dataclass(frozen=True)
class Keypoint:
    x: int
    y: int
    score: float


@dataclass(frozen=True)
class BinaryDescriptor:
    """256 bits packed MSB-first into 32 bytes (bit i is byte i//8, bit 7 - i%8)."""

    bits: bytes

    def __post_init__(self):
        if len(self.bits) != DESCRIPTOR_BYTES:
            raise ValidationError("bits", f"expected {DESCRIPTOR_BYTES} bytes, got {len(self.bits)}")

    @classmethod
    def from_bits(cls, bits: np.ndarray) -> "BinaryDescriptor":
        bits = np.asarray(bits, dtype=np.uint8)
        if bits.shape != (DESCRIPTOR_BITS,):
            raise ValidationError("bits", f"expected {DESCRIPTOR_BITS} bits, got shape {bits.shape}")
        return cls(np.packbits(bits).tobytes())

    def unpack(self) -> np.ndarray:
        return np.unpackbits(np.frombuffer(self.bits, dtype=np.uint8))

    def distance(self, other: "BinaryDescriptor") -> int:
        return int(np.count_nonzero(self.unpack() != other.unpack()))


@dataclass(frozen=True, eq=False)
class Vocabulary:
    words: Tuple[BinaryDescriptor, ...]
    seed: int
    idf: Optional[Tuple[float, ...]] = None

    def __post_init__(self):
        words = tuple(self.words)
        if len(words) < 1:
            raise ValidationError("words", "vocabulary needs at least one word")
        if len({w.bits for w in words}) != len(words):
            raise ValidationError("words", "words are not pairwise distinct")
        object.__setattr__(self, "words", words)
        if self.idf is not None:
            idf = np.asarray(self.idf, dtype=np.float64)
            if idf.shape != (len(words),):
                raise ValidationError("idf", f"expected {len(words)} weights, got shape {idf.shape}")
            bad = ~np.isfinite(idf) | (idf < 0)
            if bad.any():
                raise ValidationError("idf", "weight must be finite and >= 0", (int(np.argmax(bad)),))
            object.__setattr__(self, "idf", tuple(float(v) for v in idf))
        bits = np.stack([w.unpack() for w in words])
        bits.flags.writeable = False
        object.__setattr__(self, "_bits", bits)

    @property
    def size(self) -> int:
        return len(self.words)

    @property
    def word_bits(self) -> np.ndarray:
        """(W, 256) array of 0/1 bits."""
        return self._bits

    def __eq__(self, other):
        if not isinstance(other, Vocabulary):
            return NotImplemented
        return self.words == other.words and self.seed == other.seed and self.idf == other.idf


@dataclass(frozen=True, eq=False)
class BowCode:
    vector: FeatureVector

    def __post_init__(self):
        norm = float(np.linalg.norm(self.vector.values))
        if norm != 0.0 and abs(norm - 1.0) > 1e-6:
            raise ValidationError("vector", f"norm {norm} is neither 0 nor 1")

    @property
    def values(self) -> np.ndarray:
        return self.vector.values

    def __eq__(self, other):
        if not isinstance(other, BowCode):
            return NotImplemented
        return self.vector == other.vector


def to_gray(img: ImageBuffer) -> ImageBuffer:
    if img.channels == 1:
        return img
    if img.channels != 3:
        raise ValidationError("channels", f"unsupported channel count {img.channels}")
    rgb = img.samples.astype(np.float64)
    luma = 0.299 * rgb[:, :, 0] + 0.587 * rgb[:, :, 1] + 0.114 * rgb[:, :, 2]
    return ImageBuffer(np.clip(np.floor(luma + 0.5), 0, 255).astype(np.uint8))


def _gray_plane(img: ImageBuffer) -> np.ndarray:
    return to_gray(img).plane


# -- detection ---------------------------------------------------------------


def _arc_flags(ring: np.ndarray) -> np.ndarray:
    """True where a (n, 16) boolean ring has >= ARC_LENGTH contiguous Trues."""
    m = np.packbits(ring, axis=1, bitorder="little").view("<u2")[:, 0].astype(np.uint32)
    r = m | (m << 16)  # doubled so runs may wrap past position 15
    r &= r >> 1  # bit i: run of 2 starting at i
    r &= r >> 2  # run of 4
    r &= r >> 4  # run of 8
    r &= r >> 4  # run of 12
    return r != 0


def segment_test(plane: np.ndarray, ys: np.ndarray, xs: np.ndarray, threshold: int):
    """Full 16-point segment test at the given pixels.

    Returns (passed, score) where score sums |I_p - I_center| over the circle
    pixels on the qualifying side (brighter or darker). Pixels must be at
    least 3 away from every border.
    """
    w = plane.shape[1]
    flat = plane.ravel()
    at = ys * w + xs
    # Flat indexing is several times faster than 2-D fancy indexing here.
    center = flat[at].astype(np.int16)[:, None]
    ring = flat[at[:, None] + (CIRCLE[:, 1] * w + CIRCLE[:, 0])].astype(np.int16)
    diff = ring - center
    brighter = diff > threshold
    darker = diff < -threshold
    bright_ok = _arc_flags(brighter)
    passed = bright_ok | _arc_flags(darker)
    score = np.zeros(ys.shape[0], dtype=np.int64)
    sel = np.nonzero(passed)[0]
    d = diff[sel]
    side = np.where(bright_ok[sel, None], brighter[sel], darker[sel])
    score[sel] = np.where(side, np.abs(d), 0).sum(axis=1)
    return passed, score


def detect_arrays(plane: np.ndarray, max_kp: int, threshold: int):
    """Array form of :func:`detect_keypoints`: (xs, ys, scores), strongest first."""
    h, w = plane.shape
    m = PATCH_MARGIN
    empty = (np.zeros(0, np.int64),) * 3
    if h < MIN_DETECT_SIZE or w < MIN_DETECT_SIZE or h <= 2 * m or w <= 2 * m or max_kp <= 0:
        return empty

    p = plane.astype(np.int16)
    core = p[m:h - m, m:w - m]
    # A 12-long arc covers 3 of every 4 circle points spaced 4 apart, so a
    # corner passes 3 of {0, 4, 8, 12} and 3 of {2, 6, 10, 14} on one side.
    cand = None
    for group in (_COMPASS, _DIAGONALS):
        n_bright = np.zeros(core.shape, dtype=np.int8)
        n_dark = np.zeros(core.shape, dtype=np.int8)
        for i in group:
            dx, dy = CIRCLE[i]
            d = p[m + dy:h - m + dy, m + dx:w - m + dx] - core
            n_bright += d > threshold
            n_dark += d < -threshold
        bright, dark = n_bright >= 3, n_dark >= 3
        cand = (bright, dark) if cand is None else (cand[0] & bright, cand[1] & dark)
    cy, cx = np.nonzero(cand[0] | cand[1])
    if cy.size == 0:
        return empty
    ys, xs = cy + m, cx + m
    passed, score = segment_test(plane, ys, xs, threshold)
    ys, xs, score = ys[passed], xs[passed], score[passed]
    if ys.size == 0:
        return empty

    # Suppress a corner if a neighbour scores higher, or scores the same and
    # comes first in raster order.
    grid = np.zeros((h, w), dtype=np.int64)
    grid[ys, xs] = score
    keep = np.ones(ys.size, dtype=bool)
    for dy in (-1, 0, 1):
        for dx in (-1, 0, 1):
            if dy == 0 and dx == 0:
                continue
            nb = grid[ys + dy, xs + dx]
            earlier = dy < 0 or (dy == 0 and dx < 0)
            keep &= ~((nb > score) | ((nb == score) & earlier))
    ys, xs, score = ys[keep], xs[keep], score[keep]

    order = np.lexsort((xs, ys, -score))[:max_kp]
    return xs[order], ys[order], score[order]


def detect_keypoints(
    img: ImageBuffer,
    max_kp: int = DEFAULT_MAX_KP,
    threshold: int = DEFAULT_THRESHOLD,
) -> List[Keypoint]:
    """Segment-test corners with 3x3 non-maximum suppression.

    Only pixels at least ``PATCH_MARGIN`` from every border are considered so
    that every returned keypoint can be described. Returns the ``max_kp``
    strongest, ties broken by (y, x) ascending.
    """
    xs, ys, score = detect_arrays(_gray_plane(img), max_kp, threshold)
    return [Keypoint(int(x), int(y), float(s)) for x, y, s in zip(xs, ys, score)]


# -- description -------------------------------------------------------------


def box_sum3(plane: np.ndarray) -> np.ndarray:
    """3x3 box sums (integer, so brightness offsets shift every value equally).

    Output[y, x] is the sum centred on plane[y + 1, x + 1].
    """
    p = plane.astype(np.int32)
    rows = p[:-2] + p[1:-1] + p[2:]
    return rows[:, :-2] + rows[:, 1:-1] + rows[:, 2:]


def describe_at(plane: np.ndarray, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """(n, 256) uint8 bit matrix for keypoints at (xs, ys) on a grayscale plane."""
    xs = np.asarray(xs, dtype=np.int64)
    ys = np.asarray(ys, dtype=np.int64)
    if xs.size == 0:
        return np.zeros((0, DESCRIPTOR_BITS), dtype=np.uint8)
    h, w = plane.shape
    bad = (xs < PATCH_MARGIN) | (ys < PATCH_MARGIN) | (xs >= w - PATCH_MARGIN) | (ys >= h - PATCH_MARGIN)
    if bad.any():
        i = int(np.argmax(bad))
        raise ValidationError(
            "keypoint", f"({xs[i]}, {ys[i]}) closer than {PATCH_MARGIN} px to the border of a {w}x{h} image"
        )
    smooth = box_sum3(plane)
    sw = smooth.shape[1]
    flat = smooth.ravel()
    # box_sum3 output is offset by one pixel in both axes.
    at = ((ys - 1) * sw + (xs - 1))[:, None]
    a = flat[at + (_PAIRS[:, 1] * sw + _PAIRS[:, 0])]
    b = flat[at + (_PAIRS[:, 3] * sw + _PAIRS[:, 2])]
    return (a < b).astype(np.uint8)


def describe(img: ImageBuffer, kp: Keypoint) -> BinaryDescriptor:
    return BinaryDescriptor.from_bits(describe_at(_gray_plane(img), [kp.x], [kp.y])[0])


def extract(
    img: ImageBuffer,
    max_kp: int = DEFAULT_MAX_KP,
    threshold: int = DEFAULT_THRESHOLD,
) -> np.ndarray:
    """Detect and describe in one pass; returns the (n, 256) bit matrix."""
    plane = _gray_plane(img)
    xs, ys, _ = detect_arrays(plane, max_kp, threshold)
    return describe_at(plane, xs, ys)


# -- Hamming geometry ----------------------------------------------------------


def hamming_matrix(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Pairwise Hamming distances between rows of two 0/1 bit matrices.

    Computed as |a| + |b| - 2 a.b in float32; every intermediate is an
    integer below 2^24, so the result is exact.
    """
    bf = b.astype(np.float32)
    return _hamming_f32(a, bf, bf.sum(axis=1)).astype(np.int32)


def _hamming_f32(a: np.ndarray, bf: np.ndarray, b_ones: np.ndarray) -> np.ndarray:
    af = a.astype(np.float32)
    d = af @ bf.T
    d *= -2.0
    d += af.sum(axis=1)[:, None]
    d += b_ones[None, :]
    return d


def nearest_word(bits: np.ndarray, words: np.ndarray) -> np.ndarray:
    """Index of the closest word for every row; ties go to the lowest index."""
    wf = words.astype(np.float32)
    ones = wf.sum(axis=1)
    out = np.empty(bits.shape[0], dtype=np.int64)
    for start in range(0, bits.shape[0], _ASSIGN_CHUNK):
        chunk = bits[start:start + _ASSIGN_CHUNK]
        out[start:start + chunk.shape[0]] = np.argmin(_hamming_f32(chunk, wf, ones), axis=1)
    return out


def _packed(bits: np.ndarray) -> np.ndarray:
    return np.packbits(bits, axis=1).view(np.uint64)


def _distances_to(packed: np.ndarray, row: np.ndarray) -> np.ndarray:
    return np.bitwise_count(packed ^ row).sum(axis=1, dtype=np.int64)


# -- vocabulary ----------------------------------------------------------------


def _as_bit_matrix(descriptors: Union[np.ndarray, Iterable[BinaryDescriptor]]) -> np.ndarray:
    if isinstance(descriptors, np.ndarray):
        bits = descriptors.astype(np.uint8)
        if bits.ndim != 2 or bits.shape[1] != DESCRIPTOR_BITS:
            raise ValidationError("descriptors", f"expected (n, {DESCRIPTOR_BITS}) bits, got {bits.shape}")
        return bits
    rows = [d.unpack() for d in descriptors]
    if not rows:
        return np.zeros((0, DESCRIPTOR_BITS), dtype=np.uint8)
    return np.stack(rows)


def build_vocab(
    descriptors: Union[np.ndarray, Sequence[BinaryDescriptor]],
    size: int = DEFAULT_VOCAB_SIZE,
    seed: int = 0,
    max_iters: int = DEFAULT_MAX_ITERS,
) -> Vocabulary:
    """k-majority clustering of binary descriptors under Hamming distance.

    Initial words are chosen by greedy farthest-point sampling starting from
    a seeded random descriptor. Each iteration assigns descriptors to their
    nearest word (ties to the lowest index) and replaces every word by the
    per-bit majority of its members (ties to 0). Iteration stops when no
    assignment changes or after ``max_iters`` rounds.
    """
    bits = _as_bit_matrix(descriptors)
    n = bits.shape[0]
    if size < 1:
        raise ValidationError("size", f"vocabulary size must be >= 1, got {size}")
    if n < size:
        raise ValidationError("descriptors", f"{n} descriptors cannot form {size} words")

    rng = np.random.default_rng(seed)
    packed = _packed(bits)
    chosen = [int(rng.integers(n))]
    min_d = _distances_to(packed, packed[chosen[0]])
    for _ in range(1, size):
        nxt = int(np.argmax(min_d))
        if min_d[nxt] == 0:
            raise ValidationError("descriptors", f"only {len(chosen)} distinct descriptors for {size} words")
        chosen.append(nxt)
        np.minimum(min_d, _distances_to(packed, packed[nxt]), out=min_d)
    words = bits[chosen].copy()

    assign = None
    for _ in range(max_iters):
        new_assign = nearest_word(bits, words)
        if assign is not None and np.array_equal(new_assign, assign):
            break
        assign = new_assign
        words = _majority_update(bits, packed, assign, words)
    return Vocabulary(tuple(BinaryDescriptor.from_bits(w) for w in words), int(seed))


def _majority_update(bits, packed, assign, old):
    size = old.shape[0]
    order = np.argsort(assign, kind="stable")
    counts = np.bincount(assign, minlength=size)
    sums = np.zeros((size, bits.shape[1]), dtype=np.int64)
    present = np.nonzero(counts)[0]
    starts = np.concatenate([[0], np.cumsum(counts)[:-1]])[present]
    sums[present] = np.add.reduceat(bits[order].astype(np.int64), starts, axis=0)
    proposed = (2 * sums > counts[:, None]).astype(np.uint8)
    proposed[counts == 0] = old[counts == 0]

    # Keep words pairwise distinct: a word colliding with an earlier one falls
    # back to its previous value, then to the descriptor farthest from the
    # words fixed so far.
    out = np.empty_like(old)
    seen = set()
    for j in range(size):
        cand = proposed[j]
        if cand.tobytes() in seen:
            cand = old[j]
        if cand.tobytes() in seen:
            fixed = _packed(out[:j])
            d = np.full(bits.shape[0], np.iinfo(np.int64).max)
            for row in fixed:
                np.minimum(d, _distances_to(packed, row), out=d)
            cand = bits[int(np.argmax(d))]
        out[j] = cand
        seen.add(cand.tobytes())
    return out


def compute_idf(vocab: Vocabulary, per_image_bits: Iterable[np.ndarray]) -> Vocabulary:
    """Attach idf weights max(0, log(N / (1 + n_w))) from a training corpus.

    ``n_w`` counts the images in which word w occurs at least once.
    """
    words = vocab.word_bits
    doc_freq = np.zeros(vocab.size, dtype=np.int64)
    n_images = 0
    for bits in per_image_bits:
        n_images += 1
        if len(bits):
            doc_freq[np.unique(nearest_word(bits, words))] += 1
    if n_images == 0:
        raise ValidationError("per_image_bits", "idf needs at least one training image")
    idf = np.maximum(np.log(n_images / (1.0 + doc_freq)), 0.0)
    return Vocabulary(vocab.words, vocab.seed, tuple(idf))


# -- encoding ------------------------------------------------------------------


def bow_from_bits(bits: np.ndarray, vocab: Vocabulary, use_idf: bool = False) -> BowCode:
    hist = np.zeros(vocab.size, dtype=np.float64)
    if len(bits):
        hist += np.bincount(nearest_word(bits, vocab.word_bits), minlength=vocab.size)
    if use_idf:
        if vocab.idf is None:
            raise ValidationError("idf", "vocabulary carries no idf weights")
        hist *= np.asarray(vocab.idf)
    norm = np.linalg.norm(hist)
    if norm > 0:
        hist /= norm
    return BowCode(FeatureVector(hist))


def encode_bow(
    img: ImageBuffer,
    vocab: Vocabulary,
    use_idf: bool = False,
    max_kp: int = DEFAULT_MAX_KP,
    threshold: int = DEFAULT_THRESHOLD,
) -> BowCode:
    return bow_from_bits(extract(img, max_kp, threshold), vocab, use_idf)
