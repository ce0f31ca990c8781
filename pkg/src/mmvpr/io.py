"""File formats and dataset layout.

All binary formats are little-endian and start with a 4-byte magic and a u32
version (currently 1):

* ``MMPM`` probability map: u32 H, u32 W, u32 K, then H*W*K f32, row-major
  with the class index fastest-varying.
* ``MMFV`` feature vector: u32 length, then f32 values.
* ``MMVC`` vocabulary: u32 W, u64 seed, u32 idf flag, W x 32-byte words,
  then W f32 idf weights when the flag is 1.
* ``MMVI`` landmark index: u32 N, u32 g-dim, u32 h-dim, u32 SPM levels,
  u32 SPM classes, then per record u64 id, u32 g-len, u32 h-len, g-len f32,
  h-len f32.

Label maps and images use binary netpbm: P5 (maxval 255) for label maps and
grayscale images, P6 for RGB.

Readers validate everything before returning; writers are deterministic.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Optional, Sequence, Tuple

import numpy as np

from .bow import DESCRIPTOR_BYTES, BinaryDescriptor, BowCode, Vocabulary
from .core import FeatureVector, ImageBuffer, ProbabilityMap, SemanticMap, ValidationError
from .retrieval import LandmarkEntry, LandmarkIndex
from .spm import SpmCode, SpmConfig

FORMAT_VERSION = 1
MANIFEST_VERSION = 1
MANIFEST_NAME = "manifest.json"


class FormatError(ValueError):
    """A file does not parse or violates its format."""

    def __init__(self, path, message: str):
        self.path = str(path)
        super().__init__(f"{self.path}: {message}")


# -- binary helpers ------------------------------------------------------------


class _Reader:
    def __init__(self, path, data: bytes):
        self.path = path
        self.data = data
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise FormatError(self.path, f"truncated: needed {n} bytes at offset {self.pos}, file has {len(self.data)}")
        out = self.data[self.pos:self.pos + n]
        self.pos += n
        return out

    def u32(self) -> int:
        return struct.unpack("<I", self.take(4))[0]

    def u64(self) -> int:
        return struct.unpack("<Q", self.take(8))[0]

    def f32(self, n: int) -> np.ndarray:
        return np.frombuffer(self.take(4 * n), dtype="<f4").astype(np.float64)

    def header(self, magic: bytes):
        got = self.take(4)
        if got != magic:
            raise FormatError(self.path, f"bad magic {got!r}, expected {magic!r}")
        version = self.u32()
        if version != FORMAT_VERSION:
            raise FormatError(self.path, f"unsupported version {version}")

    def done(self):
        if self.pos != len(self.data):
            raise FormatError(self.path, f"{len(self.data) - self.pos} trailing bytes")


def _read(path) -> _Reader:
    with open(path, "rb") as f:
        return _Reader(path, f.read())


def _write(path, payload: bytes) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as f:
        f.write(payload)


def _f32(values: np.ndarray) -> bytes:
    return np.asarray(values, dtype="<f4").tobytes()


def _revalidate(path, build):
    """Run a constructor, turning invariant violations into format errors."""
    try:
        return build()
    except ValidationError as e:
        raise FormatError(path, str(e)) from e


# -- netpbm ----------------------------------------------------------------------


def _pnm_bytes(magic: bytes, samples: np.ndarray) -> bytes:
    h, w = samples.shape[:2]
    return magic + b"\n%d %d\n255\n" % (w, h) + np.ascontiguousarray(samples, dtype=np.uint8).tobytes()


def _parse_pnm(path) -> Tuple[bytes, np.ndarray]:
    with open(path, "rb") as f:
        data = f.read()
    tokens = []
    pos = 0
    while len(tokens) < 4:
        while pos < len(data) and data[pos:pos + 1].isspace():
            pos += 1
        if pos < len(data) and data[pos:pos + 1] == b"#":
            while pos < len(data) and data[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos:pos + 1].isspace() and data[pos:pos + 1] != b"#":
            pos += 1
        if start == pos:
            raise FormatError(path, "truncated netpbm header")
        tokens.append(data[start:pos])
    magic = tokens[0]
    if magic not in (b"P5", b"P6"):
        raise FormatError(path, f"unsupported netpbm type {magic!r}")
    try:
        w, h, maxval = (int(t) for t in tokens[1:])
    except ValueError:
        raise FormatError(path, "malformed netpbm header") from None
    if maxval != 255:
        raise FormatError(path, f"maxval {maxval} != 255")
    if w < 1 or h < 1:
        raise FormatError(path, f"invalid size {w}x{h}")
    pos += 1  # single whitespace byte after maxval
    channels = 3 if magic == b"P6" else 1
    need = w * h * channels
    body = data[pos:pos + need]
    if len(body) < need:
        raise FormatError(path, f"truncated pixel data: {len(body)} of {need} bytes")
    if len(data) != pos + need:
        raise FormatError(path, f"{len(data) - pos - need} trailing bytes")
    return magic, np.frombuffer(body, dtype=np.uint8).reshape(h, w, channels)


def write_label_map(path, m: SemanticMap) -> None:
    if m.num_classes > 256:
        raise ValidationError("num_classes", "P5 label maps hold at most 256 classes")
    _write(path, _pnm_bytes(b"P5", m.labels.astype(np.uint8)))


def read_label_map(path, num_classes: int) -> SemanticMap:
    magic, px = _parse_pnm(path)
    if magic != b"P5":
        raise FormatError(path, "label maps must be P5")
    labels = px[:, :, 0]
    bad = labels >= num_classes
    if bad.any():
        r, c = (int(i) for i in np.argwhere(bad)[0])
        raise FormatError(path, f"label {labels[r, c]} at (row {r}, col {c}) is outside [0, {num_classes})")
    return _revalidate(path, lambda: SemanticMap(labels, num_classes))


def write_image(path, img: ImageBuffer) -> None:
    magic = b"P5" if img.channels == 1 else b"P6"
    _write(path, _pnm_bytes(magic, img.samples))


def read_image(path) -> ImageBuffer:
    _, px = _parse_pnm(path)
    return ImageBuffer(px)


def write_mask(path, mask: np.ndarray) -> None:
    _write(path, _pnm_bytes(b"P5", np.asarray(mask, dtype=np.uint8)))


def read_mask(path) -> np.ndarray:
    return read_label_map(path, 2).labels.astype(bool)


# -- probability maps ------------------------------------------------------------


def write_prob_map(path, s: ProbabilityMap) -> None:
    head = b"MMPM" + struct.pack("<IIII", FORMAT_VERSION, s.height, s.width, s.num_classes)
    _write(path, head + _f32(s.probs))


def read_prob_map(path) -> ProbabilityMap:
    r = _read(path)
    r.header(b"MMPM")
    h, w, k = r.u32(), r.u32(), r.u32()
    if h * w * k * 4 != len(r.data) - r.pos:
        raise FormatError(path, f"payload is {len(r.data) - r.pos} bytes, expected {h * w * k * 4} for {h}x{w}x{k}")
    probs = r.f32(h * w * k).reshape(h, w, k)
    r.done()
    return _revalidate(path, lambda: ProbabilityMap(probs))


# -- feature vectors -------------------------------------------------------------


def write_code(path, v: FeatureVector) -> None:
    _write(path, b"MMFV" + struct.pack("<II", FORMAT_VERSION, len(v)) + _f32(v.values))


def read_code(path) -> FeatureVector:
    r = _read(path)
    r.header(b"MMFV")
    n = r.u32()
    values = r.f32(n)
    r.done()
    return _revalidate(path, lambda: FeatureVector(values))


# -- vocabularies ----------------------------------------------------------------


def write_vocab(path, vocab: Vocabulary) -> None:
    if not 0 <= vocab.seed < 2 ** 64:
        raise ValidationError("seed", f"seed {vocab.seed} does not fit in u64")
    flag = 0 if vocab.idf is None else 1
    parts = [b"MMVC", struct.pack("<IIQI", FORMAT_VERSION, vocab.size, vocab.seed, flag)]
    parts.extend(w.bits for w in vocab.words)
    if vocab.idf is not None:
        parts.append(_f32(vocab.idf))
    _write(path, b"".join(parts))


def read_vocab(path) -> Vocabulary:
    r = _read(path)
    r.header(b"MMVC")
    size, seed, flag = r.u32(), r.u64(), r.u32()
    if flag not in (0, 1):
        raise FormatError(path, f"idf flag must be 0 or 1, got {flag}")
    expected = size * DESCRIPTOR_BYTES + (4 * size if flag else 0)
    if expected != len(r.data) - r.pos:
        raise FormatError(path, f"payload is {len(r.data) - r.pos} bytes, expected {expected} for W={size}")
    words = tuple(BinaryDescriptor(r.take(DESCRIPTOR_BYTES)) for _ in range(size))
    idf = tuple(r.f32(size)) if flag else None
    r.done()
    return _revalidate(path, lambda: Vocabulary(words, seed, idf))


# -- landmark index --------------------------------------------------------------


def write_index(path, index) -> None:
    idx = index if isinstance(index, LandmarkIndex) else LandmarkIndex(index)
    entries = idx.entries
    if not entries:
        raise ValidationError("index", "refusing to write an empty index")
    cfg = idx.spm_config
    g_dim, h_dim = len(entries[0].g.vector), len(entries[0].h.vector)
    parts = [b"MMVI", struct.pack("<IIIIII", FORMAT_VERSION, len(entries), g_dim, h_dim, cfg.levels, cfg.num_classes)]
    for e in entries:
        parts.append(struct.pack("<QII", e.id, len(e.g.vector), len(e.h.vector)))
        parts.append(_f32(e.g.values))
        parts.append(_f32(e.h.values))
    _write(path, b"".join(parts))


def read_index(path) -> LandmarkIndex:
    r = _read(path)
    r.header(b"MMVI")
    n, g_dim, h_dim, levels, k = (r.u32() for _ in range(5))
    cfg = _revalidate(path, lambda: SpmConfig(levels, k))
    if h_dim != cfg.code_length:
        raise FormatError(path, f"h-dim {h_dim} does not match SPM L={levels}, K={k} ({cfg.code_length})")
    entries = []
    for i in range(n):
        lid, gl, hl = struct.unpack("<QII", r.take(16))
        if gl != g_dim or hl != h_dim:
            raise FormatError(path, f"record {i} (id {lid}): dims ({gl}, {hl}) disagree with header ({g_dim}, {h_dim})")
        g, h = r.f32(gl), r.f32(hl)
        entries.append(_revalidate(
            path, lambda: LandmarkEntry(lid, BowCode(FeatureVector(g)), SpmCode(FeatureVector(h), cfg))
        ))
    r.done()
    return _revalidate(path, lambda: LandmarkIndex(entries, cfg))


# -- dataset layout --------------------------------------------------------------


@dataclass(frozen=True)
class LandmarkRecord:
    id: int
    static: str
    dynamic: str
    labels: str
    probs: str
    mask: Optional[str] = None


@dataclass(frozen=True)
class DatasetManifest:
    version: int
    num_classes: int
    class_names: Tuple[str, ...]
    landmarks: Tuple[LandmarkRecord, ...]
    extra: Optional[Dict] = None

    def to_json(self) -> str:
        doc = {
            "version": self.version,
            "num_classes": self.num_classes,
            "class_names": list(self.class_names),
            "landmarks": [
                {k: v for k, v in vars(rec).items() if v is not None} for rec in self.landmarks
            ],
        }
        if self.extra:
            doc["extra"] = self.extra
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def landmark_dirname(landmark_id: int) -> str:
    return f"lm_{landmark_id:06d}"


def write_dataset(root, samples, num_classes: int, class_names: Sequence[str], extra: Optional[Dict] = None) -> DatasetManifest:
    """Write samples as ``root/manifest.json`` plus one directory per landmark."""
    root = Path(root)
    records = []
    for s in samples:
        d = landmark_dirname(s.id)
        rec = LandmarkRecord(
            id=s.id,
            static=f"{d}/static.pgm",
            dynamic=f"{d}/dynamic.pgm",
            labels=f"{d}/labels.pgm",
            probs=f"{d}/probs.mmpm",
            mask=f"{d}/mask.pgm",
        )
        write_image(root / rec.static, s.static_image)
        write_image(root / rec.dynamic, s.dynamic_image)
        write_label_map(root / rec.labels, s.static_semantics)
        write_prob_map(root / rec.probs, ProbabilityMap.one_hot(s.static_semantics))
        write_mask(root / rec.mask, s.dynamic_mask)
        records.append(rec)
    manifest = DatasetManifest(MANIFEST_VERSION, num_classes, tuple(class_names), tuple(records), extra)
    _write(root / MANIFEST_NAME, manifest.to_json().encode())
    return manifest


def read_manifest(root) -> DatasetManifest:
    """Parse and check ``manifest.json``; referenced files must exist."""
    root = Path(root)
    path = root / MANIFEST_NAME
    try:
        doc = json.loads(path.read_text())
    except FileNotFoundError:
        raise FormatError(path, "manifest not found") from None
    except json.JSONDecodeError as e:
        raise FormatError(path, f"invalid JSON: {e}") from None
    try:
        version = int(doc["version"])
        k = int(doc["num_classes"])
        names = tuple(doc["class_names"])
        raw = doc["landmarks"]
    except (KeyError, TypeError, ValueError) as e:
        raise FormatError(path, f"missing or malformed field: {e}") from None
    if version != MANIFEST_VERSION:
        raise FormatError(path, f"unsupported manifest version {version}")
    if len(names) != k:
        raise FormatError(path, f"{len(names)} class names for K={k}")
    records = []
    seen = set()
    for i, item in enumerate(raw):
        try:
            rec = LandmarkRecord(**item)
        except TypeError as e:
            raise FormatError(path, f"landmark record {i}: {e}") from None
        if rec.id in seen:
            raise FormatError(path, f"duplicate landmark id {rec.id}")
        seen.add(rec.id)
        for name in ("static", "dynamic", "labels", "probs", "mask"):
            rel = getattr(rec, name)
            if rel is not None and not (root / rel).is_file():
                raise FormatError(path, f"landmark {rec.id}: missing {name} file {rel}")
        records.append(rec)
    return DatasetManifest(version, k, names, tuple(records), doc.get("extra"))


def load_samples(root, manifest: Optional[DatasetManifest] = None):
    """Rebuild :class:`~mmvpr.synth.LandmarkSample` objects from a dataset."""
    from .synth import LandmarkSample

    root = Path(root)
    manifest = manifest or read_manifest(root)
    out = []
    for rec in manifest.landmarks:
        labels = read_label_map(root / rec.labels, manifest.num_classes)
        static = read_image(root / rec.static)
        dynamic = read_image(root / rec.dynamic)
        for name, img in (("static", static), ("dynamic", dynamic)):
            if (img.height, img.width) != labels.shape:
                raise FormatError(root / getattr(rec, name), f"size {img.height}x{img.width} != label map {labels.shape}")
        mask = read_mask(root / rec.mask) if rec.mask else np.zeros(labels.shape, dtype=bool)
        out.append(LandmarkSample(rec.id, static, dynamic, labels, mask))
    return out
