import json
import struct

import numpy as np
import pytest

import helpers
from helpers import FORMATS, roundtrip
from mmvpr import io
from mmvpr.core import ProbabilityMap, SemanticMap
from mmvpr.io import FormatError
from mmvpr.synth import CLASS_NAMES, WorldSpec, generate_world


@pytest.mark.parametrize("kind", sorted(FORMATS))
def test_roundtrip_fuzzed(kind, tmp_path):
    rng = np.random.default_rng(77)
    for i in range(25):
        assert roundtrip(kind, FORMATS[kind][0](rng), tmp_path / f"v{i}")


@pytest.mark.parametrize("kind", sorted(FORMATS))
def test_writers_deterministic(kind, tmp_path):
    v = FORMATS[kind][0](np.random.default_rng(5))
    FORMATS[kind][1](tmp_path / "a", v)
    FORMATS[kind][1](tmp_path / "b", v)
    assert (tmp_path / "a").read_bytes() == (tmp_path / "b").read_bytes()


def test_label_map_payload(tmp_path):
    p = tmp_path / "m.pgm"
    io.write_label_map(p, SemanticMap(np.array([[0, 1], [2, 3]]), 4))
    data = p.read_bytes()
    assert data.startswith(b"P5") and data[-4:] == bytes([0, 1, 2, 3])


def test_label_out_of_range_names_position(tmp_path):
    p = tmp_path / "m.pgm"
    labels = np.zeros((3, 4), dtype=int)
    labels[1, 2] = 6
    io.write_label_map(p, SemanticMap(labels, 8))
    with pytest.raises(FormatError) as e:
        io.read_label_map(p, 5)
    assert "(row 1, col 2)" in str(e.value) and e.value.path == str(p)


@pytest.mark.parametrize(
    "payload",
    [b"P5\n2 2\n15\n\x00\x00\x00\x00", b"P5\n2 2\n255\n\x00\x00", b"P2\n1 1\n255\n0", b"P5\n2"],
)
def test_bad_netpbm(payload, tmp_path):
    p = tmp_path / "x.pgm"
    p.write_bytes(payload)
    with pytest.raises(FormatError):
        io.read_label_map(p, 2)


def test_netpbm_comments_accepted(tmp_path):
    p = tmp_path / "x.pgm"
    p.write_bytes(b"P5\n# made elsewhere\n2 1\n255\n\x00\x01")
    assert io.read_image(p).plane.tolist() == [[0, 1]]


@pytest.mark.parametrize("kind", ["prob_map", "code", "vocab", "index"])
def test_bad_magic_and_version(kind, tmp_path):
    p = tmp_path / "v"
    FORMATS[kind][1](p, FORMATS[kind][0](np.random.default_rng(1)))
    data = p.read_bytes()
    p.write_bytes(b"XXXX" + data[4:])
    with pytest.raises(FormatError, match="magic"):
        FORMATS[kind][2](p, None)
    p.write_bytes(data[:4] + struct.pack("<I", 2) + data[8:])
    with pytest.raises(FormatError, match="version"):
        FORMATS[kind][2](p, None)
    p.write_bytes(data[:-1])
    with pytest.raises(FormatError):
        FORMATS[kind][2](p, None)
    p.write_bytes(data + b"\x00")
    with pytest.raises(FormatError):
        FORMATS[kind][2](p, None)


def test_prob_map_invariants_checked_on_read(tmp_path):
    p = tmp_path / "s.mmpm"
    p.write_bytes(b"MMPM" + struct.pack("<IIII", 1, 1, 1, 2) + np.array([0.7, 0.7], "<f4").tobytes())
    with pytest.raises(FormatError, match="sums"):
        io.read_prob_map(p)


def test_prob_map_layout(tmp_path):
    p = tmp_path / "s.mmpm"
    probs = np.array([[[1.0, 0.0], [0.25, 0.75]]])
    io.write_prob_map(p, ProbabilityMap(probs))
    data = p.read_bytes()
    assert data[:4] == b"MMPM" and struct.unpack("<IIII", data[4:20]) == (1, 1, 2, 2)
    assert np.array_equal(np.frombuffer(data[20:], "<f4"), [1, 0, 0.25, 0.75])


def test_index_record_dim_mismatch(tmp_path):
    p = tmp_path / "i.mmvi"
    idx = helpers.fuzz_index(np.random.default_rng(3))
    io.write_index(p, idx)
    data = bytearray(p.read_bytes())
    # first record's g-len lives right after the 28-byte header and the u64 id
    struct.pack_into("<I", data, 28 + 8, idx.g_dim + 1)
    p.write_bytes(bytes(data))
    with pytest.raises(FormatError, match="disagree"):
        io.read_index(p)


def test_vocab_duplicate_words_rejected(tmp_path):
    p = tmp_path / "v.mmvc"
    w = bytes(32)
    p.write_bytes(b"MMVC" + struct.pack("<IIQI", 1, 2, 0, 0) + w + w)
    with pytest.raises(FormatError, match="distinct"):
        io.read_vocab(p)


def test_dataset_roundtrip(tmp_path):
    spec = WorldSpec(seed=4, num_landmarks=3, height=24, width=32)
    world = generate_world(spec)
    m = io.write_dataset(tmp_path, world, 8, CLASS_NAMES, {"seed": 4})
    again = io.read_manifest(tmp_path)
    assert again == m and again.extra == {"seed": 4}
    for a, b in zip(world, io.load_samples(tmp_path)):
        assert a.id == b.id and a.static_image == b.static_image and a.dynamic_image == b.dynamic_image
        assert a.static_semantics == b.static_semantics and np.array_equal(a.dynamic_mask, b.dynamic_mask)
        assert io.read_prob_map(tmp_path / io.landmark_dirname(a.id) / "probs.mmpm") == a.static_probs


def test_manifest_missing_file(tmp_path):
    io.write_dataset(tmp_path, generate_world(WorldSpec(num_landmarks=2, height=16, width=16)), 8, CLASS_NAMES)
    (tmp_path / "lm_000001" / "dynamic.pgm").unlink()
    with pytest.raises(FormatError, match="missing dynamic"):
        io.read_manifest(tmp_path)


def test_manifest_inconsistent(tmp_path):
    io.write_dataset(tmp_path, generate_world(WorldSpec(num_landmarks=1, height=16, width=16)), 8, CLASS_NAMES)
    doc = json.loads((tmp_path / "manifest.json").read_text())
    doc["class_names"] = doc["class_names"][:3]
    (tmp_path / "manifest.json").write_text(json.dumps(doc))
    with pytest.raises(FormatError):
        io.read_manifest(tmp_path)
    with pytest.raises(FormatError, match="not found"):
        io.read_manifest(tmp_path / "nowhere")
