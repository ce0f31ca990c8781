"""Shared builders and independent reference implementations for the tests."""

import math

import numpy as np

from mmvpr.bow import BowCode
from mmvpr.core import FeatureVector
from mmvpr.retrieval import LandmarkEntry
from mmvpr.spm import SpmCode, SpmConfig


# (criterion, title, passed, detail); filled by test_acceptance.py and printed
# by the terminal-summary hook in conftest.py.
ACCEPTANCE_RESULTS = []


def bow(values):
    v = np.asarray(values, dtype=np.float64)
    n = np.linalg.norm(v)
    return BowCode(FeatureVector(v / n if n else v))


def spm(values, cfg):
    return SpmCode(FeatureVector(np.asarray(values, dtype=np.float64)), cfg)


def random_codes(rng, g_dim, cfg, p_zero=0.05):
    g = rng.random(g_dim) * (rng.random(g_dim) < 0.3)
    h = rng.integers(0, 20, cfg.code_length) * (rng.random(cfg.code_length) < 0.5).astype(float)
    if rng.random() < p_zero:
        g = np.zeros(g_dim)
    if rng.random() < p_zero:
        h = np.zeros(cfg.code_length)
    return bow(g), spm(h, cfg)


def random_index(rng, n, g_dim=None, cfg=None, duplicates=3):
    """n entries with shuffled ids; a few exact duplicates provoke score ties."""
    g_dim = g_dim or int(rng.integers(4, 60))
    cfg = cfg or SpmConfig(int(rng.integers(0, 3)), int(rng.integers(2, 6)))
    ids = rng.choice(10 * n, n, replace=False)
    codes = [random_codes(rng, g_dim, cfg) for _ in range(n)]
    for _ in range(duplicates):
        i, j = rng.integers(0, n, 2)
        codes[j] = codes[i]
    return [LandmarkEntry(int(i), g, h) for i, (g, h) in zip(ids, codes)], g_dim, cfg


def brute_seg(gt, pred, k):
    """Loop-based reference for PA/MPA/MIoU/FWIoU (classes absent from both maps skipped)."""
    n = len(gt)
    correct = sum(1 for a, b in zip(gt, pred) if a == b)
    accs, ious, fw = [], [], 0.0
    for c in range(k):
        tp = sum(1 for a, b in zip(gt, pred) if a == c and b == c)
        in_gt = sum(1 for a in gt if a == c)
        in_pred = sum(1 for b in pred if b == c)
        if in_gt:
            accs.append(tp / in_gt)
        union = in_gt + in_pred - tp
        if union:
            ious.append(tp / union)
            fw += (in_gt / n) * (tp / union)
    return correct / n, sum(accs) / len(accs), sum(ious) / len(ious), fw


C1, C2 = 0.01 ** 2, 0.03 ** 2


def brute_ssim(a, b, win=8):
    """Explicit window loop with population statistics."""
    a = a.astype(np.float64) / 255.0
    b = b.astype(np.float64) / 255.0
    win = min(win, a.shape[0], a.shape[1])
    vals = []
    for y in range(a.shape[0] - win + 1):
        for x in range(a.shape[1] - win + 1):
            pa = a[y:y + win, x:x + win].ravel()
            pb = b[y:y + win, x:x + win].ravel()
            ma, mb = pa.mean(), pb.mean()
            va = ((pa - ma) ** 2).mean()
            vb = ((pb - mb) ** 2).mean()
            cov = ((pa - ma) * (pb - mb)).mean()
            vals.append((2 * ma * mb + C1) * (2 * cov + C2) / ((ma ** 2 + mb ** 2 + C1) * (va + vb + C2)))
    return sum(vals) / len(vals)


def brute_psnr(a, b):
    total = 0.0
    for u, v in zip(a.ravel().tolist(), b.ravel().tolist()):
        total += ((u - v) / 255.0) ** 2
    mse = total / a.size
    return 100.0 if mse < 1e-10 else min(100.0, 10 * math.log10(1 / mse))


def ref_cosine(u, v):
    nu = math.sqrt(sum(x * x for x in u))
    nv = math.sqrt(sum(x * x for x in v))
    if nu == 0 and nv == 0:
        return 1.0
    if nu == 0 or nv == 0:
        return 0.0
    return sum(a * b for a, b in zip(u, v)) / (nu * nv)


def ref_ranking(entries, q, alpha):
    scored = []
    for e in entries:
        s = alpha * ref_cosine(q[0].values.tolist(), e.g.values.tolist()) + (1 - alpha) * ref_cosine(
            q[1].values.tolist(), e.h.values.tolist()
        )
        scored.append((-round(s, 12), e.id, s))
    scored.sort()
    return [i for _, i, _ in scored], [s for _, _, s in scored]


# -- fuzzed values for the file-format round trips ------------------------------


def f32(a):
    """Values representable in float32, so storage loses nothing."""
    return np.asarray(a, dtype=np.float32).astype(np.float64)


def fuzz_label_map(rng):
    from mmvpr.core import SemanticMap

    k = int(rng.integers(2, 257))
    h, w = rng.integers(1, 20, 2)
    return SemanticMap(rng.integers(0, k, (h, w)), k)


def fuzz_image(rng):
    from mmvpr.core import ImageBuffer

    h, w = rng.integers(1, 20, 2)
    c = int(rng.choice([1, 3]))
    return ImageBuffer(rng.integers(0, 256, (h, w, c), dtype=np.uint8))


def fuzz_prob_map(rng):
    from mmvpr.core import ProbabilityMap

    h, w = rng.integers(1, 10, 2)
    k = int(rng.integers(2, 9))
    p = f32(rng.dirichlet(np.full(k, 0.5), size=(h, w)))
    return ProbabilityMap(p)


def fuzz_code(rng):
    from mmvpr.core import FeatureVector

    n = int(rng.integers(0, 50))
    return FeatureVector(f32(rng.normal(0, 10 ** rng.uniform(-3, 6), n)))


def fuzz_vocab(rng):
    from mmvpr.bow import BinaryDescriptor, Vocabulary

    size = int(rng.integers(1, 30))
    raw = np.unique(rng.integers(0, 256, (size, 32), dtype=np.uint8), axis=0)
    words = tuple(BinaryDescriptor(r.tobytes()) for r in raw[rng.permutation(len(raw))])
    idf = tuple(f32(rng.uniform(0, 8, len(words)))) if rng.random() < 0.5 else None
    return Vocabulary(words, int(rng.integers(0, 2 ** 63)), idf)


def fuzz_index(rng):
    from mmvpr.retrieval import LandmarkIndex

    entries, _, cfg = random_index(rng, int(rng.integers(1, 12)), duplicates=1)
    rebuilt = [
        LandmarkEntry(e.id, BowCode(FeatureVector(f32(e.g.values))), spm(f32(e.h.values), cfg)) for e in entries
    ]
    return LandmarkIndex(rebuilt, cfg)


# -- CLI pipeline driver -------------------------------------------------------------


def run_cli(argv):
    """Run the CLI in-process; returns (exit code, stdout, stderr)."""
    import contextlib
    import io as _io

    from mmvpr.cli import main

    out, err = _io.StringIO(), _io.StringIO()
    with contextlib.redirect_stdout(out), contextlib.redirect_stderr(err):
        try:
            code = main([str(a) for a in argv])
        except SystemExit as e:
            code = e.code
    return code, out.getvalue(), err.getvalue()


def cli_pipeline(root, landmarks=8, size=96, words=40):
    """synth -> build-vocab -> index -> query / eval-recall / eval-seg / eval-img / bench-coding.

    Returns the stdout of every step keyed by command name.
    """
    d = root / "data"
    noise = ["--flip-p", "0.05", "--sigma", "12", "--blur", "--image-role", "dynamic"]
    steps = {
        "synth": ["synth", "--out", d, "--landmarks", landmarks, "--height", size, "--width", size, "--seed", 3,
                  "--csv", root / "synth.csv"],
        "build-vocab": ["build-vocab", "--dataset", d, "--out", root / "v.mmvc", "--size", words, "--seed", 4,
                        "--idf", "--csv", root / "vocab.csv"],
        "index": ["index", "--dataset", d, "--vocab", root / "v.mmvc", "--out", root / "i.mmvi", "-L", 2,
                  "--csv", root / "index.csv"],
        "query": ["query", "--index", root / "i.mmvi", "--vocab", root / "v.mmvc",
                  "--image", d / "lm_000002" / "static.pgm", "--labels", d / "lm_000002" / "labels.pgm",
                  "--k", 5, "--csv", root / "query.csv"],
        "eval-recall": ["eval-recall", "--index", root / "i.mmvi", "--vocab", root / "v.mmvc", "--dataset", d,
                        "--source", "degraded", *noise, "--seed", 7, "--csv", root / "recall.csv",
                        "--curve", root / "curve.csv"],
        "eval-seg": ["eval-seg", "--gt", d / "lm_000000" / "labels.pgm", d / "lm_000001" / "labels.pgm",
                     "--pred", d / "lm_000001" / "labels.pgm", d / "lm_000001" / "labels.pgm",
                     "--csv", root / "seg.csv"],
        "eval-img": ["eval-img", "--ref", d / "lm_000000" / "static.pgm", "--cand", d / "lm_000000" / "dynamic.pgm",
                     "--csv", root / "img.csv"],
        "bench-coding": ["bench-coding", "--dataset", d, "--vocab", root / "v.mmvc", "--levels", "0,2",
                         "--repetitions", 2, *noise, "--seed", 7, "--csv", root / "bench.csv"],
    }
    outputs = {}
    for name, argv in steps.items():
        code, out, err = run_cli(argv)
        if code != 0:
            raise AssertionError(f"{name} failed ({code}): {err}")
        outputs[name] = out
    return outputs


def drop_column(text, name):
    """Remove a column from a CSV or whitespace table (used for wall-clock timings)."""
    import csv
    import io as _io

    rows = list(csv.reader(_io.StringIO(text)))
    if not rows or name not in rows[0]:
        return text
    i = rows[0].index(name)
    return "\n".join(",".join(r[:i] + r[i + 1:]) for r in rows)


def tree_digest(root, skip_columns=("coding_ms",)):
    """{relative path: bytes} for every file under root, timings stripped from CSVs."""
    out = {}
    for p in sorted(root.rglob("*")):
        if p.is_file():
            data = p.read_bytes()
            if p.suffix == ".csv":
                text = data.decode()
                for c in skip_columns:
                    text = drop_column(text, c)
                data = text.encode()
            out[str(p.relative_to(root))] = data
    return out


def _formats():
    from mmvpr import io

    return {
        "label_map": (fuzz_label_map, io.write_label_map, lambda p, v: io.read_label_map(p, v.num_classes)),
        "image": (fuzz_image, io.write_image, lambda p, v: io.read_image(p)),
        "prob_map": (fuzz_prob_map, io.write_prob_map, lambda p, v: io.read_prob_map(p)),
        "code": (fuzz_code, io.write_code, lambda p, v: io.read_code(p)),
        "vocab": (fuzz_vocab, io.write_vocab, lambda p, v: io.read_vocab(p)),
        "index": (fuzz_index, io.write_index, lambda p, v: io.read_index(p)),
    }


FORMATS = _formats()


def same_index(a, b):
    ea, eb = a.entries, b.entries
    return a.spm_config == b.spm_config and len(ea) == len(eb) and all(
        x.id == y.id and x.g == y.g and x.h == y.h for x, y in zip(ea, eb)
    )


def roundtrip(kind, value, path):
    """write -> read gives an equal value, and re-writing it gives the same bytes."""
    _, write, read = FORMATS[kind]
    write(path, value)
    first = path.read_bytes()
    back = read(path, value)
    write(path, back)
    equal = same_index(value, back) if kind == "index" else back == value
    return equal and path.read_bytes() == first


def roundtrip_cases(root, n, seed=808):
    """{kind: (passed, total)} over n fuzzed values per format."""
    root.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    out = {}
    for kind in FORMATS:
        good = sum(roundtrip(kind, FORMATS[kind][0](rng), root / f"{kind}_{i}") for i in range(n))
        out[kind] = (good, n)
    return out
