"""Command-line front end.

Every command prints its resolved configuration as one ``config {...}`` JSON
line, then a human-readable table; tables are also written as CSV when
``--csv`` is given. Failures print one JSON line on stderr and exit 1.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path
from typing import Dict, List, Sequence

import numpy as np

from . import io as mio
from .bow import (
    DEFAULT_MAX_ITERS,
    DEFAULT_MAX_KP,
    DEFAULT_THRESHOLD,
    DEFAULT_VOCAB_SIZE,
    build_vocab,
    compute_idf,
)
from .core import ValidationError, argmax_map
from .image_metrics import img_scores
from .pipeline import Coder, Perception, bench_coding, build_index, query_codes, recall_row, training_descriptors
from .retrieval import FusionConfig, eval_recall
from .semantics_metrics import confusion, seg_scores
from .spm import SpmConfig
from .synth import NoiseSpec, WorldSpec, generate_world


# -- output helpers --------------------------------------------------------------


def _fmt(v) -> str:
    if isinstance(v, float):
        return "nan" if np.isnan(v) else f"{v:.6f}"
    return str(v)


def _csv_cell(v) -> str:
    # full precision: CSV feeds plots and offline checks
    return repr(float(v)) if isinstance(v, float) else str(v)


def emit_table(columns: Sequence[str], rows: List[Dict], csv_path=None, out=None) -> None:
    out = out or sys.stdout
    cells = [[_fmt(r[c]) for c in columns] for r in rows]
    widths = [max(len(c), *(len(row[i]) for row in cells)) if cells else len(c) for i, c in enumerate(columns)]
    out.write("  ".join(c.ljust(w) for c, w in zip(columns, widths)).rstrip() + "\n")
    for row in cells:
        out.write("  ".join(v.ljust(w) for v, w in zip(row, widths)).rstrip() + "\n")
    if csv_path:
        write_csv(csv_path, columns, rows)


def write_csv(path, columns: Sequence[str], rows: List[Dict]) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([_csv_cell(r[c]) for c in columns])


def print_config(args: argparse.Namespace) -> None:
    cfg = {k: v for k, v in vars(args).items() if k != "func"}
    print("config " + json.dumps(cfg, sort_keys=True, default=str))


def _int_list(text: str) -> List[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


# -- shared flag groups ----------------------------------------------------------


def _add_noise_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("perception noise (degraded source)")
    g.add_argument("--flip-p", type=float, default=0.0, help="label flip probability")
    g.add_argument("--temperature", type=float, default=0.0, help="uniform mixture weight in the probability map")
    g.add_argument("--sigma", type=float, default=0.0, help="Gaussian image noise, intensity units")
    g.add_argument("--blur", action="store_true", help="box-blur the dynamic-object regions")
    g.add_argument("--image-role", choices=("static", "dynamic"), default="static",
                   help="which image of each sample is coded")


def _add_coding_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--max-kp", type=int, default=DEFAULT_MAX_KP)
    p.add_argument("--threshold", type=int, default=DEFAULT_THRESHOLD)
    p.add_argument("--idf", action="store_true", help="weight words by the vocabulary's idf")


def _perception(args, source: str) -> Perception:
    noise = NoiseSpec(args.flip_p, args.temperature, args.sigma, args.blur)
    return Perception(source, noise, args.image_role, args.seed)


# -- commands --------------------------------------------------------------------


def cmd_synth(args) -> None:
    spec = WorldSpec(
        seed=args.seed,
        height=args.height,
        width=args.width,
        num_classes=args.num_classes,
        num_landmarks=args.landmarks,
        dynamic_objects=(args.dyn_min, args.dyn_max),
        shadow=not args.no_shadow,
    )
    samples = generate_world(spec)
    extra = {"world": {"seed": spec.seed, "height": spec.height, "width": spec.width,
                       "num_landmarks": spec.num_landmarks, "dynamic_objects": list(spec.dynamic_objects),
                       "shadow": spec.shadow}}
    mio.write_dataset(args.out, samples, spec.num_classes, spec.class_names, extra)
    emit_table(["landmarks", "height", "width", "classes", "out"],
               [{"landmarks": len(samples), "height": spec.height, "width": spec.width,
                 "classes": spec.num_classes, "out": str(args.out)}], args.csv)


def cmd_build_vocab(args) -> None:
    samples = mio.load_samples(args.dataset)
    if args.image_role_vocab == "degraded":
        perception = _perception(args, "degraded")
    else:
        perception = Perception("ground_truth", image_role=args.image_role_vocab, seed=args.seed)
    per_image = training_descriptors(samples, perception, args.max_kp, args.threshold)
    bits = np.concatenate(per_image) if per_image else np.zeros((0, 256), np.uint8)
    vocab = build_vocab(bits, args.size, args.seed, args.max_iters)
    if args.idf:
        vocab = compute_idf(vocab, per_image)
    mio.write_vocab(args.out, vocab)
    emit_table(["words", "descriptors", "images", "idf", "out"],
               [{"words": vocab.size, "descriptors": len(bits), "images": len(per_image),
                 "idf": int(args.idf), "out": str(args.out)}], args.csv)


def cmd_index(args) -> None:
    manifest = mio.read_manifest(args.dataset)
    samples = mio.load_samples(args.dataset, manifest)
    vocab = mio.read_vocab(args.vocab)
    coder = Coder(vocab, SpmConfig(args.levels, manifest.num_classes), args.idf, args.max_kp, args.threshold)
    index = build_index(samples, coder, _perception(args, args.source))
    mio.write_index(args.out, index)
    emit_table(["landmarks", "g_dim", "h_dim", "levels", "source", "out"],
               [{"landmarks": len(index), "g_dim": index.g_dim, "h_dim": index.h_dim,
                 "levels": args.levels, "source": args.source, "out": str(args.out)}], args.csv)


def cmd_query(args) -> None:
    index = mio.read_index(args.index)
    vocab = mio.read_vocab(args.vocab)
    cfg = index.spm_config
    image = mio.read_image(args.image)
    if args.labels:
        semantics = mio.read_label_map(args.labels, cfg.num_classes)
    else:
        semantics = argmax_map(mio.read_prob_map(args.probs))
    coder = Coder(vocab, cfg, args.idf, args.max_kp, args.threshold)
    hits = index.query(coder.encode(semantics, image), args.k, FusionConfig(args.alpha))
    rows = [{"rank": i + 1, "id": lid, "score": float(s)} for i, (lid, s) in enumerate(hits)]
    emit_table(["rank", "id", "score"], rows, args.csv)


def cmd_eval_recall(args) -> None:
    manifest = mio.read_manifest(args.dataset)
    samples = mio.load_samples(args.dataset, manifest)
    index = mio.read_index(args.index)
    vocab = mio.read_vocab(args.vocab)
    coder = Coder(vocab, index.spm_config, args.idf, args.max_kp, args.threshold)
    queries = query_codes(samples, coder, _perception(args, args.source))
    report = eval_recall(index, queries, FusionConfig(args.alpha), args.cutoffs)
    row = {"queries": report.num_queries, "landmarks": len(index), "alpha": args.alpha}
    row.update(recall_row(report, args.cutoffs))
    row["1%_cutoff"] = report.pct_cutoff
    emit_table(list(row), [row], args.csv)
    if args.curve:
        write_csv(args.curve, ["k", "recall"],
                  [{"k": i + 1, "recall": r} for i, r in enumerate(report.curve)])


def _paired(a: Sequence[str], b: Sequence[str], what: str):
    if len(a) != len(b):
        raise ValueError(f"{what}: {len(a)} reference files but {len(b)} candidate files")
    return list(zip(a, b))


def cmd_eval_seg(args) -> None:
    total = None
    for gt_path, pred_path in _paired(args.gt, args.pred, "eval-seg"):
        gt = mio.read_label_map(gt_path, args.num_classes)
        pred = mio.read_label_map(pred_path, args.num_classes)
        cm = confusion(gt, pred)
        total = cm if total is None else total + cm
    scores = seg_scores(total)
    names = args.class_names.split(",") if args.class_names else [f"class{i}" for i in range(args.num_classes)]
    if len(names) != args.num_classes:
        raise ValueError(f"{len(names)} class names for K={args.num_classes}")
    row = {"pairs": len(args.gt), "PA": scores.pa, "MPA": scores.mpa, "MIoU": scores.miou, "FWIoU": scores.fwiou}
    for name, iou in zip(names, scores.per_class_iou):
        row[f"IoU_{name}"] = iou
    emit_table(list(row), [row], args.csv)


def cmd_eval_img(args) -> None:
    per_pair = []
    for ref_path, cand_path in _paired(args.ref, args.cand, "eval-img"):
        per_pair.append(img_scores(mio.read_image(ref_path), mio.read_image(cand_path)))
    row = {
        "pairs": len(per_pair),
        "L1%": float(np.mean([s.l1_pct for s in per_pair])),
        "L2%": float(np.mean([s.l2_pct for s in per_pair])),
        "PSNR": float(np.mean([s.psnr for s in per_pair])),
        "SSIM": float(np.mean([s.ssim for s in per_pair])),
    }
    emit_table(list(row), [row], args.csv)


def cmd_bench_coding(args) -> None:
    samples = mio.load_samples(args.dataset)
    vocab = mio.read_vocab(args.vocab)
    rows = bench_coding(samples, vocab, args.levels, _perception(args, args.source),
                        args.repetitions, args.alpha, args.idf, args.cutoffs)
    table = []
    for r in rows:
        row = {"L": r.levels}
        row.update(recall_row(r.recall, args.cutoffs))
        row["coding_ms"] = r.coding_ms
        table.append(row)
    emit_table(list(table[0]), table, args.csv)


# -- parser ----------------------------------------------------------------------


def _fail(err: Dict) -> None:
    sys.stderr.write(json.dumps(err, sort_keys=True) + "\n")


class _Parser(argparse.ArgumentParser):
    """Usage errors become the same one-line JSON as runtime failures."""

    def error(self, message):
        _fail({"error": "UsageError", "message": f"{self.prog}: {message}"})
        self.exit(2)


def validate(args) -> None:
    """Check every parameter against its module's preconditions up front."""
    if hasattr(args, "alpha"):
        FusionConfig(args.alpha)
    if hasattr(args, "flip_p"):
        NoiseSpec(args.flip_p, args.temperature, args.sigma, args.blur)
    levels = getattr(args, "levels", None)
    for L in [levels] if isinstance(levels, int) else levels or []:
        SpmConfig(L, 2)
    for name in ("k", "size", "repetitions", "max_iters", "landmarks"):
        v = getattr(args, name, None)
        if v is not None and v < 1:
            raise ValidationError(name, f"must be >= 1, got {v}")
    if getattr(args, "max_kp", 1) < 0:
        raise ValidationError("max_kp", f"must be >= 0, got {args.max_kp}")
    if getattr(args, "threshold", 0) < 0:
        raise ValidationError("threshold", f"must be >= 0, got {args.threshold}")
    for c in getattr(args, "cutoffs", None) or []:
        if c < 1:
            raise ValidationError("cutoffs", f"cutoff must be >= 1, got {c}")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mmvpr", description="Multi-modal visual place recognition toolkit.")
    sub = parser.add_subparsers(dest="command", required=True)

    def command(name, func, help_text):
        p = sub.add_parser(name, help=help_text)
        p.set_defaults(func=func)
        p.add_argument("--seed", type=int, default=0, help="seed for every random draw of this command")
        p.add_argument("--csv", help="also write the result table as CSV here")
        return p

    p = command("synth", cmd_synth, "generate a synthetic landmark dataset")
    p.add_argument("--out", required=True)
    p.add_argument("--landmarks", type=int, default=200)
    p.add_argument("--height", type=int, default=128)
    p.add_argument("--width", type=int, default=128)
    p.add_argument("--num-classes", type=int, default=8)
    p.add_argument("--dyn-min", type=int, default=1)
    p.add_argument("--dyn-max", type=int, default=5)
    p.add_argument("--no-shadow", action="store_true")

    p = command("build-vocab", cmd_build_vocab, "learn a visual vocabulary from a dataset")
    p.add_argument("--dataset", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--size", type=int, default=DEFAULT_VOCAB_SIZE)
    p.add_argument("--max-iters", type=int, default=DEFAULT_MAX_ITERS)
    p.add_argument("--role", dest="image_role_vocab", choices=("static", "dynamic", "degraded"), default="static",
                   help="images to learn from; 'degraded' applies the noise flags")
    _add_coding_flags(p)
    _add_noise_flags(p)

    p = command("index", cmd_index, "encode every landmark of a dataset into an index file")
    p.add_argument("--dataset", required=True)
    p.add_argument("--vocab", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--levels", "-L", type=int, default=2)
    p.add_argument("--source", choices=("ground_truth", "degraded"), default="ground_truth")
    _add_coding_flags(p)
    _add_noise_flags(p)

    p = command("query", cmd_query, "rank the landmarks of an index against one query")
    p.add_argument("--index", required=True)
    p.add_argument("--vocab", required=True)
    p.add_argument("--image", required=True)
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--labels", help="query label map (P5)")
    src.add_argument("--probs", help="query probability map (MMPM); labels are its argmax")
    p.add_argument("--alpha", type=float, default=0.5)
    p.add_argument("--k", type=int, default=10)
    _add_coding_flags(p)

    p = command("eval-recall", cmd_eval_recall, "recall@K of a dataset's landmarks against an index")
    p.add_argument("--index", required=True)
    p.add_argument("--vocab", required=True)
    p.add_argument("--dataset", required=True)
    p.add_argument("--source", choices=("ground_truth", "degraded"), default="ground_truth")
    p.add_argument("--alpha", type=float, default=0.5)
    p.add_argument("--cutoffs", type=_int_list, default=[1, 5, 10])
    p.add_argument("--curve", help="write the full recall curve (k, recall) as CSV here")
    _add_coding_flags(p)
    _add_noise_flags(p)

    p = command("eval-seg", cmd_eval_seg, "segmentation scores of predicted label maps")
    p.add_argument("--gt", nargs="+", required=True)
    p.add_argument("--pred", nargs="+", required=True)
    p.add_argument("--num-classes", type=int, default=8)
    p.add_argument("--class-names", help="comma-separated names for the per-class IoU columns")

    p = command("eval-img", cmd_eval_img, "L1%%, L2%%, PSNR and SSIM of candidate images")
    p.add_argument("--ref", nargs="+", required=True)
    p.add_argument("--cand", nargs="+", required=True)

    p = command("bench-coding", cmd_bench_coding, "recall and coding time per pyramid depth")
    p.add_argument("--dataset", required=True)
    p.add_argument("--vocab", required=True)
    p.add_argument("--levels", type=_int_list, default=[0, 2, 4, 6])
    p.add_argument("--repetitions", type=int, default=5)
    p.add_argument("--alpha", type=float, default=0.5)
    p.add_argument("--source", choices=("ground_truth", "degraded"), default="degraded")
    p.add_argument("--cutoffs", type=_int_list, default=[1, 5, 10])
    _add_coding_flags(p)
    _add_noise_flags(p)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    print_config(args)
    try:
        validate(args)
        args.func(args)
    except (ValueError, ArithmeticError, OSError) as e:
        err = {"error": type(e).__name__, "message": str(e)}
        path = getattr(e, "path", None) or getattr(e, "filename", None)
        if path:
            err["path"] = str(path)
        _fail(err)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
