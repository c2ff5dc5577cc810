"""Command-line pipeline: encode, synth, corrupt, localize, eval, sweep,
gradcheck, viz.

Exit codes: 0 success, 1 usage error, 2 data error. All outputs are
deterministic given the same inputs and seeds; the optional --time flag
prints stage durations to stderr so the data streams stay clean.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .fields import FieldError, PointSet, decode_angle, encode_direction_field
from .fileio import (FormatError, detections_to_rows, export_pgm,
                     read_direction_field, read_field, read_points_csv,
                     rows_to_detections, write_field, write_points_csv)
from .localizer import (DEFAULT_KERNEL_SIZES, LocalizerConfig, LocalizerError,
                        ScoreMap, find_peaks, handcrafted_response)
from .losses import LOSS_KINDS, finite_difference_check
from .metrics import DEFAULT_TAUS, MetricsError, evaluate_detections, threshold_sweep
from .synth import (SynthConfig, SynthError, apply_occlusion_mask,
                    generate_scene, occlusion_noise_mask)
from .rng import derive

DataError = (FieldError, FormatError, LocalizerError, MetricsError,
              SynthError, OSError, ValueError)

GRADCHECK_TOLERANCE = 1e-4
_SCENE_SEED_LABEL = 1000


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def worker_count() -> int:
    """Internal parallelism cap: min(cpu, CEDIR_THREADS if set)."""
    n = os.cpu_count() or 1
    env = os.environ.get("CEDIR_THREADS")
    if env:
        try:
            n = min(n, max(1, int(env)))
        except ValueError:
            pass
    return n


class _Timer:
    def __init__(self, enabled: bool):
        self.enabled = enabled
        self._t0 = time.perf_counter()

    def stage(self, name: str):
        if self.enabled:
            t1 = time.perf_counter()
            print(f"[time] {name}: {t1 - self._t0:.3f}s", file=sys.stderr)
            self._t0 = t1


def _parse_size(text: str) -> tuple[int, int]:
    if "x" in text:
        h, w = text.split("x", 1)
        return int(h), int(w)
    return int(text), int(text)


def _parse_taus(text: str) -> list[float]:
    return [float(t) for t in text.split(",") if t]


def _single_image_points(path, image_id):
    groups = read_points_csv(path)
    if image_id is not None:
        if image_id not in groups:
            raise FormatError(f"image id {image_id!r} not found in {path}")
        return groups[image_id]
    if len(groups) != 1:
        raise FormatError(
            f"{path} holds {len(groups)} images; pick one with --image-id")
    return next(iter(groups.values()))


def _cmd_encode(args) -> int:
    timer = _Timer(args.time)
    pts = _single_image_points(args.points, args.image_id)
    points = PointSet(args.height, args.width, pts[:, :2])
    timer.stage("load")
    fld = encode_direction_field(points)
    timer.stage("encode")
    write_field(args.out, fld)
    timer.stage("write")
    return 0


def _cmd_synth(args) -> int:
    timer = _Timer(args.time)
    h, w = _parse_size(args.size)
    config = SynthConfig(height=h, width=w, cluster_prob=args.cluster_prob)
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)

    def emit(i: int) -> str:
        scene = generate_scene(config, derive(args.seed, _SCENE_SEED_LABEL, i))
        stem = f"scene_{i:04d}"
        write_field(outdir / f"{stem}_clean.cdf1", scene.clean_field)
        write_field(outdir / f"{stem}_corrupt.cdf1", scene.corrupted_field)
        write_field(outdir / f"{stem}_target.cdf1", scene.target)
        write_points_csv(outdir / f"{stem}_points.csv", {stem: scene.points.points})
        return stem

    workers = min(worker_count(), max(1, args.count))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(emit, range(args.count)))
    else:
        for i in range(args.count):
            emit(i)
    timer.stage(f"generate {args.count} scenes")
    return 0


def _cmd_corrupt(args) -> int:
    timer = _Timer(args.time)
    fld = read_direction_field(args.infile)
    mask = occlusion_noise_mask(fld.height, fld.width, args.occlusion_frac, args.seed)
    write_field(args.out, apply_occlusion_mask(fld, mask))
    timer.stage("corrupt")
    return 0


def _cmd_localize(args) -> int:
    timer = _Timer(args.time)
    obj = read_field(args.infile)
    config = LocalizerConfig(kernel_sizes=tuple(int(k) for k in args.kernel_sizes.split(",")),
                             nms_radius=args.nms_radius,
                             score_threshold=args.threshold)
    if args.method == "handcrafted":
        if isinstance(obj, ScoreMap):
            raise FormatError("handcrafted localization needs a 2-channel field")
        score = handcrafted_response(obj, config)
    else:  # scoremap: peaks of an externally produced map
        if not isinstance(obj, ScoreMap):
            raise FormatError("--method scoremap needs a 1-channel map")
        score = obj
    timer.stage("response")
    dets = find_peaks(score, config.score_threshold, config.nms_radius)
    timer.stage("peaks")
    image_id = args.image_id or Path(args.infile).stem
    write_points_csv(args.out, {image_id: detections_to_rows(dets)})
    timer.stage("write")
    return 0


def _load_eval_inputs(pred_path, gt_path):
    preds = {img: rows_to_detections(rows)
             for img, rows in read_points_csv(pred_path).items()}
    gts = {img: rows[:, :2] for img, rows in read_points_csv(gt_path).items()}
    return preds, gts


def _emit_json(payload: dict, out_path) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True)
    if out_path:
        Path(out_path).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)


def _cmd_eval(args) -> int:
    timer = _Timer(args.time)
    preds, gts = _load_eval_inputs(args.pred, args.gt)
    report = evaluate_detections(preds, gts, taus=_parse_taus(args.tau))
    timer.stage("eval")
    _emit_json(report.to_dict(), args.out)
    return 0


def _cmd_sweep(args) -> int:
    timer = _Timer(args.time)
    preds, gts = _load_eval_inputs(args.pred, args.gt)
    taus = _parse_taus(args.tau)
    best_threshold, best_f1 = threshold_sweep(preds, gts, taus[0])
    kept = {img: [d for d in dets if d.score >= best_threshold]
            for img, dets in preds.items()}
    report = evaluate_detections(kept, gts, taus=taus)
    timer.stage("sweep")
    payload = report.to_dict()
    payload["best_threshold"] = best_threshold
    payload["best_f1"] = best_f1
    _emit_json(payload, args.out)
    return 0


def _cmd_gradcheck(args) -> int:
    timer = _Timer(args.time)
    failed = False
    for kind in LOSS_KINDS:
        worst = max(finite_difference_check(kind, seed=derive(args.seed, i), step=args.step)
                    for i in range(args.instances))
        status = "ok" if worst < GRADCHECK_TOLERANCE else "FAIL"
        print(f"{kind}: max relative error {worst:.3e} [{status}]")
        failed = failed or worst >= GRADCHECK_TOLERANCE
    timer.stage("gradcheck")
    return 2 if failed else 0


def _cmd_viz(args) -> int:
    timer = _Timer(args.time)
    obj = read_field(args.infile)
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    if isinstance(obj, ScoreMap):
        export_pgm(obj.values, outdir / "plane.pgm")
    else:
        export_pgm(obj.sin_plane, outdir / "sin.pgm")
        export_pgm(obj.cos_plane, outdir / "cos.pgm")
        export_pgm(decode_angle(obj), outdir / "angle.pgm")
        export_pgm(handcrafted_response(obj).values, outdir / "response.pgm")
    timer.stage("viz")
    return 0


def _build_parser() -> _Parser:
    parser = _Parser(prog="cedir", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_text):
        p = sub.add_parser(name, help=help_text)
        p.set_defaults(func=func)
        p.add_argument("--time", action="store_true",
                       help="print stage wall-clock durations to stderr")
        return p

    p = add("encode", _cmd_encode, "points CSV -> direction field (CDF1)")
    p.add_argument("--points", required=True)
    p.add_argument("--height", type=int, required=True)
    p.add_argument("--width", type=int, required=True)
    p.add_argument("--image-id", default=None)
    p.add_argument("--out", required=True)

    p = add("synth", _cmd_synth, "generate numbered synthetic scenes")
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--outdir", required=True)
    p.add_argument("--size", default="512", help="HxW or a single square size")
    p.add_argument("--cluster-prob", type=float, default=SynthConfig.cluster_prob,
                   help="per-point probability of adding a near-collision cluster")

    p = add("corrupt", _cmd_corrupt, "zero a blob-noise occlusion mask into a field")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--occlusion-frac", type=float, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)

    p = add("localize", _cmd_localize, "field or score map -> detections CSV")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--method", choices=("handcrafted", "scoremap"), default="handcrafted")
    p.add_argument("--threshold", type=float, default=0.5)
    p.add_argument("--nms-radius", type=int, default=2)
    p.add_argument("--kernel-sizes", default=",".join(str(k) for k in DEFAULT_KERNEL_SIZES))
    p.add_argument("--image-id", default=None)
    p.add_argument("--out", required=True)

    p = add("eval", _cmd_eval, "detections vs ground truth -> JSON report")
    p.add_argument("--pred", required=True)
    p.add_argument("--gt", required=True)
    p.add_argument("--tau", default=",".join(str(int(t)) for t in DEFAULT_TAUS))
    p.add_argument("--out", default=None)

    p = add("sweep", _cmd_sweep, "pick the best score threshold on validation data")
    p.add_argument("--pred", required=True)
    p.add_argument("--gt", required=True)
    p.add_argument("--tau", default="5")
    p.add_argument("--out", default=None)

    p = add("gradcheck", _cmd_gradcheck, "finite-difference check of all loss gradients")
    p.add_argument("--instances", type=int, default=50)
    p.add_argument("--step", type=float, default=1e-5)
    p.add_argument("--seed", type=int, default=0)

    p = add("viz", _cmd_viz, "export channel/angle/response PGM images")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--outdir", required=True)
    return parser


def cli_dispatch(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return 1
    try:
        return args.func(args)
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(cli_dispatch())
