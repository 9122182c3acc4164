"""Command line entry point: ``stallmon {track,events,eval,synth,curate}``.

Exit status is 0 on success and 2 on invalid input or configuration.
Set ``STALLMON_LOG_LEVEL`` (e.g. ``DEBUG``) to change log verbosity.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import os
import sys
from pathlib import Path

from . import io
from .config import CLASSES, load_config
from .curation import select_informative, stratified_sample, subsample_every_n
from .errors import StallError
from .evaluation import DEFAULT_THRESHOLD, THRESHOLD_SWEEP, evaluate, render_table, sweep
from .events import run_pipeline
from .refine import assign_class
from .sim import NoiseModel, generate, load_script, perturb
from .tracking import track_clip

log = logging.getLogger("stallmon")

# CLI flag -> StallConfig field
_CFG_FLAGS = {
    "confidence_threshold": float, "fps": float, "frame_stride": int, "min_area_ratio": float,
    "entrance_dist_px": float, "edge_margin_px": float, "interp_max_gap": int,
}
_TRACKER_FLAGS = {"iou_gate": float, "max_age": int, "min_hits": int}


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", required=True, help="stall config (YAML or JSON)")
    for name, typ in {**_CFG_FLAGS, **_TRACKER_FLAGS}.items():
        p.add_argument("--" + name.replace("_", "-"), type=typ, default=None)


def _config(args):
    cfg = load_config(args.config)
    overrides = {k: getattr(args, k) for k in _CFG_FLAGS if getattr(args, k) is not None}
    tracker = {k: getattr(args, k) for k in _TRACKER_FLAGS if getattr(args, k) is not None}
    if tracker:
        overrides["tracker"] = dataclasses.replace(cfg.tracker, **tracker)
    return dataclasses.replace(cfg, **overrides) if overrides else cfg


def _read_detections(path, cfg):
    with open(path, encoding="utf-8") as fh:
        return io.parse_detections(fh, cfg.confidence_threshold, cfg.frame)


def cmd_track(args) -> None:
    cfg = _config(args)
    records = []
    for clip_id, dets in _read_detections(args.detections, cfg).items():
        for t in track_clip(dets, cfg.tracker):
            records.append({"clip_id": clip_id, **io.track_to_dict(t, assign_class(t))})
    io.write_lines(args.out or sys.stdout, records)


def cmd_events(args) -> None:
    cfg = _config(args)
    clips = _read_detections(args.detections, cfg)
    out = Path(args.out)
    tail = {c: None for c in CLASSES}
    if args.resume and out.exists():
        tail = io.tail_events(io.read_events(out), cfg.camera_id)
    elif out.exists():
        out.unlink()
    for clip_id in sorted(clips, key=io.natural_key):
        per_class = run_pipeline(clips[clip_id], cfg, clip_id, tail)
        io.append_events(out, [e for evs in per_class.values() for e in evs])
        tail = {c: (evs[-1] if evs else None) for c, evs in per_class.items()}
        log.info("clip %s: %s", clip_id,
                 {c: len(evs) for c, evs in per_class.items()})


def cmd_eval(args) -> None:
    pred, gt = io.read_events(args.pred), io.read_events(args.gt)
    report = evaluate(pred, gt, args.threshold, args.state_blind)
    print(render_table(pred, gt, report))
    for cls, m in report.metrics.items():
        print(f"{cls}: P={m.precision:.3f} R={m.recall:.3f} F1={m.f1:.3f} "
              f"mean t-IoU={m.mean_t_iou:.3f}")
    if args.report:
        payload = report.to_dict()
        payload["sweep"] = {str(t): {c: vars(m) for c, m in r.metrics.items()}
                            for t, r in sweep(pred, gt, THRESHOLD_SWEEP, args.state_blind).items()}
        Path(args.report).write_text(json.dumps(payload, indent=2), encoding="utf-8")


def cmd_synth(args) -> None:
    script = load_script(args.script)
    out = generate(script)
    noise = NoiseModel(args.jitter, args.size_jitter, args.dropout, args.flip, args.spurious)
    dets = perturb(out.detections, noise, script.seed if args.seed is None else args.seed,
                   script.config.frame, script.config.n_frames)
    io.write_detections(args.detections_out, dets, script.config.n_frames)
    io.write_events(args.gt_out, out.gt_events())


def cmd_curate_select(args) -> None:
    emb = io.load_embeddings(args.embeddings)
    frames = subsample_every_n(len(emb), args.every)
    picked = select_informative(emb[frames], args.percentile)
    manifest = {"source": str(args.embeddings), "every": args.every,
                "percentile": args.percentile, "frames": [frames[i] for i in picked]}
    io.write_lines(args.out or sys.stdout, [manifest])


def cmd_curate_sample(args) -> None:
    clips = io.read_clip_meta(args.meta)
    chosen = stratified_sample(clips, args.k, args.seed)
    io.write_lines(args.out or sys.stdout, [{"clip_id": c} for c in chosen])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="stallmon", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("track", help="detections -> track dump (JSONL)")
    p.add_argument("--detections", required=True)
    p.add_argument("--out")
    _add_config_flags(p)
    p.set_defaults(func=cmd_track)

    p = sub.add_parser("events", help="detections + config -> event log")
    p.add_argument("--detections", required=True)
    p.add_argument("--out", required=True, help="event log (JSONL)")
    p.add_argument("--resume", action="store_true",
                   help="append to --out, using its last clip for the clip-boundary correction")
    _add_config_flags(p)
    p.set_defaults(func=cmd_events)

    p = sub.add_parser("eval", help="predicted vs ground-truth events")
    p.add_argument("--pred", required=True)
    p.add_argument("--gt", required=True)
    p.add_argument("--threshold", type=float, default=DEFAULT_THRESHOLD)
    p.add_argument("--state-blind", action="store_true", help="match on class only")
    p.add_argument("--report", help="write machine-readable JSON report here")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("synth", help="scene script -> detections + ground truth")
    p.add_argument("--script", required=True)
    p.add_argument("--detections-out", required=True)
    p.add_argument("--gt-out", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--jitter", type=float, default=0.0, help="box center sigma, px")
    p.add_argument("--size-jitter", type=float, default=0.0, help="box size sigma, ratio")
    p.add_argument("--dropout", type=float, default=0.0)
    p.add_argument("--flip", type=float, default=0.0, help="class flip probability")
    p.add_argument("--spurious", type=float, default=0.0, help="spurious boxes per frame")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("curate", help="dataset curation helpers")
    csub = p.add_subparsers(dest="curate_command", required=True)
    q = csub.add_parser("select", help="pick the most distinct frames from embeddings")
    q.add_argument("--embeddings", required=True, help=".npy or text matrix, one frame per row")
    q.add_argument("--every", type=int, default=1, help="keep every n-th frame first")
    q.add_argument("--percentile", type=float, default=0.25)
    q.add_argument("--out")
    q.set_defaults(func=cmd_curate_select)
    q = csub.add_parser("sample", help="stratified clip sample from metadata JSONL")
    q.add_argument("--meta", required=True)
    q.add_argument("--k", type=int, default=1)
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("--out")
    q.set_defaults(func=cmd_curate_sample)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=os.environ.get("STALLMON_LOG_LEVEL", "WARNING").upper(),
                        format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except (StallError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
