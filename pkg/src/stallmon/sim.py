"""Scripted synthetic stall scenes.

A script lists actors with box waypoints over global time (clip ``c`` covers
``[c * clip_length, (c + 1) * clip_length)``) and hidden intervals. An actor is
present on ``[first waypoint, last waypoint)``; while present and not hidden it
produces one detection per sampled frame. Hidden intervals say where the actor
really is: ``blind_spot`` (in the stall, out of view) or ``away``.

Ground truth comes straight from the script: true boxes against the floor
polygon plus the scripted hiding place. No tracker, no heuristics.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
import yaml

from .config import CLASSES, StallConfig, config_from_dict
from .errors import ConfigError, InputError
from .events import Event, FrameState, merge_temporal
from .geometry import Box, FrameDims, box_polygon_intersects, clamp_box
from .tracking import Detection

HIDE_KINDS = ("blind_spot", "away")


@dataclass(frozen=True)
class Hidden:
    start_s: float
    end_s: float
    where: str = "blind_spot"


@dataclass(frozen=True)
class Actor:
    cls: str
    waypoints: tuple[tuple[float, Box], ...]
    hidden: tuple[Hidden, ...] = ()

    def box_at(self, t: float) -> Box | None:
        """Linearly interpolated box, or None outside the presence interval."""
        wps = self.waypoints
        if t < wps[0][0] or t >= wps[-1][0]:
            return None
        for (t0, a), (t1, b) in zip(wps, wps[1:]):
            if t0 <= t < t1:
                s = (t - t0) / (t1 - t0)
                return Box(a.x + s * (b.x - a.x), a.y + s * (b.y - a.y),
                           a.w + s * (b.w - a.w), a.h + s * (b.h - a.h))
        return None

    def hidden_at(self, t: float) -> str | None:
        for h in self.hidden:
            if h.start_s <= t < h.end_s:
                return h.where
        return None


@dataclass
class Script:
    config: StallConfig
    actors: list[Actor] = field(default_factory=list)
    clips: int = 1
    seed: int = 0
    clip_prefix: str = "sim-"

    def __post_init__(self):
        validate_script(self)

    def clip_id(self, c: int) -> str:
        return f"{self.clip_prefix}{c:04d}"

    @property
    def duration(self) -> float:
        return self.clips * self.config.clip_length_s


@dataclass(frozen=True)
class NoiseModel:
    center_sigma_px: float = 0.0
    size_sigma_ratio: float = 0.0
    dropout: float = 0.0
    class_flip: float = 0.0
    spurious_rate: float = 0.0

    def __post_init__(self):
        for name in ("dropout", "class_flip"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ConfigError(f"{name} must be a probability")
        if min(self.center_sigma_px, self.size_sigma_ratio, self.spurious_rate) < 0:
            raise ConfigError("noise scales must be non-negative")


@dataclass
class SimOutput:
    detections: dict[str, list[Detection]]
    gt: dict[str, dict[str, list[Event]]]

    def gt_events(self) -> list[Event]:
        return [ev for per_cls in self.gt.values() for evs in per_cls.values() for ev in evs]


def validate_script(s: Script) -> None:
    f = s.config.frame
    if s.clips < 1:
        raise InputError("clips must be >= 1")
    for i, a in enumerate(s.actors):
        loc = f"actors[{i}]"
        if a.cls not in CLASSES:
            raise InputError(f"{loc}: unknown class {a.cls!r}")
        if len(a.waypoints) < 2:
            raise InputError(f"{loc}: needs at least 2 waypoints")
        for j, (t, box) in enumerate(a.waypoints):
            if j and t <= a.waypoints[j - 1][0]:
                raise InputError(f"{loc}.waypoints[{j}]: times must be strictly increasing")
            if box.x < 0 or box.y < 0 or box.x2 > f.width or box.y2 > f.height:
                raise InputError(f"{loc}.waypoints[{j}]: box {box} outside the frame")
        for j, h in enumerate(a.hidden):
            if h.where not in HIDE_KINDS:
                raise InputError(f"{loc}.hidden[{j}]: where must be one of {HIDE_KINDS}")
            if not 0 <= h.start_s < h.end_s <= s.duration:
                raise InputError(f"{loc}.hidden[{j}]: interval outside the script")


def _sample_times(s: Script, c: int) -> list[float]:
    cfg = s.config
    return [c * cfg.clip_length_s + k * cfg.stride_s for k in range(cfg.n_frames)]


def _scores(cls: str) -> dict[str, float]:
    return {c: (0.9 if c == cls else 0.1) for c in CLASSES}


def _truth_state(a: Actor, t: float, cfg: StallConfig) -> str | None:
    box = a.box_at(t)
    hide = a.hidden_at(t)
    if hide == "blind_spot":
        return "blind"
    if box is None or hide == "away":
        return None
    return "inside" if box_polygon_intersects(box, cfg.floor_polygon, cfg.min_area_ratio) else "outside"


def _truth_frame_state(states: Sequence[str]) -> FrameState:
    n_in = states.count("inside")
    if n_in >= 2:
        return FrameState.MULTIPLE_INSIDE_VISIBLE
    if n_in == 1:
        return FrameState.INSIDE_VISIBLE
    if "blind" in states:
        return FrameState.INSIDE_INVISIBLE
    if "outside" in states:
        return FrameState.OUTSIDE_VISIBLE
    return FrameState.OUTSIDE_INVISIBLE


def generate(script: Script) -> SimOutput:
    cfg = script.config
    detections: dict[str, list[Detection]] = {}
    gt: dict[str, dict[str, list[Event]]] = {}
    for c in range(script.clips):
        cid = script.clip_id(c)
        times = _sample_times(script, c)
        dets = []
        for k, t in enumerate(times):
            for a in script.actors:
                box = a.box_at(t)
                if box is not None and a.hidden_at(t) is None:
                    dets.append(Detection(k, box, _scores(a.cls), 0.9))
        detections[cid] = dets
        gt[cid] = {}
        for cls in CLASSES:
            per_actor = [[_truth_state(a, t, cfg) for t in times]
                         for a in script.actors if a.cls == cls]
            # same rule as the engine: actors never in the stall this clip do not count
            relevant = [row for row in per_actor if "inside" in row or "blind" in row]
            timeline = [_truth_frame_state([row[k] for row in relevant if row[k] is not None])
                        for k in range(len(times))]
            gt[cid][cls] = merge_temporal(timeline, cfg.stride_s, cls, cid, cfg.camera_id)
    return SimOutput(detections, gt)


def perturb(clips: dict[str, list[Detection]], noise: NoiseModel, seed: int,
            frame: FrameDims, n_frames: int) -> dict[str, list[Detection]]:
    """Seeded jitter, dropout, class flips and spurious boxes."""
    rng = np.random.default_rng(seed)
    out = {}
    for cid, dets in clips.items():
        kept = []
        for d in dets:
            if rng.random() < noise.dropout:
                continue
            dx, dy = rng.normal(0.0, 1.0, 2) * noise.center_sigma_px
            sw, sh = rng.normal(0.0, 1.0, 2) * noise.size_sigma_ratio
            flip = rng.random() < noise.class_flip
            if not (dx or dy or sw or sh or flip):
                kept.append(d)
                continue
            b = d.box
            w, h = b.w * max(0.1, 1 + sw), b.h * max(0.1, 1 + sh)
            cx, cy = b.x + b.w / 2 + dx, b.y + b.h / 2 + dy
            box = clamp_box(Box(cx - w / 2, cy - h / 2, w, h), frame)
            if box is None:
                continue
            scores = d.scores
            if flip:
                scores = {"horse": d.scores.get("person", 0.0), "person": d.scores.get("horse", 0.0)}
            kept.append(Detection(d.frame_idx, box, scores, d.confidence))
        if noise.spurious_rate > 0:
            for k in range(n_frames):
                for _ in range(rng.poisson(noise.spurious_rate)):
                    w, h = rng.uniform(20, 200, 2)
                    x, y = rng.uniform(0, frame.width - w), rng.uniform(0, frame.height - h)
                    p = float(rng.random())
                    kept.append(Detection(k, Box(x, y, w, h), {"horse": p, "person": 1 - p},
                                          float(rng.uniform(0.5, 1.0))))
        kept.sort(key=lambda d: d.frame_idx)
        out[cid] = kept
    return out


# -- script files -------------------------------------------------------------

def script_to_dict(s: Script) -> dict:
    return {
        "clips": s.clips,
        "seed": s.seed,
        "clip_prefix": s.clip_prefix,
        "stall": s.config.to_dict(),
        "actors": [{
            "class": a.cls,
            "waypoints": [[float(t), [float(b.x), float(b.y), float(b.w), float(b.h)]]
                          for t, b in a.waypoints],
            "hidden": [{"start": float(h.start_s), "end": float(h.end_s), "where": h.where} for h in a.hidden],
        } for a in s.actors],
    }


def script_from_dict(d: dict) -> Script:
    try:
        cfg = config_from_dict(d["stall"])
        actors = []
        for i, a in enumerate(d.get("actors", [])):
            try:
                wps = tuple((float(t), Box(*map(float, box))) for t, box in a["waypoints"])
                hidden = tuple(Hidden(float(h["start"]), float(h["end"]), h.get("where", "blind_spot"))
                               for h in a.get("hidden", []))
            except (KeyError, TypeError, ValueError) as exc:
                raise InputError(f"actors[{i}]: {exc}") from exc
            actors.append(Actor(str(a["class"]), wps, hidden))
        return Script(cfg, actors, int(d.get("clips", 1)), int(d.get("seed", 0)),
                      str(d.get("clip_prefix", "sim-")))
    except KeyError as exc:
        raise InputError(f"script is missing {exc}") from exc


def load_script(path: str | Path) -> Script:
    with open(path, encoding="utf-8") as fh:
        try:
            return script_from_dict(yaml.safe_load(fh))
        except yaml.YAMLError as exc:
            raise InputError(f"{path}: {exc}") from exc


def dump_script(s: Script, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        yaml.safe_dump(script_to_dict(s), fh, sort_keys=False)

