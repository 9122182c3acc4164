"""JSON Lines wire formats for detections, events, tracks and curation inputs.

Detections: one record per sampled frame per clip::

    {"clip_id": "k1-0001", "frame_idx": 0,
     "boxes": [{"x": 10, "y": 20, "w": 100, "h": 200,
                "scores": {"horse": 0.9, "person": 0.1}, "confidence": 0.8}]}

Events: a header line followed by one event per line, sorted by
(camera, clip, class, start)::

    {"format": "stallmon-events", "version": 1}
    {"camera_id": "k1", "clip_id": "k1-0001", "class": "horse",
     "state": "inside_visible", "start_s": 0.0, "end_s": 60.0}
"""
from __future__ import annotations

import json
import logging
import re
from pathlib import Path
from typing import IO, Iterable, Sequence

import numpy as np

from .config import CLASSES
from .curation import ClipMeta
from .errors import InputError, OrderError
from .events import Event, parse_state
from .geometry import Box, FrameDims, clamp_box
from .tracking import Detection, Track

log = logging.getLogger(__name__)

EVENTS_HEADER = {"format": "stallmon-events", "version": 1}


def natural_key(s: str):
    """Sort key treating digit runs as numbers, so clip-2 < clip-10."""
    return [int(t) if t.isdigit() else t for t in re.split(r"(\d+)", s)]


def _open(src, mode="r"):
    if hasattr(src, "read") or hasattr(src, "write"):
        return src, False
    return open(src, mode, encoding="utf-8"), True


# -- detections ---------------------------------------------------------------

def detection_to_dict(d: Detection) -> dict:
    b = d.box
    return {"x": b.x, "y": b.y, "w": b.w, "h": b.h, "scores": dict(d.scores),
            "confidence": d.confidence}


def parse_detections(stream, confidence_threshold: float = 0.5,
                     frame: FrameDims | None = None) -> dict[str, list[Detection]]:
    """Read detection JSONL into {clip_id: detections}, clips in file order.

    Boxes under ``confidence_threshold`` are dropped; boxes are clamped to
    ``frame`` when given.
    """
    fh, close = _open(stream)
    clips: dict[str, dict[int, list[Detection]]] = {}
    try:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                clip_id = str(rec["clip_id"])
                frame_idx = rec["frame_idx"]
                if not isinstance(frame_idx, int) or isinstance(frame_idx, bool) or frame_idx < 0:
                    raise ValueError(f"bad frame_idx {frame_idx!r}")
                boxes = rec["boxes"]
                if not isinstance(boxes, list):
                    raise ValueError("boxes must be a list")
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise InputError(f"malformed detection record: {exc}", lineno) from exc
            frames = clips.setdefault(clip_id, {})
            if frame_idx in frames:
                raise InputError(f"duplicate frame {frame_idx} for clip {clip_id}", lineno)
            dets = []
            for raw in boxes:
                try:
                    conf = float(raw.get("confidence", 1.0))
                    box = Box(float(raw["x"]), float(raw["y"]), float(raw["w"]), float(raw["h"]))
                    scores = {str(k): float(v) for k, v in raw["scores"].items()}
                    if conf < confidence_threshold:
                        continue
                    if frame is not None:
                        clamped = clamp_box(box, frame)
                        if clamped is None:
                            log.warning("line %d: box %s lies outside the frame, dropped", lineno, box)
                            continue
                        if clamped != box:
                            log.warning("line %d: box clamped to frame bounds", lineno)
                        box = clamped
                    dets.append(Detection(frame_idx, box, scores, conf))
                except (KeyError, TypeError, ValueError, AttributeError) as exc:
                    raise InputError(f"malformed box: {exc}", lineno) from exc
            frames[frame_idx] = dets
    finally:
        if close:
            fh.close()
    return {cid: [d for f in sorted(frames) for d in frames[f]] for cid, frames in clips.items()}


def write_detections(stream, clips: dict[str, Sequence[Detection]], n_frames: int | None = None) -> None:
    """Write one record per frame; with ``n_frames`` empty frames are written too."""
    fh, close = _open(stream, "w")
    try:
        for clip_id, dets in clips.items():
            by_frame: dict[int, list[Detection]] = {}
            for d in dets:
                by_frame.setdefault(d.frame_idx, []).append(d)
            frames = range(n_frames) if n_frames is not None else sorted(by_frame)
            for f in frames:
                rec = {"clip_id": clip_id, "frame_idx": f,
                       "boxes": [detection_to_dict(d) for d in by_frame.get(f, [])]}
                fh.write(json.dumps(rec) + "\n")
    finally:
        if close:
            fh.close()


# -- events -------------------------------------------------------------------

def event_to_dict(ev: Event) -> dict:
    d = {"camera_id": ev.camera_id, "clip_id": ev.clip_id, "class": ev.cls,
         "state": ev.state.value, "start_s": ev.start_s, "end_s": ev.end_s}
    if ev.wall_clock_start is not None:
        d["wall_clock_start"] = ev.wall_clock_start
    if ev.provisional:
        d["provisional"] = True
    return d


def event_from_dict(d: dict) -> Event:
    return Event(cls=str(d["class"]), state=parse_state(d["state"]),
                 start_s=float(d["start_s"]), end_s=float(d["end_s"]),
                 clip_id=str(d["clip_id"]), camera_id=str(d.get("camera_id", "")),
                 provisional=bool(d.get("provisional", False)),
                 wall_clock_start=d.get("wall_clock_start"))


def sort_events(events: Iterable[Event]) -> list[Event]:
    return sorted(events, key=lambda e: (e.camera_id, natural_key(e.clip_id), e.cls, e.start_s))


def read_events(path) -> list[Event]:
    fh, close = _open(path)
    events = []
    try:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                if lineno == 1 and rec.get("format") == EVENTS_HEADER["format"]:
                    continue
                events.append(event_from_dict(rec))
            except (json.JSONDecodeError, KeyError, TypeError, ValueError, AttributeError) as exc:
                raise InputError(f"malformed event record: {exc}", lineno) from exc
    finally:
        if close:
            fh.close()
    return events


def write_events(path, events: Iterable[Event]) -> None:
    fh, close = _open(path, "w")
    try:
        fh.write(json.dumps(EVENTS_HEADER) + "\n")
        for ev in sort_events(events):
            fh.write(json.dumps(event_to_dict(ev)) + "\n")
    finally:
        if close:
            fh.close()


def last_clip_per_camera(events: Iterable[Event]) -> dict[str, str]:
    last: dict[str, str] = {}
    for ev in events:
        cur = last.get(ev.camera_id)
        if cur is None or natural_key(ev.clip_id) > natural_key(cur):
            last[ev.camera_id] = ev.clip_id
    return last


def append_events(path: str | Path, events: Sequence[Event]) -> None:
    """Append one or more clips to an event log, refusing to go back in time."""
    path = Path(path)
    if not path.exists() or path.stat().st_size == 0:
        write_events(path, events)
        return
    last = last_clip_per_camera(read_events(path))
    for ev in events:
        prev = last.get(ev.camera_id)
        if prev is not None and natural_key(ev.clip_id) <= natural_key(prev):
            raise OrderError(f"camera {ev.camera_id}: clip {ev.clip_id} does not come after "
                             f"logged clip {prev}")
    with open(path, "a", encoding="utf-8") as fh:
        for ev in sort_events(events):
            fh.write(json.dumps(event_to_dict(ev)) + "\n")


def tail_events(events: Iterable[Event], camera_id: str) -> dict[str, Event | None]:
    """Last event per class of the latest logged clip for one camera."""
    evs = [e for e in events if e.camera_id == camera_id]
    tail: dict[str, Event | None] = {c: None for c in CLASSES}
    if not evs:
        return tail
    last_clip = max((e.clip_id for e in evs), key=natural_key)
    for e in evs:
        if e.clip_id == last_clip:
            cur = tail.get(e.cls)
            if cur is None or e.end_s > cur.end_s:
                tail[e.cls] = e
    return tail


# -- tracks and curation inputs -----------------------------------------------

def track_to_dict(t: Track, cls: str | None = None) -> dict:
    d = {"id": t.id, "hits": t.hits, "class_scores_sum": t.class_scores_sum,
         "observations": [{"frame_idx": f, **detection_to_dict(d)} for f, d in t.observations]}
    if cls is not None:
        d["class"] = cls
    return d


def load_embeddings(path) -> np.ndarray:
    """.npy array, or whitespace/comma separated text with one frame per row."""
    path = Path(path)
    try:
        if path.suffix == ".npy":
            arr = np.load(path)
        else:
            text = path.read_text(encoding="utf-8").replace(",", " ")
            rows = [list(map(float, ln.split())) for ln in text.splitlines() if ln.strip()]
            if len({len(r) for r in rows}) > 1:
                raise InputError("embedding rows have different dimensions")
            arr = np.array(rows, dtype=float)
    except ValueError as exc:
        raise InputError(f"{path}: {exc}") from exc
    if arr.ndim != 2 or arr.shape[1] < 1:
        raise InputError(f"{path}: expected a frames x dim matrix, got shape {arr.shape}")
    return arr


def read_clip_meta(path) -> list[ClipMeta]:
    fh, close = _open(path)
    out = []
    try:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                out.append(ClipMeta(str(rec["clip_id"]), str(rec["stall_id"]),
                                    str(rec["time_of_day"]), str(rec["season"])))
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise InputError(f"malformed clip metadata: {exc}", lineno) from exc
    finally:
        if close:
            fh.close()
    return out


def write_lines(stream: IO[str] | str | Path, records: Iterable[dict]) -> None:
    fh, close = _open(stream, "w")
    try:
        for r in records:
            fh.write(json.dumps(r) + "\n")
    finally:
        if close:
            fh.close()
