"""Turn refined per-clip objects into per-class stall events.

Pipeline per clip: localize every object per sampled frame, drop objects that
never enter the stall, aggregate object states into one frame state per class,
run-length merge frames into events, resolve "not localized" runs into
inside/outside (invisible), then patch the clip head using the previous clip's
last event.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from enum import Enum
from typing import Iterable, Mapping, Sequence

from .config import CLASSES, StallConfig
from .geometry import box_polygon_intersects, dist_to_segment, touches_frame_edge
from .refine import RefinedObject, fill_short_gaps, merge_tracks
from .tracking import Detection, track_clip

log = logging.getLogger(__name__)


class ObjectState(str, Enum):
    INSIDE = "inside"
    OUTSIDE = "outside"
    NOT_LOCALIZED = "not_localized"


class FrameState(str, Enum):
    OUTSIDE_INVISIBLE = "outside_invisible"
    OUTSIDE_VISIBLE = "outside_visible"
    NOT_LOCALIZED = "not_localized"
    INSIDE_VISIBLE = "inside_visible"
    MULTIPLE_INSIDE_VISIBLE = "multiple_inside_visible"
    INSIDE_INVISIBLE = "inside_invisible"


VISIBLE_STATES = frozenset({FrameState.OUTSIDE_VISIBLE, FrameState.INSIDE_VISIBLE,
                            FrameState.MULTIPLE_INSIDE_VISIBLE})
INVISIBLE_STATES = frozenset({FrameState.OUTSIDE_INVISIBLE, FrameState.INSIDE_INVISIBLE})

# short names used in published event listings
STATE_ALIASES = {"inside": FrameState.INSIDE_VISIBLE, "outside": FrameState.OUTSIDE_VISIBLE,
                 "multiple_inside": FrameState.MULTIPLE_INSIDE_VISIBLE}


def parse_state(s: str) -> FrameState:
    if s in STATE_ALIASES:
        return STATE_ALIASES[s]
    return FrameState(s)


@dataclass(frozen=True)
class Event:
    cls: str
    state: FrameState
    start_s: float
    end_s: float
    clip_id: str = ""
    camera_id: str = ""
    # set when invisible-state resolution had no earlier localized frame to look at
    provisional: bool = False
    wall_clock_start: str | None = None

    def __post_init__(self):
        if not self.start_s < self.end_s:
            raise ValueError(f"event must have start < end, got {self.start_s}, {self.end_s}")

    @property
    def duration(self) -> float:
        return self.end_s - self.start_s


def localize(obj: RefinedObject, frame_idx: int, cfg: StallConfig) -> ObjectState:
    if frame_idx not in obj.timeline:
        raise ValueError(f"frame {frame_idx} outside object {obj.object_id} "
                         f"span [{obj.first_frame}, {obj.last_frame}]")
    box = obj.timeline[frame_idx]
    if box is None:
        return ObjectState.NOT_LOCALIZED
    if box_polygon_intersects(box, cfg.floor_polygon, cfg.min_area_ratio):
        return ObjectState.INSIDE
    return ObjectState.OUTSIDE


def discard_never_inside(objs: Sequence[RefinedObject], cfg: StallConfig) -> list[RefinedObject]:
    return [o for o in objs
            if any(localize(o, f, cfg) is ObjectState.INSIDE for f in o.timeline)]


def aggregate_frame(states: Iterable[ObjectState]) -> FrameState:
    n_in = n_nl = n_out = 0
    for st in states:
        if st is ObjectState.INSIDE:
            n_in += 1
        elif st is ObjectState.NOT_LOCALIZED:
            n_nl += 1
        else:
            n_out += 1
    if n_in >= 2:
        return FrameState.MULTIPLE_INSIDE_VISIBLE
    if n_in == 1:
        return FrameState.INSIDE_VISIBLE
    if n_nl:
        return FrameState.NOT_LOCALIZED
    if n_out:
        return FrameState.OUTSIDE_VISIBLE
    return FrameState.OUTSIDE_INVISIBLE


def merge_temporal(timeline: Sequence[FrameState], stride_s: float, cls: str = "",
                   clip_id: str = "", camera_id: str = "") -> list[Event]:
    events = []
    start = 0
    for i in range(1, len(timeline) + 1):
        if i == len(timeline) or timeline[i] != timeline[start]:
            events.append(Event(cls, timeline[start], start * stride_s, i * stride_s,
                                clip_id, camera_id))
            start = i
    return events


def expand(events: Sequence[Event], stride_s: float) -> list[FrameState]:
    """Inverse of merge_temporal for a partitioning event list."""
    out = []
    for ev in events:
        n = round(ev.end_s / stride_s) - round(ev.start_s / stride_s)
        out.extend([ev.state] * n)
    return out


def _resolve_object(obj: RefinedObject, before: int, cfg: StallConfig) -> FrameState | None:
    """Step-4 rule for one object, looking at its last box before ``before``.

    None means the object has no earlier localized frame in this clip.
    """
    last = None
    for f in range(before - 1, obj.first_frame - 1, -1):
        box = obj.timeline.get(f)
        if box is not None:
            last = box
            break
    if last is None:
        return None
    if not box_polygon_intersects(last, cfg.floor_polygon, cfg.min_area_ratio):
        return FrameState.OUTSIDE_INVISIBLE
    edges = touches_frame_edge(last, cfg.frame, cfg.edge_margin_px)
    if edges & cfg.interior_edges:
        return FrameState.INSIDE_INVISIBLE
    if dist_to_segment(last.bottom_center, cfg.entrance) <= cfg.entrance_dist_px:
        return FrameState.OUTSIDE_INVISIBLE
    return FrameState.INSIDE_INVISIBLE


def _not_localized_at(obj: RefinedObject, f: int, n_frames: int) -> bool:
    # gap frames, plus every frame after the last sighting in this clip
    if f in obj.timeline:
        return obj.timeline[f] is None
    return obj.first_frame < f < n_frames and f > obj.last_frame


def classify_not_localized(ev: Event, objs: Sequence[RefinedObject], cfg: StallConfig) -> Event:
    """Resolve a not-localized event into inside_invisible or outside_invisible.

    Each object that is not localized during the event is judged from its last
    localized box before its first not-localized frame in the event. The event
    is inside_invisible if any object resolves that way.
    """
    if ev.state is not FrameState.NOT_LOCALIZED:
        raise ValueError(f"expected a not_localized event, got {ev.state}")
    f0 = round(ev.start_s / cfg.stride_s)
    f1 = round(ev.end_s / cfg.stride_s)
    resolved = []
    for obj in objs:
        first_nl = next((f for f in range(f0, f1) if _not_localized_at(obj, f, cfg.n_frames)), None)
        if first_nl is None:
            continue
        resolved.append(_resolve_object(obj, first_nl, cfg))
    if FrameState.INSIDE_INVISIBLE in resolved:
        return replace(ev, state=FrameState.INSIDE_INVISIBLE)
    provisional = not resolved or None in resolved
    return replace(ev, state=FrameState.OUTSIDE_INVISIBLE, provisional=provisional)


def correct_inter_clip(prev_last: Event | None, current: Sequence[Event]) -> list[Event]:
    """Carry a blind-spot state across a clip boundary.

    If the previous clip ended inside_invisible, leading outside_invisible
    events of this clip become inside_invisible, up to the first visible event.
    Only labels change; times never do.
    """
    out = list(current)
    if prev_last is None or prev_last.state is not FrameState.INSIDE_INVISIBLE:
        return out
    for i, ev in enumerate(out):
        if ev.state not in INVISIBLE_STATES:
            break
        if ev.state is FrameState.OUTSIDE_INVISIBLE:
            out[i] = replace(ev, state=FrameState.INSIDE_INVISIBLE, provisional=False)
    return out


def _merge_adjacent(events: Sequence[Event]) -> list[Event]:
    out: list[Event] = []
    for ev in events:
        if out and out[-1].state == ev.state and out[-1].end_s == ev.start_s:
            out[-1] = replace(out[-1], end_s=ev.end_s,
                              provisional=out[-1].provisional or ev.provisional)
        else:
            out.append(ev)
    return out


def class_timeline(objs: Sequence[RefinedObject], cfg: StallConfig) -> list[FrameState]:
    n = cfg.n_frames
    timeline = []
    for f in range(n):
        states = []
        for o in objs:
            if f in o.timeline:
                states.append(localize(o, f, cfg))
            elif _not_localized_at(o, f, n):
                states.append(ObjectState.NOT_LOCALIZED)
        timeline.append(aggregate_frame(states))
    return timeline


def events_for_class(objs: Sequence[RefinedObject], cls: str, cfg: StallConfig,
                     clip_id: str = "", prev_last: Event | None = None) -> list[Event]:
    kept = discard_never_inside([o for o in objs if o.cls == cls], cfg)
    timeline = class_timeline(kept, cfg)
    raw = merge_temporal(timeline, cfg.stride_s, cls, clip_id, cfg.camera_id)
    resolved = [classify_not_localized(ev, kept, cfg) if ev.state is FrameState.NOT_LOCALIZED
                else ev for ev in raw]
    return correct_inter_clip(prev_last, _merge_adjacent(resolved))


def run_pipeline(dets: Sequence[Detection], cfg: StallConfig, clip_id: str = "",
                 prev_tail: Mapping[str, Event | None] | None = None) -> dict[str, list[Event]]:
    """Detections of one clip -> events per class, each list partitioning the clip."""
    prev_tail = prev_tail or {}
    n = cfg.n_frames
    in_range = [d for d in dets if d.frame_idx < n]
    if len(in_range) != len(dets):
        log.warning("clip %s: dropped %d detections past frame %d", clip_id,
                    len(dets) - len(in_range), n - 1)
    tracks = track_clip(in_range, cfg.tracker)
    objs = [fill_short_gaps(o, cfg.interp_max_gap) for o in merge_tracks(tracks)]
    return {cls: events_for_class(objs, cls, cfg, clip_id, prev_tail.get(cls))
            for cls in CLASSES}
