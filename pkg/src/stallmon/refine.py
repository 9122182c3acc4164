"""Post-clip track heuristics: stable class choice and merging of disjoint IDs."""
from __future__ import annotations

from dataclasses import dataclass, field

from .geometry import Box
from .tracking import Detection, MotionState, Track


@dataclass
class RefinedObject:
    object_id: int
    cls: str
    # frame -> box, or None for a gap ("not localized") frame
    timeline: dict[int, Box | None] = field(default_factory=dict)
    source_track_ids: list[int] = field(default_factory=list)

    @property
    def first_frame(self) -> int:
        return min(self.timeline)

    @property
    def last_frame(self) -> int:
        return max(self.timeline)

    def observed_frames(self) -> set[int]:
        return {f for f, b in self.timeline.items() if b is not None}


def assign_class(t: Track) -> str:
    """Class with the highest cumulative score over the track.

    Ties go to the higher single-frame maximum, then to the lexicographically
    smaller class name.
    """
    peak: dict[str, float] = {}
    for _, det in t.observations:
        for cls, p in det.scores.items():
            peak[cls] = max(peak.get(cls, 0.0), p)
    totals = t.class_scores_sum
    return min(totals, key=lambda c: (-totals[c], -peak.get(c, 0.0), c))


def fill_short_gaps(obj: RefinedObject, max_gap: int) -> RefinedObject:
    """Copy of ``obj`` with gap runs of at most ``max_gap`` frames filled by
    linear interpolation between the boxes on either side."""
    timeline = dict(obj.timeline)
    if max_gap > 0:
        frames = sorted(obj.observed_frames())
        for f0, f1 in zip(frames, frames[1:]):
            gap = f1 - f0 - 1
            if 0 < gap <= max_gap:
                a, b = timeline[f0], timeline[f1]
                for k in range(1, gap + 1):
                    s = k / (gap + 1)
                    timeline[f0 + k] = Box(a.x + s * (b.x - a.x), a.y + s * (b.y - a.y),
                                           a.w + s * (b.w - a.w), a.h + s * (b.h - a.h))
    return RefinedObject(obj.object_id, obj.cls, timeline, list(obj.source_track_ids))


def merge_tracks(tracks: list[Track]) -> list[RefinedObject]:
    """Merge same-class tracks that never share a frame.

    Tracks are visited by first frame; each joins the earliest-created object of
    its class whose observed frames are disjoint from its own, otherwise it
    founds a new object. Frames between merged pieces become gaps.
    """
    objects: list[RefinedObject] = []
    support: list[set[int]] = []
    for t in sorted(tracks, key=lambda t: (t.first_frame, t.id)):
        cls = assign_class(t)
        boxes = {f: d.box for f, d in t.observations}
        frames = set(boxes)
        target = None
        for i, obj in enumerate(objects):
            if obj.cls == cls and support[i].isdisjoint(frames):
                target = i
                break
        if target is None:
            objects.append(RefinedObject(len(objects) + 1, cls))
            support.append(set())
            target = len(objects) - 1
        obj = objects[target]
        support[target] |= frames
        obj.source_track_ids.append(t.id)
        timeline = {f: obj.timeline.get(f) for f in obj.timeline}
        timeline.update(boxes)
        lo, hi = min(timeline), max(timeline)
        obj.timeline = {f: timeline.get(f) for f in range(lo, hi + 1)}
    return objects


def object_as_track(obj: RefinedObject) -> Track:
    """Re-expand an object into a pseudo-track (used to check idempotence)."""
    first = obj.timeline[obj.first_frame]
    trk = Track(obj.object_id, MotionState.from_box(first), {obj.cls: 1.0})
    for f, box in obj.timeline.items():
        if box is not None:
            trk.observations.append((f, Detection(f, box, {obj.cls: 1.0})))
    trk.hits = len(trk.observations)
    return trk
