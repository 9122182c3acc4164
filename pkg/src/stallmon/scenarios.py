"""A small library of parameterised stall scenes built on :mod:`stallmon.sim`.

All scenes use one reference camera (1280x720, concave floor polygon,
doorway at the upper left, blind spots under the bottom and right edges).
Walking speeds stay under ~30 px per sampled frame so a fresh track keeps
IoU above the default gate.
"""
from __future__ import annotations

import numpy as np

from .config import StallConfig
from .geometry import Box, FrameDims, Polygon, Segment
from .sim import Actor, Hidden, Script

HORSE_W, HORSE_H = 260.0, 180.0
PERSON_W, PERSON_H = 90.0, 220.0


def reference_config(camera_id: str = "sim", **overrides) -> StallConfig:
    kwargs = dict(
        camera_id=camera_id,
        frame=FrameDims(1280, 720),
        floor_polygon=Polygon(((300, 330), (640, 380), (1000, 330), (1280, 720),
                               (0, 720), (0, 560))),
        entrance=Segment((300, 330), (550, 367)),
        interior_edges=frozenset({"bottom", "right"}),
    )
    kwargs.update(overrides)
    return StallConfig(**kwargs)


# anchor spots (top-left corners)
HALL = (380.0, 60.0)          # person standing in the hall, feet above the floor
DOOR = (380.0, 160.0)         # person just inside the doorway
PERSON_MID = (600.0, 330.0)
PERSON_BLIND = (900.0, 500.0)  # feet on the bottom edge
HORSE_MID = (520.0, 420.0)
HORSE_DOOR = (330.0, 200.0)   # horse nose-out at the doorway
HORSE_BLIND = (1020.0, 450.0)  # flank on the right edge


def _p(xy, dx=0.0, dy=0.0) -> Box:
    return Box(xy[0] + dx, xy[1] + dy, PERSON_W, PERSON_H)


def _h(xy, dx=0.0, dy=0.0) -> Box:
    return Box(xy[0] + dx, xy[1] + dy, HORSE_W, HORSE_H)


def _walk(t0: float, a: Box, b: Box, speed: float = 25.0) -> float:
    """Arrival time when walking from a to b at ``speed`` px/s."""
    d = float(np.hypot(b.x - a.x, b.y - a.y))
    return t0 + max(1.0, np.ceil(d / speed))


def static_horse(rng, cfg) -> list[Actor]:
    j = rng.uniform(-30, 30, 2)
    return [Actor("horse", ((0.0, _h(HORSE_MID, *j)), (60.0, _h(HORSE_MID, *j))))]


def person_visit(rng, cfg) -> list[Actor]:
    """Person enters, stands in the middle, leaves through the door."""
    t_in = float(rng.integers(5, 16))
    door, mid = _p(DOOR), _p(PERSON_MID, *rng.uniform(-20, 20, 2))
    t_mid = _walk(t_in + 3, door, mid)
    t_back = t_mid + float(rng.integers(5, 12))
    t_door = _walk(t_back, mid, door)
    t_out = t_door + 3
    person = Actor("person", ((t_in, door), (t_in + 3, door), (t_mid, mid), (t_back, mid),
                              (t_door, door), (t_out, door)))
    return static_horse(rng, cfg) + [person]


def horse_exit(rng, cfg) -> list[Actor]:
    """Horse walks to the door and out of view."""
    mid, door = _h(HORSE_MID, *rng.uniform(-20, 20, 2)), _h(HORSE_DOOR)
    t_go = float(rng.integers(15, 25))
    t_door = _walk(t_go, mid, door)
    t_out = t_door + 3
    return [Actor("horse", ((0.0, mid), (t_go, mid), (t_door, door), (t_out, door)))]


def blind_spot_dwell(rng, cfg) -> list[Actor]:
    """Person walks into the blind spot under the camera, waits, comes back out."""
    t_in = float(rng.integers(3, 8))
    door, blind = _p(DOOR), _p(PERSON_BLIND, rng.uniform(-20, 20), 0.0)
    t_blind = _walk(t_in + 3, door, blind)
    t_hide = t_blind + 3
    t_show = t_hide + float(rng.integers(8, 14))
    t_leave = t_show + 3
    t_door = _walk(t_leave, blind, door)
    t_out = t_door + 3
    person = Actor("person",
                   ((t_in, door), (t_in + 3, door), (t_blind, blind), (t_leave, blind),
                    (t_door, door), (t_out, door)),
                   (Hidden(t_hide, t_show, "blind_spot"),))
    return static_horse(rng, cfg) + [person]


def blind_spot_until_end(rng, cfg) -> list[Actor]:
    """Person enters and stays hidden in the blind spot to the end of the clip."""
    t_in = float(rng.integers(10, 20))
    door, blind = _p(DOOR), _p(PERSON_BLIND, rng.uniform(-20, 20), 0.0)
    t_blind = _walk(t_in + 3, door, blind)
    t_hide = t_blind + 3
    person = Actor("person", ((t_in, door), (t_in + 3, door), (t_blind, blind), (60.0, blind)),
                   (Hidden(t_hide, 60.0, "blind_spot"),))
    return [person]


def multi_horse(rng, cfg) -> list[Actor]:
    """Two horses; the second is led in partway through the clip."""
    left = _h((60.0, 480.0), *rng.uniform(-10, 10, 2))
    right = _h((700.0, 420.0), *rng.uniform(-10, 10, 2))
    t_in = float(rng.integers(10, 25))
    door = _h(HORSE_DOOR)
    t_arrive = _walk(t_in + 3, door, right)
    first = Actor("horse", ((0.0, left), (60.0, left)))
    second = Actor("horse", ((t_in, door), (t_in + 3, door), (t_arrive, right), (60.0, right)))
    return [first, second]


def hall_passerby(rng, cfg) -> list[Actor]:
    """Person crosses the hall without stepping in; only the horse counts."""
    t0 = float(rng.integers(5, 20))
    a, b = Box(0.0, 40.0, PERSON_W, PERSON_H), Box(280.0, 60.0, PERSON_W, PERSON_H)
    return static_horse(rng, cfg) + [Actor("person", ((t0, a), (_walk(t0, a, b, 20.0), b)))]


def hall_then_enter(rng, cfg) -> list[Actor]:
    """Person waits in the hall, steps in, and later leaves the same way."""
    t0 = float(rng.integers(3, 6))
    hall, door, mid = _p(HALL), _p(DOOR), _p(PERSON_MID, *rng.uniform(-20, 20, 2))
    t_step = t0 + float(rng.integers(4, 7))
    t_door = _walk(t_step, hall, door, 20.0)
    t_mid = _walk(t_door, door, mid)
    t_back = t_mid + float(rng.integers(3, 7))
    t_door2 = _walk(t_back, mid, door)
    t_hall = _walk(t_door2 + 2, door, hall, 20.0)
    t_out = t_hall + 6
    person = Actor("person", ((t0, hall), (t_step, hall), (t_door, door), (t_mid, mid),
                              (t_back, mid), (t_door2, door), (t_door2 + 2, door), (t_hall, hall),
                              (t_out, hall)))
    return static_horse(rng, cfg) + [person]


def leave_and_return(rng, cfg) -> list[Actor]:
    """Person leaves through the door and comes back some seconds later."""
    door, mid = _p(DOOR), _p(PERSON_MID, *rng.uniform(-20, 20, 2))
    t_go = float(rng.integers(5, 10))
    t_door = _walk(t_go, mid, door)
    t_out = t_door + 3
    t_back = t_out + float(rng.integers(8, 14))
    t_mid = _walk(t_back + 3, door, mid)
    person = Actor("person", ((0.0, mid), (t_go, mid), (t_door, door), (t_back + 3, door),
                              (t_mid, mid), (60.0, mid)),
                   (Hidden(t_out, t_back, "away"),))
    return static_horse(rng, cfg) + [person]


def blind_spot_across_clips(rng, cfg) -> list[Actor]:
    """Horse steps into the right-edge blind spot near the end of one clip
    and comes back out during the next."""
    mid, blind = _h(HORSE_MID, *rng.uniform(-20, 20, 2)), _h(HORSE_BLIND)
    t_go = float(rng.integers(25, 31))
    t_blind = _walk(t_go, mid, blind)
    t_hide = t_blind + 3
    t_show = 60.0 + float(rng.integers(10, 25))
    t_back = _walk(t_show + 3, blind, mid)
    horse = Actor("horse", ((0.0, mid), (t_go, mid), (t_blind, blind), (t_show + 3, blind),
                            (t_back, mid), (120.0, mid)),
                  (Hidden(t_hide, t_show, "blind_spot"),))
    return [horse]


def empty(rng, cfg) -> list[Actor]:
    return []


SCENES = {
    "static_horse": (static_horse, 1),
    "person_visit": (person_visit, 1),
    "horse_exit": (horse_exit, 1),
    "blind_spot_dwell": (blind_spot_dwell, 1),
    "blind_spot_until_end": (blind_spot_until_end, 1),
    "multi_horse": (multi_horse, 1),
    "hall_passerby": (hall_passerby, 1),
    "hall_then_enter": (hall_then_enter, 1),
    "leave_and_return": (leave_and_return, 1),
    "blind_spot_across_clips": (blind_spot_across_clips, 2),
    "empty": (empty, 1),
}


def make_scene(kind: str, seed: int, cfg: StallConfig | None = None) -> Script:
    build, clips = SCENES[kind]
    cfg = cfg or reference_config()
    rng = np.random.default_rng(seed)
    return Script(cfg, build(rng, cfg), clips=clips, seed=seed, clip_prefix=f"{kind}-{seed}-")


def scene_suite(n: int = 25, seed: int = 0) -> list[Script]:
    """``n`` scripts cycling through every scene kind with per-script seeds."""
    kinds = list(SCENES)
    return [make_scene(kinds[i % len(kinds)], seed * 1000 + i) for i in range(n)]
