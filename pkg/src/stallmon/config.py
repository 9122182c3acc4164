"""Per-camera stall configuration and its YAML/JSON loader."""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .errors import ConfigError
from .geometry import EDGES, FrameDims, Polygon, Segment
from .tracking import TrackerParams

REFERENCE_WIDTH = 1280.0
REFERENCE_ENTRANCE_DIST = 150.0
CLASSES = ("horse", "person")


@dataclass(frozen=True)
class StallConfig:
    camera_id: str
    frame: FrameDims
    floor_polygon: Polygon
    entrance: Segment
    # None -> 150 px scaled by frame width / 1280
    entrance_dist_px: float | None = None
    edge_margin_px: float = 10.0
    interior_edges: frozenset[str] = frozenset()
    min_area_ratio: float = 0.0
    fps: float = 20.0
    frame_stride: int = 20
    confidence_threshold: float = 0.5
    # upstream detector NMS threshold; recorded, not used
    detector_iou_threshold: float = 0.5
    clip_length_s: float = 60.0
    interp_max_gap: int = 3
    tracker: TrackerParams = field(default_factory=TrackerParams)

    def __post_init__(self):
        object.__setattr__(self, "interior_edges", frozenset(self.interior_edges))
        if self.entrance_dist_px is None:
            object.__setattr__(self, "entrance_dist_px",
                               REFERENCE_ENTRANCE_DIST * self.frame.width / REFERENCE_WIDTH)
        bad = set(self.interior_edges) - set(EDGES)
        if bad:
            raise ConfigError(f"unknown interior edges: {sorted(bad)}")
        if self.entrance_dist_px <= 0:
            raise ConfigError("entrance_dist_px must be positive")
        if self.edge_margin_px < 0:
            raise ConfigError("edge_margin_px must be non-negative")
        if not 0.0 <= self.min_area_ratio < 1.0:
            raise ConfigError("min_area_ratio must be in [0, 1)")
        if self.fps <= 0 or self.frame_stride < 1 or self.clip_length_s <= 0:
            raise ConfigError("fps, frame_stride and clip_length_s must be positive")
        if not 0.0 < self.confidence_threshold <= 1.0:
            raise ConfigError("confidence_threshold must be in (0, 1]")
        if self.interp_max_gap < 0:
            raise ConfigError("interp_max_gap must be >= 0")
        n = self.clip_length_s * self.fps / self.frame_stride
        if abs(n - round(n)) > 1e-9:
            raise ConfigError(f"clip of {self.clip_length_s}s at {self.fps} fps does not "
                              f"split into whole strides of {self.frame_stride}")
        x1, y1, x2, y2 = self.floor_polygon.bounds()
        if not self._in_frame(x1, y1) or not self._in_frame(x2, y2):
            raise ConfigError("floor polygon extends outside the frame")
        for pt in (self.entrance.a, self.entrance.b):
            if not self._in_frame(*pt):
                raise ConfigError(f"entrance point {pt} outside the frame")

    def _in_frame(self, x, y) -> bool:
        return 0 <= x <= self.frame.width and 0 <= y <= self.frame.height

    @property
    def stride_s(self) -> float:
        return self.frame_stride / self.fps

    @property
    def n_frames(self) -> int:
        return round(self.clip_length_s * self.fps / self.frame_stride)

    def to_dict(self) -> dict:
        return {
            "camera_id": self.camera_id,
            "frame": {"width": self.frame.width, "height": self.frame.height},
            "floor_polygon": [list(v) for v in self.floor_polygon.vertices],
            "entrance": [list(self.entrance.a), list(self.entrance.b)],
            "entrance_dist_px": self.entrance_dist_px,
            "edge_margin_px": self.edge_margin_px,
            "interior_edges": sorted(self.interior_edges),
            "min_area_ratio": self.min_area_ratio,
            "fps": self.fps,
            "frame_stride": self.frame_stride,
            "confidence_threshold": self.confidence_threshold,
            "detector_iou_threshold": self.detector_iou_threshold,
            "clip_length_s": self.clip_length_s,
            "interp_max_gap": self.interp_max_gap,
            "tracker": dataclasses.asdict(self.tracker),
        }


_SCALARS = {"entrance_dist_px", "edge_margin_px", "min_area_ratio", "fps", "frame_stride",
            "confidence_threshold", "detector_iou_threshold", "clip_length_s",
            "interp_max_gap"}


def config_from_dict(d: dict) -> StallConfig:
    if not isinstance(d, dict):
        raise ConfigError("config must be a mapping")
    for key in ("camera_id", "frame", "floor_polygon", "entrance"):
        if key not in d:
            raise ConfigError(f"missing required field {key!r}")
    unknown = set(d) - _SCALARS - {"camera_id", "frame", "floor_polygon", "entrance",
                                   "interior_edges", "tracker"}
    if unknown:
        raise ConfigError(f"unknown config fields: {sorted(unknown)}")
    try:
        frame = FrameDims(float(d["frame"]["width"]), float(d["frame"]["height"]))
        polygon = Polygon(tuple((float(x), float(y)) for x, y in d["floor_polygon"]))
        (ax, ay), (bx, by) = d["entrance"]
        entrance = Segment((float(ax), float(ay)), (float(bx), float(by)))
        kwargs = {k: d[k] for k in _SCALARS if k in d and d[k] is not None}
        for k in ("frame_stride", "interp_max_gap"):
            if k in kwargs:
                if int(kwargs[k]) != kwargs[k]:
                    raise ConfigError(f"{k} must be an integer")
                kwargs[k] = int(kwargs[k])
        for k, v in kwargs.items():
            if not isinstance(v, (int, float)) or isinstance(v, bool) or not math.isfinite(v):
                raise ConfigError(f"{k} must be a finite number")
        tracker = TrackerParams(**d.get("tracker", {}))
        return StallConfig(camera_id=str(d["camera_id"]), frame=frame, floor_polygon=polygon,
                           entrance=entrance, interior_edges=frozenset(d.get("interior_edges", ())),
                           tracker=tracker, **kwargs)
    except ConfigError:
        raise
    except (TypeError, ValueError, KeyError) as exc:
        raise ConfigError(f"invalid config: {exc}") from exc


def load_config(path: str | Path) -> StallConfig:
    with open(path, encoding="utf-8") as fh:
        try:
            data = yaml.safe_load(fh)
        except yaml.YAMLError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
    return config_from_dict(data)


def dump_config(cfg: StallConfig, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        yaml.safe_dump(cfg.to_dict(), fh, sort_keys=False)
