"""Stall monitoring: detections -> tracks -> stall events, plus evaluation."""

from .config import StallConfig, load_config
from .events import Event, FrameState, ObjectState, run_pipeline
from .geometry import Box, FrameDims, Polygon, Segment
from .tracking import Detection, Tracker, TrackerParams

__all__ = [
    "Box", "Detection", "Event", "FrameDims", "FrameState", "ObjectState", "Polygon",
    "Segment", "StallConfig", "Tracker", "TrackerParams", "load_config", "run_pipeline",
]
