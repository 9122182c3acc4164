"""Motion-only online tracker over sampled frames.

Each track carries a constant-velocity Kalman filter on
(cx, cy, area, aspect, v_cx, v_cy, v_area); detections are associated to
predicted track boxes by maximum total IoU, gated by ``iou_gate``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import lapack
from scipy.optimize import linear_sum_assignment

from .errors import ConfigError, OrderError
from .geometry import Box, iou, iou_matrix

MIN_AREA = 1.0

_F = np.eye(7)
_F[0, 4] = _F[1, 5] = _F[2, 6] = 1.0
_H = np.eye(4, 7)
# SORT defaults, before scaling
_Q_BASE = np.diag([1.0, 1.0, 1.0, 1.0, 0.01, 0.01, 1e-4])
_R_BASE = np.diag([1.0, 1.0, 10.0, 10.0])
_P0 = np.diag([10.0, 10.0, 10.0, 10.0, 1e4, 1e4, 1e4])


@dataclass(frozen=True)
class Detection:
    frame_idx: int
    box: Box
    scores: dict[str, float]
    confidence: float = 1.0

    def __post_init__(self):
        if self.frame_idx < 0:
            raise ValueError(f"frame_idx must be >= 0, got {self.frame_idx}")
        if not self.scores:
            raise ValueError("detection needs at least one class score")
        for p in (*self.scores.values(), self.confidence):
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"probability out of [0, 1]: {p}")


@dataclass(frozen=True)
class TrackerParams:
    iou_gate: float = 0.3
    max_age: int = 5
    min_hits: int = 1
    process_noise: float = 1.0
    measurement_noise: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.iou_gate < 1.0:
            raise ConfigError(f"iou_gate must be in (0, 1), got {self.iou_gate}")
        if self.max_age < 1:
            raise ConfigError(f"max_age must be >= 1, got {self.max_age}")
        if self.min_hits < 1:
            raise ConfigError(f"min_hits must be >= 1, got {self.min_hits}")
        if not (self.process_noise > 0 and self.measurement_noise > 0):
            raise ConfigError("noise scales must be positive")


@dataclass
class MotionState:
    mean: np.ndarray
    covariance: np.ndarray

    @classmethod
    def from_box(cls, box: Box) -> MotionState:
        mean = np.zeros(7)
        mean[:4] = box_to_z(box)
        return cls(mean, _P0.copy())

    def box(self) -> Box:
        return z_to_box(self.mean[:4])


def box_to_z(box: Box) -> np.ndarray:
    cx, cy = box.center
    return np.array([cx, cy, box.area, box.w / box.h])


def z_to_box(z) -> Box:
    area = max(z[2], MIN_AREA)
    aspect = max(z[3], 1e-6)
    w = math.sqrt(area * aspect)
    h = area / w
    return Box(z[0] - w / 2, z[1] - h / 2, w, h)


def predict(m: MotionState, process_noise: float = 1.0) -> MotionState:
    mean = _F @ m.mean
    if mean[2] <= 0:
        mean[2] = MIN_AREA
        mean[6] = 0.0
    cov = _F @ m.covariance @ _F.T + _Q_BASE * process_noise
    return MotionState(mean, cov)


def update(m: MotionState, z: Box, measurement_noise: float = 1.0) -> MotionState:
    zv = box_to_z(z)
    P = m.covariance
    PHt = P[:, :4]
    S = P[:4, :4] + _R_BASE * measurement_noise
    # S is symmetric positive definite for any valid state: Cholesky solve
    _, Kt, info = lapack.dposv(S, PHt.T)
    if info != 0 or not math.isfinite(float(Kt.sum())):
        raise ConfigError("singular innovation covariance, Kalman gain undefined")
    K = Kt.T
    mean = m.mean + K @ (zv - m.mean[:4])
    cov = P - K @ PHt.T
    cov = (cov + cov.T) / 2
    if mean[2] <= 0:
        mean[2] = MIN_AREA
    if mean[3] <= 0:
        mean[3] = zv[3]
    return MotionState(mean, cov)


def assign(track_boxes, det_boxes, iou_gate: float):
    """Max-total-IoU one-to-one matching restricted to pairs with IoU >= gate.

    Returns (matches, unmatched_tracks, unmatched_dets) as lists of indices.
    """
    n, m = len(track_boxes), len(det_boxes)
    if n == 0 or m == 0:
        return [], list(range(n)), list(range(m))
    if n * m <= 4 and not isinstance(track_boxes, np.ndarray) and not isinstance(det_boxes, np.ndarray):
        ious = np.array([[iou(t, d) for d in det_boxes] for t in track_boxes])
        return assign_from_scores(ious, iou_gate)
    ious = iou_matrix(_as_array(track_boxes), _as_array(det_boxes))
    return assign_from_scores(ious, iou_gate)


def assign_from_scores(scores: np.ndarray, gate: float):
    """Maximum-weight matching on a score matrix, ignoring entries below gate."""
    n, m = scores.shape
    if n == 0 or m == 0:
        return [], list(range(n)), list(range(m))
    if n == 1 and m == 1:
        if scores[0, 0] >= gate:
            return [(0, 0)], [], []
        return [], [0], [0]
    weights = np.where(scores >= gate, scores, 0.0)
    rows, cols = linear_sum_assignment(weights, maximize=True)
    matches = [(int(r), int(c)) for r, c in zip(rows, cols)
               if scores[r, c] >= gate and weights[r, c] > 0]
    matched_r = {r for r, _ in matches}
    matched_c = {c for _, c in matches}
    return (matches,
            [i for i in range(n) if i not in matched_r],
            [j for j in range(m) if j not in matched_c])


def _as_array(boxes) -> np.ndarray:
    if isinstance(boxes, np.ndarray):
        return boxes
    return np.array([[b.x, b.y, b.w, b.h] for b in boxes], dtype=float).reshape(-1, 4)


@dataclass
class Track:
    id: int
    motion: MotionState
    class_scores_sum: dict[str, float] = field(default_factory=dict)
    observations: list[tuple[int, Detection]] = field(default_factory=list)
    misses: int = 0
    hits: int = 0

    @property
    def first_frame(self) -> int:
        return self.observations[0][0]

    @property
    def last_frame(self) -> int:
        return self.observations[-1][0]

    def frames(self) -> list[int]:
        return [f for f, _ in self.observations]

    def _observe(self, det: Detection) -> None:
        self.observations.append((det.frame_idx, det))
        for cls, p in det.scores.items():
            self.class_scores_sum[cls] = self.class_scores_sum.get(cls, 0.0) + p
        self.hits += 1
        self.misses = 0


class Tracker:
    """One instance per camera stream; calls to :meth:`step` must be serialized."""

    def __init__(self, params: TrackerParams | None = None):
        self.params = params or TrackerParams()
        self.live: list[Track] = []
        self.done: list[Track] = []
        self._next_id = 1
        self._last_frame: int | None = None

    def step(self, frame_idx: int, dets: list[Detection]) -> list[Track]:
        """Advance to ``frame_idx`` and associate ``dets``; returns live tracks."""
        if self._last_frame is not None and frame_idx <= self._last_frame:
            raise OrderError(f"frame {frame_idx} after frame {self._last_frame}")
        elapsed = 1 if self._last_frame is None else frame_idx - self._last_frame
        self._last_frame = frame_idx
        p = self.params

        for trk in self.live:
            for _ in range(elapsed):
                trk.motion = predict(trk.motion, p.process_noise)
            # skipped frames count as misses
            trk.misses += elapsed - 1
        self._retire()

        track_boxes = [t.motion.box() for t in self.live]
        matches, unmatched_t, unmatched_d = assign(track_boxes, [d.box for d in dets], p.iou_gate)
        for ti, dj in matches:
            trk = self.live[ti]
            trk.motion = update(trk.motion, dets[dj].box, p.measurement_noise)
            trk._observe(dets[dj])
        for ti in unmatched_t:
            self.live[ti].misses += 1
        for dj in unmatched_d:
            trk = Track(self._next_id, MotionState.from_box(dets[dj].box))
            self._next_id += 1
            trk._observe(dets[dj])
            self.live.append(trk)

        self._retire()
        return list(self.live)

    def _retire(self) -> None:
        still = []
        for trk in self.live:
            (self.done if trk.misses > self.params.max_age else still).append(trk)
        self.live = still

    def finalize(self) -> list[Track]:
        tracks = [t for t in self.done + self.live if t.hits >= self.params.min_hits]
        return sorted(tracks, key=lambda t: (t.first_frame, t.id))


def track_clip(dets: list[Detection], params: TrackerParams | None = None) -> list[Track]:
    """Run a fresh tracker over one clip's detections."""
    tracker = Tracker(params)
    by_frame: dict[int, list[Detection]] = {}
    for d in dets:
        by_frame.setdefault(d.frame_idx, []).append(d)
    for f in sorted(by_frame):
        tracker.step(f, by_frame[f])
    return tracker.finalize()
