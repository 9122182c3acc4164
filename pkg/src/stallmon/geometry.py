"""Box, polygon and segment primitives in continuous pixel coordinates.

Origin is the top-left corner of the image, y grows downward.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ConfigError

EPS = 1e-9
EDGES = ("left", "right", "top", "bottom")

Point = tuple[float, float]


@dataclass(frozen=True, slots=True)
class Box:
    x: float
    y: float
    w: float
    h: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)
                and math.isfinite(self.w) and math.isfinite(self.h)):
            raise ValueError(f"non-finite box {self}")
        if self.w <= 0 or self.h <= 0:
            raise ValueError(f"box must have positive size, got w={self.w} h={self.h}")

    @property
    def x2(self) -> float:
        return self.x + self.w

    @property
    def y2(self) -> float:
        return self.y + self.h

    @property
    def area(self) -> float:
        return self.w * self.h

    @property
    def center(self) -> Point:
        return (self.x + self.w / 2, self.y + self.h / 2)

    @property
    def bottom_center(self) -> Point:
        return (self.x + self.w / 2, self.y + self.h)

    def translate(self, dx: float, dy: float) -> Box:
        return Box(self.x + dx, self.y + dy, self.w, self.h)

    @classmethod
    def from_xyxy(cls, x1, y1, x2, y2) -> Box:
        return cls(x1, y1, x2 - x1, y2 - y1)


@dataclass(frozen=True, slots=True)
class FrameDims:
    width: float
    height: float

    def __post_init__(self):
        if not (self.width > 0 and self.height > 0):
            raise ConfigError(f"frame dims must be positive, got {self.width}x{self.height}")


@dataclass(frozen=True, slots=True)
class Segment:
    a: Point
    b: Point

    def __post_init__(self):
        if math.dist(self.a, self.b) <= EPS:
            raise ConfigError(f"degenerate segment {self.a} -> {self.b}")


def signed_area(vertices: Sequence[Point]) -> float:
    """Shoelace area; positive for counter-clockwise order in y-up axes."""
    n = len(vertices)
    s = 0.0
    for i in range(n):
        x1, y1 = vertices[i]
        x2, y2 = vertices[(i + 1) % n]
        s += x1 * y2 - x2 * y1
    return s / 2


def _orient(p, q, r) -> float:
    return (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0])


def _on_segment(p, q, r) -> bool:
    # r collinear with p-q; is it within the bounding box of p-q
    return (min(p[0], q[0]) - EPS <= r[0] <= max(p[0], q[0]) + EPS
            and min(p[1], q[1]) - EPS <= r[1] <= max(p[1], q[1]) + EPS)


def segments_intersect(p1, p2, q1, q2) -> bool:
    d1 = _orient(q1, q2, p1)
    d2 = _orient(q1, q2, p2)
    d3 = _orient(p1, p2, q1)
    d4 = _orient(p1, p2, q2)
    if ((d1 > EPS and d2 < -EPS) or (d1 < -EPS and d2 > EPS)) and \
            ((d3 > EPS and d4 < -EPS) or (d3 < -EPS and d4 > EPS)):
        return True
    if abs(d1) <= EPS and _on_segment(q1, q2, p1):
        return True
    if abs(d2) <= EPS and _on_segment(q1, q2, p2):
        return True
    if abs(d3) <= EPS and _on_segment(p1, p2, q1):
        return True
    if abs(d4) <= EPS and _on_segment(p1, p2, q2):
        return True
    return False


def is_simple(vertices: Sequence[Point]) -> bool:
    """True if no two non-adjacent edges touch (O(n^2), n is small)."""
    n = len(vertices)
    edges = [(vertices[i], vertices[(i + 1) % n]) for i in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            if j == i + 1 or (i == 0 and j == n - 1):
                continue
            if segments_intersect(*edges[i], *edges[j]):
                return False
    return True


@dataclass(frozen=True)
class Polygon:
    vertices: tuple[Point, ...]

    def __post_init__(self):
        verts = tuple((float(x), float(y)) for x, y in self.vertices)
        object.__setattr__(self, "vertices", verts)
        if len(verts) < 3:
            raise ConfigError(f"polygon needs at least 3 vertices, got {len(verts)}")
        if abs(signed_area(verts)) <= EPS:
            raise ConfigError("polygon has zero area")
        if not is_simple(verts):
            raise ConfigError("polygon is self-intersecting")

    @property
    def area(self) -> float:
        return abs(signed_area(self.vertices))

    def bounds(self) -> tuple[float, float, float, float]:
        xs = [v[0] for v in self.vertices]
        ys = [v[1] for v in self.vertices]
        return min(xs), min(ys), max(xs), max(ys)

    def translate(self, dx: float, dy: float) -> Polygon:
        return Polygon(tuple((x + dx, y + dy) for x, y in self.vertices))

    def contains_points(self, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
        """Even-odd ray casting, vectorised over query points."""
        inside = np.zeros(np.shape(xs), dtype=bool)
        verts = self.vertices
        n = len(verts)
        for i in range(n):
            x1, y1 = verts[i]
            x2, y2 = verts[(i + 1) % n]
            if y1 == y2:
                continue
            crosses = (y1 > ys) != (y2 > ys)
            x_at = x1 + (ys - y1) * (x2 - x1) / (y2 - y1)
            inside ^= crosses & (xs < x_at)
        return inside


def iou(a: Box, b: Box) -> float:
    iw = min(a.x2, b.x2) - max(a.x, b.x)
    ih = min(a.y2, b.y2) - max(a.y, b.y)
    if iw <= 0 or ih <= 0:
        return 0.0
    inter = iw * ih
    return min(1.0, inter / (a.area + b.area - inter))


def iou_matrix(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Pairwise IoU for (N, 4) and (M, 4) arrays of x, y, w, h."""
    a = np.asarray(a, dtype=float).reshape(-1, 4)
    b = np.asarray(b, dtype=float).reshape(-1, 4)
    ax2 = a[:, 0] + a[:, 2]
    ay2 = a[:, 1] + a[:, 3]
    bx2 = b[:, 0] + b[:, 2]
    by2 = b[:, 1] + b[:, 3]
    iw = np.minimum(ax2[:, None], bx2[None, :]) - np.maximum(a[:, 0][:, None], b[:, 0][None, :])
    ih = np.minimum(ay2[:, None], by2[None, :]) - np.maximum(a[:, 1][:, None], b[:, 1][None, :])
    inter = np.maximum(iw, 0.0) * np.maximum(ih, 0.0)
    union = (a[:, 2] * a[:, 3])[:, None] + (b[:, 2] * b[:, 3])[None, :] - inter
    return np.minimum(inter / union, 1.0)


def clip_polygon_to_box(vertices: Sequence[Point], box: Box) -> list[Point]:
    """Sutherland-Hodgman clip of any simple polygon against an axis-aligned box.

    The clip window is convex, so the result has the correct area even for a
    concave subject (it may contain zero-width bridges along the box border).
    """
    out = list(vertices)
    # each half-plane: (axis, bound, keep_greater)
    for axis, bound, keep_ge in ((0, box.x, True), (0, box.x2, False),
                                 (1, box.y, True), (1, box.y2, False)):
        if not out:
            break
        src, out = out, []
        n = len(src)
        for i in range(n):
            cur = src[i]
            prev = src[i - 1]
            cur_in = cur[axis] >= bound if keep_ge else cur[axis] <= bound
            prev_in = prev[axis] >= bound if keep_ge else prev[axis] <= bound
            if cur_in != prev_in:
                t = (bound - prev[axis]) / (cur[axis] - prev[axis])
                cross = (prev[0] + t * (cur[0] - prev[0]), prev[1] + t * (cur[1] - prev[1]))
                cross_list = list(cross)
                cross_list[axis] = bound
                out.append(tuple(cross_list))
            if cur_in:
                out.append(cur)
    return out


def overlap_ratio(b: Box, p: Polygon) -> float:
    """area(b ∩ p) / area(b)."""
    px1, py1, px2, py2 = p.bounds()
    if b.x >= px2 or b.x2 <= px1 or b.y >= py2 or b.y2 <= py1:
        return 0.0
    clipped = clip_polygon_to_box(p.vertices, b)
    if len(clipped) < 3:
        return 0.0
    return min(1.0, abs(signed_area(clipped)) / b.area)


def box_polygon_intersects(b: Box, p: Polygon, min_area_ratio: float = 0.0) -> bool:
    if not 0.0 <= min_area_ratio < 1.0:
        raise ConfigError(f"min_area_ratio must be in [0, 1), got {min_area_ratio}")
    return overlap_ratio(b, p) > min_area_ratio


def dist_to_segment(pt: Point, s: Segment) -> float:
    (ax, ay), (bx, by) = s.a, s.b
    dx, dy = bx - ax, by - ay
    t = ((pt[0] - ax) * dx + (pt[1] - ay) * dy) / (dx * dx + dy * dy)
    t = min(1.0, max(0.0, t))
    return math.hypot(pt[0] - (ax + t * dx), pt[1] - (ay + t * dy))


def touches_frame_edge(b: Box, f: FrameDims, margin: float = 0.0) -> set[str]:
    if margin < 0:
        raise ValueError("margin must be non-negative")
    edges = set()
    if b.x <= margin:
        edges.add("left")
    if b.x2 >= f.width - margin:
        edges.add("right")
    if b.y <= margin:
        edges.add("top")
    if b.y2 >= f.height - margin:
        edges.add("bottom")
    return edges


def clamp_box(b: Box, f: FrameDims) -> Box | None:
    """Clip a box to the frame; None if nothing with positive area remains."""
    if b.x >= 0 and b.y >= 0 and b.x2 <= f.width and b.y2 <= f.height:
        return b
    x1 = min(max(b.x, 0.0), f.width)
    y1 = min(max(b.y, 0.0), f.height)
    x2 = min(max(b.x2, 0.0), f.width)
    y2 = min(max(b.y2, 0.0), f.height)
    if x2 - x1 <= EPS or y2 - y1 <= EPS:
        return None
    return Box(x1, y1, x2 - x1, y2 - y1)
