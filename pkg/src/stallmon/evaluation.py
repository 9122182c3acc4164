"""Event-level evaluation with temporal IoU.

Predicted and ground-truth events are matched one-to-one within each
(clip, class) group, only between events with the same state label (unless
``state_blind``), maximising total t-IoU. Leftovers are classified into false
positives, false negatives and state-label mismatches; matched pairs with
t-IoU < 1 are temporal shifts.
"""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .events import Event
from .tracking import assign_from_scores

DEFAULT_THRESHOLD = 0.5
THRESHOLD_SWEEP = (0.3, 0.5, 0.7)


def t_iou(a: tuple[float, float], b: tuple[float, float]) -> float:
    inter = min(a[1], b[1]) - max(a[0], b[0])
    if inter <= 0:
        return 0.0
    union = (a[1] - a[0]) + (b[1] - b[0]) - inter
    return inter / union


def _span(ev: Event) -> tuple[float, float]:
    return (ev.start_s, ev.end_s)


@dataclass(frozen=True)
class EventMatch:
    pred: Event
    gt: Event
    t_iou: float


@dataclass(frozen=True)
class ErrorEntry:
    kind: str  # false_positive | false_negative | temporal_shift | state_mismatch
    clip_id: str
    cls: str
    pred: Event | None = None
    gt: Event | None = None
    t_iou: float = 0.0
    start_delta: float = 0.0
    end_delta: float = 0.0

    def to_dict(self) -> dict:
        def ev(e):
            return None if e is None else [e.start_s, e.end_s, e.state.value]
        return {"kind": self.kind, "clip_id": self.clip_id, "class": self.cls,
                "pred": ev(self.pred), "gt": ev(self.gt), "t_iou": self.t_iou,
                "start_delta": self.start_delta, "end_delta": self.end_delta}


@dataclass
class ClassMetrics:
    precision: float
    recall: float
    f1: float
    mean_t_iou: float
    n_pred: int
    n_gt: int
    n_match: int


@dataclass
class EvalReport:
    threshold: float
    matches: list[EventMatch] = field(default_factory=list)
    unmatched_pred: list[Event] = field(default_factory=list)
    unmatched_gt: list[Event] = field(default_factory=list)
    errors: list[ErrorEntry] = field(default_factory=list)
    metrics: dict[str, ClassMetrics] = field(default_factory=dict)
    groups: list[tuple[str, str]] = field(default_factory=list)

    @property
    def temporal_shift_flags(self) -> list[ErrorEntry]:
        return [e for e in self.errors if e.kind == "temporal_shift"]

    def errors_for(self, clip_id: str, cls: str) -> list[ErrorEntry]:
        return [e for e in self.errors if e.clip_id == clip_id and e.cls == cls]

    def fully_correct(self, clip_id: str, cls: str) -> bool:
        return not self.errors_for(clip_id, cls)

    def to_dict(self) -> dict:
        return {
            "threshold": self.threshold,
            "n_matches": len(self.matches),
            "n_unmatched_pred": len(self.unmatched_pred),
            "n_unmatched_gt": len(self.unmatched_gt),
            "metrics": {c: vars(m) for c, m in self.metrics.items()},
            "errors": [e.to_dict() for e in self.errors],
            "fully_correct": [{"clip_id": c, "class": k, "ok": self.fully_correct(c, k)}
                              for c, k in self.groups],
        }


def match_events(pred: Sequence[Event], gt: Sequence[Event], threshold: float = DEFAULT_THRESHOLD,
                 state_blind: bool = False):
    """Optimal one-to-one matching of one (clip, class) group.

    Returns (matches, unmatched_pred, unmatched_gt).
    """
    scores = np.zeros((len(pred), len(gt)))
    for i, p in enumerate(pred):
        for j, g in enumerate(gt):
            if p.cls == g.cls and (state_blind or p.state == g.state):
                scores[i, j] = t_iou(_span(p), _span(g))
    # a zero-overlap pair can never be a match, even at threshold 0
    pairs, rest_p, rest_g = assign_from_scores(scores, max(threshold, 1e-12))
    matches = [EventMatch(pred[i], gt[j], float(scores[i, j])) for i, j in pairs]
    return matches, [pred[i] for i in rest_p], [gt[j] for j in rest_g]


def metrics(n_pred: int, n_gt: int, matches: Sequence[EventMatch]) -> ClassMetrics:
    k = len(matches)
    precision = k / n_pred if n_pred else (1.0 if n_gt == 0 else 0.0)
    recall = k / n_gt if n_gt else (1.0 if n_pred == 0 else 0.0)
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    mean = float(np.mean([m.t_iou for m in matches])) if matches else 0.0
    return ClassMetrics(precision, recall, f1, mean, n_pred, n_gt, k)


def error_report(matches: Sequence[EventMatch], unmatched_pred: Sequence[Event],
                 unmatched_gt: Sequence[Event], threshold: float = DEFAULT_THRESHOLD) -> list[ErrorEntry]:
    """Label a group's diff with the error taxonomy.

    Leftover pred/GT pairs that overlap with t-IoU >= threshold but carry
    different states are reported once as ``state_mismatch`` instead of as a
    false positive plus a false negative.
    """
    out = []
    for m in matches:
        if m.t_iou < 1.0:
            out.append(ErrorEntry("temporal_shift", m.gt.clip_id, m.gt.cls, m.pred, m.gt, m.t_iou,
                                  m.pred.start_s - m.gt.start_s, m.pred.end_s - m.gt.end_s))
    scores = np.array([[t_iou(_span(p), _span(g)) if p.cls == g.cls else 0.0
                        for g in unmatched_gt] for p in unmatched_pred]).reshape(
        len(unmatched_pred), len(unmatched_gt))
    pairs, rest_p, rest_g = assign_from_scores(scores, max(threshold, 1e-12))
    for i, j in pairs:
        p, g = unmatched_pred[i], unmatched_gt[j]
        out.append(ErrorEntry("state_mismatch", g.clip_id, g.cls, p, g, float(scores[i, j]),
                              p.start_s - g.start_s, p.end_s - g.end_s))
    for i in rest_p:
        p = unmatched_pred[i]
        out.append(ErrorEntry("false_positive", p.clip_id, p.cls, pred=p))
    for j in rest_g:
        g = unmatched_gt[j]
        out.append(ErrorEntry("false_negative", g.clip_id, g.cls, gt=g))
    order = {"false_negative": 0, "false_positive": 1, "state_mismatch": 2, "temporal_shift": 3}
    out.sort(key=lambda e: (min(x.start_s for x in (e.pred, e.gt) if x is not None), order[e.kind]))
    return out


def _group(events: Iterable[Event]) -> dict[tuple[str, str], list[Event]]:
    groups: dict[tuple[str, str], list[Event]] = defaultdict(list)
    for ev in events:
        groups[(ev.clip_id, ev.cls)].append(ev)
    for evs in groups.values():
        evs.sort(key=lambda e: e.start_s)
    return groups


def evaluate(pred: Iterable[Event], gt: Iterable[Event], threshold: float = DEFAULT_THRESHOLD,
             state_blind: bool = False) -> EvalReport:
    pg, gg = _group(pred), _group(gt)
    report = EvalReport(threshold)
    per_class: dict[str, list] = defaultdict(lambda: [0, 0, []])
    for key in sorted(set(pg) | set(gg)):
        p, g = pg.get(key, []), gg.get(key, [])
        matches, up, ug = match_events(p, g, threshold, state_blind)
        report.groups.append(key)
        report.matches += matches
        report.unmatched_pred += up
        report.unmatched_gt += ug
        report.errors += error_report(matches, up, ug, threshold)
        acc = per_class[key[1]]
        acc[0] += len(p)
        acc[1] += len(g)
        acc[2] += matches
    report.metrics = {c: metrics(*acc) for c, acc in sorted(per_class.items())}
    return report


def sweep(pred: Sequence[Event], gt: Sequence[Event], thresholds=THRESHOLD_SWEEP,
          state_blind: bool = False) -> dict[float, EvalReport]:
    return {t: evaluate(pred, gt, t, state_blind) for t in thresholds}


def _fmt_events(events: Sequence[Event]) -> list[str]:
    def num(x):
        return f"{int(x):02d}" if float(x).is_integer() else f"{x:g}"
    return [f"{num(e.start_s)}, {num(e.end_s)}, {e.state.value}" for e in events]


def render_table(pred: Iterable[Event], gt: Iterable[Event], report: EvalReport) -> str:
    """Plain-text side-by-side diff, one block per (clip, class)."""
    pg, gg = _group(pred), _group(gt)
    lines = []
    for clip_id, cls in report.groups:
        p, g = pg.get((clip_id, cls), []), gg.get((clip_id, cls), [])
        errs = report.errors_for(clip_id, cls)
        status = "ok" if not errs else f"{len(errs)} error(s)"
        lines.append(f"== clip {clip_id} / {cls}: {status}")
        left, right = _fmt_events(p), _fmt_events(g)
        width = max([len(s) for s in left] + [len("predicted")])
        lines.append(f"  {'predicted'.ljust(width)} | ground truth")
        for i in range(max(len(left), len(right))):
            a = left[i] if i < len(left) else ""
            b = right[i] if i < len(right) else ""
            lines.append(f"  {a.ljust(width)} | {b}")
        for e in errs:
            detail = f" t-IoU={e.t_iou:.3f}" if e.kind in ("temporal_shift", "state_mismatch") else ""
            if e.kind == "temporal_shift":
                detail += f" start {e.start_delta:+g}s end {e.end_delta:+g}s"
            ref = e.gt or e.pred
            lines.append(f"  - {e.kind}: {_fmt_events([ref])[0]}{detail}")
    return "\n".join(lines)
