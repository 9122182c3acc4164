import itertools
import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from stallmon.evaluation import (evaluate, match_events, metrics, render_table, sweep, t_iou)
from stallmon.events import Event, FrameState as FS

intervals = st.tuples(st.integers(0, 59), st.integers(1, 60)).filter(lambda t: t[0] < t[1])


def test_t_iou_examples():
    assert t_iou((3, 9), (3, 9)) == 1.0
    assert t_iou((0, 2), (5, 9)) == 0.0
    assert t_iou((0, 10), (5, 15)) == pytest.approx(1 / 3)


@given(intervals, intervals)
def test_t_iou_properties(a, b):
    v = t_iou(a, b)
    assert v == t_iou(b, a)
    assert 0.0 <= v <= 1.0
    assert (v == 1.0) == (a == b)


def ev(a, b, state=FS.INSIDE_VISIBLE, cls="person", clip="c"):
    return Event(cls, state, float(a), float(b), clip)


def test_match_examples():
    [m], up, ug = match_events([ev(54, 57)], [ev(54, 57)])
    assert m.t_iou == 1.0 and not up and not ug
    matches, up, ug = match_events([ev(48, 54, FS.OUTSIDE_INVISIBLE)], [ev(48, 54, FS.INSIDE_INVISIBLE)])
    assert matches == [] and len(up) == len(ug) == 1
    matches, up, ug = match_events([], [ev(0, 60)])
    assert matches == [] and up == [] and len(ug) == 1


def test_state_blind_mode():
    p, g = [ev(48, 54, FS.OUTSIDE_INVISIBLE)], [ev(48, 54, FS.INSIDE_INVISIBLE)]
    assert len(match_events(p, g, state_blind=True)[0]) == 1


def brute_force_total(pred, gt, threshold):
    # try every injective map from the shorter side into the longer one
    short, long_, flip = (pred, gt, False) if len(pred) <= len(gt) else (gt, pred, True)
    best = 0.0
    for perm in itertools.permutations(range(len(long_)), len(short)):
        total = 0.0
        for i, j in enumerate(perm):
            p, g = (long_[j], short[i]) if flip else (short[i], long_[j])
            v = t_iou((p.start_s, p.end_s), (g.start_s, g.end_s))
            if p.state == g.state and v >= threshold and v > 0:
                total += v
        best = max(best, total)
    return best


def random_events(rng, n):
    states = [FS.INSIDE_VISIBLE, FS.OUTSIDE_INVISIBLE]
    out = []
    for _ in range(n):
        a = int(rng.integers(0, 55))
        out.append(ev(a, a + int(rng.integers(1, 15)), states[rng.integers(0, 2)]))
    return out


def test_matching_matches_brute_force():
    rng = np.random.default_rng(5)
    for _ in range(300):
        pred, gt = random_events(rng, rng.integers(0, 7)), random_events(rng, rng.integers(0, 7))
        thr = float(rng.choice([0.0, 0.3, 0.5, 0.7]))
        matches, up, ug = match_events(pred, gt, thr)
        assert len(matches) + len(up) == len(pred)
        assert len(matches) + len(ug) == len(gt)
        assert all(m.t_iou >= thr and m.pred.state == m.gt.state for m in matches)
        assert sum(m.t_iou for m in matches) == pytest.approx(brute_force_total(pred, gt, thr))


def test_metrics_examples():
    gt = [ev(0, 10), ev(10, 60, FS.OUTSIDE_INVISIBLE)]
    m = evaluate(gt, gt).metrics["person"]
    assert (m.precision, m.recall, m.f1, m.mean_t_iou) == (1, 1, 1, 1)
    m = metrics(0, 3, [])
    assert m.recall == 0 and m.precision == 0
    m = metrics(0, 0, [])
    assert m.precision == m.recall == 1.0


def test_identical_streams_have_no_errors():
    gt = [ev(0, 10), ev(10, 60, FS.OUTSIDE_INVISIBLE)]
    assert evaluate(gt, gt).errors == []


def test_temporal_shift_deltas():
    report = evaluate([ev(0, 4, FS.OUTSIDE_INVISIBLE), ev(4, 6)], [ev(0, 2, FS.OUTSIDE_INVISIBLE), ev(2, 6)])
    shifts = report.temporal_shift_flags
    assert [(e.start_delta, e.end_delta) for e in shifts] == [(0, 2), (2, 0)]


# -- reference videos ----------------------------------------------------

def all_events(ref_videos, key):
    return [e for v in ref_videos.values() for e in v[key]]


def test_reference_video10_boundary_match(ref_videos):
    v = ref_videos[10]
    pred = [e for e in v["pred"] if e.cls == "person"]
    gt = [e for e in v["gt"] if e.cls == "person"]
    matches, _, _ = match_events(pred, gt, 0.5)
    inside = [m for m in matches if m.gt.state is FS.INSIDE_VISIBLE]
    assert len(inside) == 1 and inside[0].t_iou == 0.5


def test_reference_fully_correct_counts(ref_videos):
    report = evaluate(all_events(ref_videos, "pred"), all_events(ref_videos, "gt"))
    person_ok = [n for n, v in ref_videos.items() if report.fully_correct(v["clip_id"], "person")]
    horse_ok = [n for n, v in ref_videos.items() if report.fully_correct(v["clip_id"], "horse")]
    assert person_ok == [4, 9]
    assert horse_ok == list(range(1, 11))


def test_reference_error_labels(ref_videos):
    report = evaluate(all_events(ref_videos, "pred"), all_events(ref_videos, "gt"))
    v2 = [(e.kind, e.gt.start_s, e.gt.end_s, e.gt.state) for e in report.errors_for("video-02", "person")
          if e.gt is not None]
    assert ("false_negative", 5.0, 7.0, FS.OUTSIDE_VISIBLE) in v2
    [v1] = report.errors_for("video-01", "person")
    assert v1.kind == "state_mismatch"
    assert (v1.gt.start_s, v1.gt.end_s) == (48.0, 54.0)
    assert (v1.pred.state, v1.gt.state) == (FS.OUTSIDE_INVISIBLE, FS.INSIDE_INVISIBLE)


def test_sweep_and_report(ref_videos):
    pred, gt = all_events(ref_videos, "pred"), all_events(ref_videos, "gt")
    reports = sweep(pred, gt)
    assert list(reports) == [0.3, 0.5, 0.7]
    recalls = [r.metrics["person"].recall for r in reports.values()]
    assert recalls == sorted(recalls, reverse=True)
    payload = json.loads(json.dumps(reports[0.5].to_dict()))
    assert payload["metrics"]["horse"]["f1"] == 1.0
    text = render_table(pred, gt, reports[0.5])
    assert "00, 47, outside_invisible" in text


@given(st.lists(intervals, max_size=6), st.lists(intervals, max_size=6))
def test_report_cardinalities(p, g):
    pred = [ev(a, b) for a, b in p]
    gt = [ev(a, b) for a, b in g]
    r = evaluate(pred, gt)
    assert len(r.matches) + len(r.unmatched_pred) == len(pred)
    assert len(r.matches) + len(r.unmatched_gt) == len(gt)
    kinds = [e.kind for e in r.errors]
    # every leftover is reported exactly once, alone or inside a state_mismatch pair
    assert kinds.count("false_positive") + kinds.count("state_mismatch") == len(r.unmatched_pred)
    assert kinds.count("false_negative") + kinds.count("state_mismatch") == len(r.unmatched_gt)
