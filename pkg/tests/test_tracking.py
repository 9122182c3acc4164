import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from stallmon.errors import ConfigError, OrderError
from stallmon.geometry import Box, iou
from stallmon.tracking import (Detection, MotionState, Tracker, TrackerParams, assign,
                               assign_from_scores, box_to_z, predict, track_clip, update)

SCORES = {"horse": 0.9, "person": 0.1}


def det(f, x, y, w=100.0, h=80.0, scores=SCORES):
    return Detection(f, Box(x, y, w, h), scores)


# -- textbook filter, written out independently of the engine --------------

Q = np.diag([1.0, 1.0, 1.0, 1.0, 0.01, 0.01, 1e-4])
R = np.diag([1.0, 1.0, 10.0, 10.0])
P0 = np.diag([10.0, 10.0, 10.0, 10.0, 1e4, 1e4, 1e4])
F = np.eye(7)
F[0, 4] = F[1, 5] = F[2, 6] = 1.0
H = np.eye(4, 7)


def textbook(zs):
    x = np.r_[zs[0], 0, 0, 0]
    P = P0.copy()
    for z in zs[1:]:
        x, P = F @ x, F @ P @ F.T + Q
        K = P @ H.T @ np.linalg.inv(H @ P @ H.T + R)
        x = x + K @ (z - H @ x)
        P = (np.eye(7) - K @ H) @ P
    return F @ x


def test_predict_examples():
    m = MotionState.from_box(Box(100, 100, 50, 40))
    assert np.array_equal(predict(m).mean[:4], m.mean[:4])
    m.mean[4] = 10.0
    assert predict(m).mean[0] == m.mean[0] + 10.0


def test_predict_clamps_area():
    m = MotionState.from_box(Box(0, 0, 2, 2))
    m.mean[6] = -50.0
    p = predict(m)
    assert p.mean[2] == 1.0 and p.mean[6] == 0.0


def test_update_examples():
    m = predict(MotionState.from_box(Box(100, 100, 50, 40)))
    u = update(m, m.box())
    assert u.mean == pytest.approx(m.mean, rel=1e-12, abs=1e-9)
    far = update(m, Box(300, 300, 60, 50), measurement_noise=1e12)
    assert np.linalg.norm(far.mean - m.mean) <= 1e-6 * np.linalg.norm(m.mean)


def test_constant_velocity_recursion():
    boxes = [Box(100 + 10 * k, 200, 80, 60) for k in range(5)]
    m = MotionState.from_box(boxes[0])
    for b in boxes[1:]:
        m = update(predict(m), b)
    nxt = predict(m)
    assert nxt.mean[0] > boxes[-1].center[0]
    expected = textbook([box_to_z(b) for b in boxes])
    assert nxt.mean == pytest.approx(expected, rel=1e-9, abs=1e-9)


ops = st.lists(st.tuples(st.booleans(), st.floats(0, 1000), st.floats(0, 600),
                         st.floats(5, 300), st.floats(5, 300)), max_size=30)


@given(ops)
def test_covariance_stays_psd(seq):
    m = MotionState.from_box(Box(500, 300, 100, 100))
    for is_update, x, y, w, h in seq:
        m = update(m, Box(x, y, w, h)) if is_update else predict(m)
        assert np.array_equal(m.covariance, m.covariance.T)
        assert np.linalg.eigvalsh(m.covariance).min() >= -1e-9 * max(1.0, np.abs(m.covariance).max())
        assert m.mean[2] > 0 and m.mean[3] > 0


# -- assignment ------------------------------------------------------------

def brute_force_total(ious, gate):
    n, m = ious.shape
    k = max(n, m)
    w = np.zeros((k, k))
    w[:n, :m] = np.where(ious >= gate, ious, 0.0)
    return max(sum(w[i, p[i]] for i in range(k)) for p in itertools.permutations(range(k)))


def random_boxes(rng, n):
    xy = rng.uniform(0, 100, (n, 2))
    wh = rng.uniform(20, 60, (n, 2))
    return [Box(*xy[i], *wh[i]) for i in range(n)]


def check_assign(tb, db, gate):
    matches, ut, ud = assign(tb, db, gate)
    ts = [t for t, _ in matches]
    ds = [d for _, d in matches]
    assert len(set(ts)) == len(ts) and len(set(ds)) == len(ds)
    assert sorted(ts + ut) == list(range(len(tb)))
    assert sorted(ds + ud) == list(range(len(db)))
    ious = np.array([[iou(t, d) for d in db] for t in tb]).reshape(len(tb), len(db))
    assert all(ious[t, d] >= gate for t, d in matches)
    total = sum(ious[t, d] for t, d in matches)
    if tb and db:
        assert total == pytest.approx(brute_force_total(ious, gate), abs=1e-9)


def test_assign_examples():
    scores = np.array([[0.9, 0.1], [0.2, 0.8]])
    assert assign_from_scores(scores, 0.3) == ([(0, 0), (1, 1)], [], [])
    assert brute_force_total(scores, 0.3) == pytest.approx(1.7)
    a, b = Box(0, 0, 10, 10), Box(100, 0, 10, 10)
    assert assign([a, b], [Box(1, 0, 10, 10), Box(101, 1, 10, 10)], 0.3)[0] == [(0, 0), (1, 1)]
    assert assign([a, b], [], 0.3) == ([], [0, 1], [])
    low = Box(6, 0, 10, 10)  # iou 4/16 = 0.25
    assert iou(a, low) == pytest.approx(0.25)
    assert assign([a], [low], 0.3) == ([], [0], [0])


def test_assign_matches_brute_force():
    rng = np.random.default_rng(1)
    for _ in range(300):
        n, m = rng.integers(0, 7, 2)
        check_assign(random_boxes(rng, n), random_boxes(rng, m), float(rng.uniform(0.05, 0.6)))


# -- lifecycle -------------------------------------------------------------

def test_step_genesis_and_continuation():
    tr = Tracker()
    live = tr.step(0, [det(0, 10, 10)])
    assert [(t.id, t.hits) for t in live] == [(1, 1)]
    live = tr.step(1, [det(1, 10, 10)])
    assert [(t.id, t.hits, t.misses) for t in live] == [(1, 2, 0)]


def test_step_rejects_non_monotonic():
    tr = Tracker()
    tr.step(3, [])
    with pytest.raises(OrderError):
        tr.step(3, [])


@pytest.mark.parametrize("absent, same_id", [(5, True), (6, False)])
def test_absence_beyond_max_age_starts_new_track(absent, same_id):
    # seen at frames 0, 1; absent for `absent` frames; back afterwards
    back = 2 + absent
    dets = [det(0, 10, 10), det(1, 10, 10), det(back, 10, 10)]
    tracks = track_clip(dets, TrackerParams(max_age=5))
    if same_id:
        assert [t.frames() for t in tracks] == [[0, 1, back]]
    else:
        assert [t.frames() for t in tracks] == [[0, 1], [back]]
        assert [t.id for t in tracks] == [1, 2]


def test_finalize():
    assert track_clip([]) == []
    tracks = track_clip([det(f, 10, 10) for f in range(60)])
    assert len(tracks) == 1 and tracks[0].frames() == list(range(60))
    short = [det(f, 10, 10) for f in range(3)] + [det(f, 600, 400) for f in range(10)]
    tracks = track_clip(short, TrackerParams(min_hits=5))
    assert [len(t.frames()) for t in tracks] == [10]


def test_params_validation():
    with pytest.raises(ConfigError):
        TrackerParams(iou_gate=1.0)
    with pytest.raises(ConfigError):
        TrackerParams(max_age=0)
    with pytest.raises(ConfigError):
        TrackerParams(min_hits=0)


def lanes_scenario(rng, k, n_frames=60):
    """k objects in separate horizontal lanes; each walks back and forth."""
    dets, owner = [], {}
    x0 = rng.uniform(50, 900, k)
    speed = rng.uniform(-15, 15, k)
    for f in range(n_frames):
        frame = []
        for i in range(k):
            x = x0[i] + speed[i] * f
            x = 1000 - abs((x % 2000) - 1000)  # bounce inside [0, 1000]
            frame.append((i, Detection(f, Box(x + 50, 20 + 140 * i, 120, 100), SCORES)))
        rng.shuffle(frame)
        for i, d in frame:
            owner[id(d)] = i
            dets.append(d)
    return dets, owner


def test_id_stability_separated_objects():
    rng = np.random.default_rng(11)
    for _ in range(20):
        k = int(rng.integers(1, 6))
        dets, owner = lanes_scenario(rng, k)
        tracks = track_clip(dets)
        assert len(tracks) == k
        for t in tracks:
            assert len({owner[id(d)] for _, d in t.observations}) == 1


def test_determinism():
    rng = np.random.default_rng(3)
    dets, _ = lanes_scenario(rng, 4)
    a, b = track_clip(dets), track_clip(dets)
    assert [t.frames() for t in a] == [t.frames() for t in b]
    for x, y in zip(a, b):
        assert np.array_equal(x.motion.mean, y.motion.mean)
        assert np.array_equal(x.motion.covariance, y.motion.covariance)


@settings(max_examples=50)
@given(st.lists(st.tuples(st.integers(0, 59), st.floats(0, 1100), st.floats(0, 600)), max_size=40))
def test_observations_strictly_increasing(raw):
    dets = [det(f, x, y) for f, x, y in raw]
    seen_ids = set()
    for t in track_clip(dets):
        fr = t.frames()
        assert fr == sorted(set(fr))
        assert t.id not in seen_ids
        seen_ids.add(t.id)
