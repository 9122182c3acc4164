import logging
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.stats import chisquare

from stallmon.curation import (ClipMeta, consecutive_similarities, cosine_similarity,
                               select_informative, stratified_sample, subsample_every_n)
from stallmon.errors import InputError


def chain(sims):
    """2-D unit vectors whose consecutive cosines are exactly ``sims``."""
    angles = np.concatenate([[0.0], np.cumsum(np.arccos(sims))])
    return np.stack([np.cos(angles), np.sin(angles)], axis=1)


def test_subsample():
    assert len(subsample_every_n(1200, 60)) == 20
    assert subsample_every_n(5, 1) == [0, 1, 2, 3, 4]
    assert subsample_every_n(0, 60) == []


def test_cosine_examples():
    assert cosine_similarity([1, 2, 3], [1, 2, 3]) == pytest.approx(1.0)
    assert cosine_similarity([1, 0], [0, 1]) == 0.0
    assert cosine_similarity([1, 1], [1, 0]) == pytest.approx(1 / math.sqrt(2))
    with pytest.raises(InputError):
        cosine_similarity([0, 0], [1, 0])


vec = st.lists(st.floats(-10, 10), min_size=3, max_size=3).filter(lambda v: np.linalg.norm(v) > 1e-3)


@given(vec, vec, st.floats(0.01, 100))
def test_cosine_scale_invariant(u, v, k):
    assert cosine_similarity(np.multiply(u, k), v) == pytest.approx(cosine_similarity(u, v), abs=1e-9)


def test_select_examples():
    e = chain([0.99, 0.95, 0.90, 0.80])
    assert consecutive_similarities(e) == pytest.approx([0.99, 0.95, 0.90, 0.80])
    assert select_informative(e, 0.25) == [4]
    same = np.ones((9, 4))
    assert select_informative(same, 0.25) == [1, 2]  # ceil(0.25 * 8) = 2, lowest indices
    assert select_informative(e, 1.0) == [1, 2, 3, 4]


def test_select_short_input_warns(caplog):
    with caplog.at_level(logging.WARNING):
        assert select_informative(np.ones((1, 3))) == []
    assert "at least 2 frames" in caplog.text


@given(st.lists(st.floats(-0.999, 0.999), min_size=1, max_size=40, unique=True),
       st.floats(0, 1), st.floats(0, 1))
def test_select_size_and_monotone(sims, p, q):
    e = chain(np.array(sims))
    # arccos round trip can merge near-equal values; keep the distinct-value premise
    if len(set(np.round(consecutive_similarities(e), 12))) < len(sims):
        return
    lo, hi = min(p, q), max(p, q)
    a, b = select_informative(e, lo), select_informative(e, hi)
    assert len(a) == math.ceil(round(lo * len(sims), 9))
    assert len(a) <= len(b) and set(a) <= set(b)


def clips(strata, size):
    return [ClipMeta(f"s{s}-{i}", f"stall{s}", "day", "summer") for s in range(strata) for i in range(size)]


def test_stratified_examples(caplog):
    picked = stratified_sample(clips(2, 3), 1, seed=0)
    assert len(picked) == 2 and {p.split("-")[0] for p in picked} == {"s0", "s1"}
    assert stratified_sample(clips(2, 3), 1, 9) == stratified_sample(clips(2, 3), 1, 9)
    with caplog.at_level(logging.WARNING):
        assert sorted(stratified_sample(clips(1, 2), 5, 0)) == ["s0-0", "s0-1"]
    assert "fewer than k" in caplog.text


def test_stratified_uniform():
    pool = clips(1, 10)
    counts = np.zeros(10)
    for seed in range(10_000):
        [c] = stratified_sample(pool, 1, seed)
        counts[int(c.split("-")[1])] += 1
    assert chisquare(counts).pvalue > 0.01
