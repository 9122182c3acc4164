"""Dataset curation helpers working on precomputed frame embeddings."""
from __future__ import annotations

import logging
import math
from collections import defaultdict
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InputError

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ClipMeta:
    clip_id: str
    stall_id: str
    time_of_day: str
    season: str

    @property
    def stratum(self) -> tuple[str, str, str]:
        return (self.stall_id, self.time_of_day, self.season)


def subsample_every_n(frame_count: int, n: int) -> list[int]:
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    return list(range(0, max(frame_count, 0), n))


def cosine_similarity(u, v) -> float:
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != v.shape:
        raise InputError(f"dimension mismatch: {u.shape} vs {v.shape}")
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu == 0 or nv == 0:
        raise InputError("cosine similarity undefined for a zero vector")
    return float(np.clip(u @ v / (nu * nv), -1.0, 1.0))


def consecutive_similarities(seq) -> np.ndarray:
    """s[t-1] = cos(e_t, e_{t-1}) for t >= 1."""
    e = np.asarray(seq, dtype=float)
    if e.ndim != 2:
        raise InputError("embeddings must be a 2-D array (frames x dim)")
    norms = np.linalg.norm(e, axis=1)
    if np.any(norms == 0):
        raise InputError(f"zero embedding at frame {int(np.argmin(norms))}")
    unit = e / norms[:, None]
    return np.clip(np.sum(unit[1:] * unit[:-1], axis=1), -1.0, 1.0)


def select_informative(seq, percentile: float = 0.25) -> list[int]:
    """Frames whose similarity to the previous frame is in the lowest
    ``percentile`` (nearest-rank), i.e. the most visually distinct ones.

    Ties at the cut are broken towards lower frame index so exactly
    ceil(percentile * (L - 1)) frames are returned.
    """
    if not 0.0 <= percentile <= 1.0:
        raise ValueError(f"percentile must be in [0, 1], got {percentile}")
    e = np.asarray(seq, dtype=float)
    if len(e) < 2:
        log.warning("need at least 2 frames to compare, got %d; selecting none", len(e))
        return []
    sims = consecutive_similarities(e)
    n = len(sims)
    k = math.ceil(round(percentile * n, 9))
    order = sorted(range(n), key=lambda i: (sims[i], i))
    return sorted(i + 1 for i in order[:k])


def stratified_sample(clips: Sequence[ClipMeta], k_per_stratum: int, seed: int) -> list[str]:
    if k_per_stratum < 1:
        raise ValueError(f"k_per_stratum must be >= 1, got {k_per_stratum}")
    rng = np.random.default_rng(seed)
    strata: dict[tuple, list[ClipMeta]] = defaultdict(list)
    for c in clips:
        strata[c.stratum].append(c)
    chosen = []
    for key in sorted(strata):
        members = strata[key]
        if len(members) < k_per_stratum:
            log.warning("stratum %s has %d clips, fewer than k=%d; taking all",
                        key, len(members), k_per_stratum)
        k = min(k_per_stratum, len(members))
        idx = rng.choice(len(members), size=k, replace=False)
        chosen += [members[i].clip_id for i in sorted(idx)]
    return chosen
