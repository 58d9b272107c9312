"""Distances between traces and between annotations, plus the correlation
used by fitness scoring.

Trace distance compares matched objects' interpolated positions; annotation
distance compares per-pattern activation histograms with symmetrized cross
entropy. Both are symmetric; the directional cross entropy is available
behind a flag for sensitivity runs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Protocol, Sequence

import numpy as np

from .trace.index import TraceIndex
from .trace.model import SCENE_EXTENT, Trace

SMOOTHING_EPS = 1e-6
DEFAULT_BINS = 10
DEFAULT_SAMPLES = 100


class DistanceUndefinedError(ValueError):
    """No matched dynamic objects between the two traces."""


@dataclass(frozen=True)
class Histogram:
    weights: tuple[float, ...]

    @property
    def bins(self) -> int:
        return len(self.weights)


class AnnotationLike(Protocol):
    """Anything exposing per-pattern activation frame indices."""

    @property
    def pattern_columns(self) -> Mapping[str, Sequence[int]]: ...

    @property
    def n_frames(self) -> int: ...


def trace_distance(t1: Trace | TraceIndex, t2: Trace | TraceIndex,
                   samples: int = DEFAULT_SAMPLES) -> float:
    """Mean per-object Euclidean distance over `samples` uniform times,
    normalized by the scene extent. Objects are matched by id; only ids
    dynamic in both scenes participate."""
    idx1 = t1 if isinstance(t1, TraceIndex) else TraceIndex(t1)
    idx2 = t2 if isinstance(t2, TraceIndex) else TraceIndex(t2)
    matched = sorted(set(idx1.dynamic_ids) & set(idx2.dynamic_ids))
    if not matched:
        raise DistanceUndefinedError("no dynamic objects present in both traces")
    times = np.linspace(0.0, 1.0, samples)
    total = 0.0
    for oid in matched:
        for t in times:
            p1 = idx1.position_at_time(oid, float(t))
            p2 = idx2.position_at_time(oid, float(t))
            assert p1 is not None and p2 is not None
            total += math.hypot(p1[0] - p2[0], p1[1] - p2[1])
    return total / (len(matched) * samples * SCENE_EXTENT)


def pattern_histogram(activations: Sequence[int], n: int, b: int) -> Histogram:
    """Histogram of activation frame indices over b equal time bins, with
    epsilon smoothing. Zero activations yield the uniform histogram."""
    if b < 2:
        raise ValueError("bin count must be >= 2")
    if n < 2:
        raise ValueError("trace length must be >= 2")
    counts = [0.0] * b
    for i in activations:
        if not 0 <= i < n:
            raise ValueError(f"activation frame {i} outside [0, {n})")
        t = i / (n - 1)
        j = min(b - 1, int(t * b))
        counts[j] += 1.0
    total = sum(counts) + b * SMOOTHING_EPS
    return Histogram(tuple((c + SMOOTHING_EPS) / total for c in counts))


def cross_entropy(p: Histogram, q: Histogram) -> float:
    if p.bins != q.bins:
        raise ValueError("histograms must have equal bin counts")
    return -sum(pw * math.log(qw) for pw, qw in zip(p.weights, q.weights))


def histogram_distance(p: Histogram, q: Histogram, directional: bool = False) -> float:
    if directional:
        return cross_entropy(p, q)
    return 0.5 * (cross_entropy(p, q) + cross_entropy(q, p))


def annotation_distance(a1: AnnotationLike, a2: AnnotationLike,
                        b: int = DEFAULT_BINS, directional: bool = False) -> float:
    """Mean per-pattern histogram distance over the outer join of pattern
    uids; a pattern missing from one side counts as zero activations."""
    if b < 2:
        raise ValueError("bin count must be >= 2")
    uids = sorted(set(a1.pattern_columns) | set(a2.pattern_columns))
    if not uids:
        return 0.0
    total = 0.0
    for uid in uids:
        h1 = pattern_histogram(a1.pattern_columns.get(uid, ()), a1.n_frames, b)
        h2 = pattern_histogram(a2.pattern_columns.get(uid, ()), a2.n_frames, b)
        total += histogram_distance(h1, h2, directional=directional)
    return total / len(uids)


def correlation(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Pearson correlation; 0.0 when either side has zero variance."""
    if len(xs) != len(ys):
        raise ValueError(f"length mismatch: {len(xs)} vs {len(ys)}")
    if len(xs) < 2:
        raise ValueError("need at least 2 points")
    n = len(xs)
    mx = sum(xs) / n
    my = sum(ys) / n
    sxx = sum((x - mx) ** 2 for x in xs)
    syy = sum((y - my) ** 2 for y in ys)
    if sxx <= 0.0 or syy <= 0.0:
        return 0.0
    sxy = sum((x - mx) * (y - my) for x, y in zip(xs, ys))
    return sxy / math.sqrt(sxx * syy)


@dataclass(frozen=True)
class ColumnView:
    """Minimal AnnotationLike wrapper for a bag of activation columns."""

    columns: Mapping[str, Sequence[int]]
    n: int

    @property
    def pattern_columns(self) -> Mapping[str, Sequence[int]]:
        return self.columns

    @property
    def n_frames(self) -> int:
        return self.n
