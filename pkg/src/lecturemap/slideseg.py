"""Slide boundary detection: EMD dissimilarity, edge refinement, keyframes.

Stage one thresholds the earth mover's distance between consecutive frame
histograms; stage two keeps only candidates whose edge statistics also jump,
which rejects illumination-only changes.  Surviving boundaries partition the
course timeline into slide segments.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from . import _accel
from .errors import (LengthMismatch, NonSquareDistance, NotNormalized,
                     TooFewFrames)
from .ingest.frames import FrameSeries

NORMALIZATION_TOL = 1e-9
EDGE_RATIO_EPS = 1e-6


@dataclass(frozen=True)
class SlideSegment:
    index: int
    start_ms: int
    end_ms: int
    keyframe_t_ms: int
    boundary_confidence: float

    def contains(self, t_ms: int) -> bool:
        return self.start_ms <= t_ms < self.end_ms


@dataclass(frozen=True)
class SegmentationReport:
    candidates: tuple[int, ...]
    survivors: tuple[int, ...]
    confidences: tuple[float, ...]

    def as_dict(self) -> dict:
        return {
            "candidates": list(self.candidates),
            "survivors": list(self.survivors),
            "confidences": list(self.confidences),
        }


def _check_histogram(h: np.ndarray, name: str) -> np.ndarray:
    h = np.asarray(h, dtype=np.float64)
    if abs(float(h.sum()) - 1.0) > NORMALIZATION_TOL:
        raise NotNormalized(f"{name} sums to {h.sum()!r}")
    return h


def emd_1d(h1: np.ndarray, h2: np.ndarray) -> float:
    """Earth mover's distance for same-length histograms with unit bin
    spacing: the L1 distance between the two CDFs."""
    h1 = np.asarray(h1, dtype=np.float64)
    h2 = np.asarray(h2, dtype=np.float64)
    if h1.shape != h2.shape or h1.ndim != 1:
        raise LengthMismatch(f"{h1.shape} vs {h2.shape}")
    _check_histogram(h1, "h1")
    _check_histogram(h2, "h2")
    return float(_accel.emd_1d_consecutive(np.stack([h1, h2]))[0])


def emd_transport(h1: np.ndarray, h2: np.ndarray,
                  ground_distance: np.ndarray) -> float:
    """Exact optimal transportation cost between two histograms under an
    arbitrary ground-distance matrix (LP formulation)."""
    h1 = _check_histogram(np.asarray(h1, dtype=np.float64), "h1")
    h2 = _check_histogram(np.asarray(h2, dtype=np.float64), "h2")
    if h1.shape != h2.shape or h1.ndim != 1:
        raise LengthMismatch(f"{h1.shape} vs {h2.shape}")
    d = np.asarray(ground_distance, dtype=np.float64)
    n = h1.shape[0]
    if d.ndim != 2 or d.shape[0] != d.shape[1]:
        raise NonSquareDistance(f"distance matrix shape {d.shape}")
    if d.shape[0] != n:
        raise NonSquareDistance(f"distance {d.shape} does not match {n} bins")
    if np.any(d < 0):
        raise NonSquareDistance("distance matrix has negative entries")

    a_eq = np.zeros((2 * n, n * n))
    for i in range(n):
        a_eq[i, i * n:(i + 1) * n] = 1.0
        a_eq[n + i, i::n] = 1.0
    res = linprog(d.ravel(), A_eq=a_eq, b_eq=np.concatenate([h1, h2]),
                  bounds=(0, None), method="highs")
    if not res.success:
        raise RuntimeError(f"transport LP failed: {res.message}")
    return float(res.fun)


def linear_ground_distance(bins: int) -> np.ndarray:
    idx = np.arange(bins, dtype=np.float64)
    return np.abs(np.subtract.outer(idx, idx))


def detect_boundaries(series: FrameSeries, emd_threshold: float) -> list[int]:
    """Times of frames whose histogram moved more than the threshold away
    from the previous frame."""
    if len(series.frames) < 2:
        raise TooFewFrames(f"{len(series.frames)} frame(s)")
    if emd_threshold <= 0:
        raise ValueError("emd_threshold must be positive")
    costs = _accel.emd_1d_consecutive(series.histogram_matrix())
    times = series.times_ms
    return [times[i + 1] for i in np.nonzero(costs > emd_threshold)[0]]


def _frame_index_at(series: FrameSeries, t_ms: int) -> int:
    times = series.times_ms
    lo = int(np.searchsorted(times, t_ms))
    if lo >= len(times) or times[lo] != t_ms:
        raise ValueError(f"no frame at t={t_ms}ms")
    return lo


def edge_change_ratio(before: float, after: float) -> float:
    return abs(after - before) / max(before, EDGE_RATIO_EPS)


def refine_boundaries(candidates: list[int], series: FrameSeries,
                      emd_threshold: float, edge_threshold: float,
                      course_duration_ms: int | None = None) -> tuple[list[SlideSegment], SegmentationReport]:
    """Second-stage filter: keep candidates whose edge density also changes,
    then convert the survivors into the segment partition."""
    if course_duration_ms is None:
        times = series.times_ms
        spacing = times[1] - times[0] if len(times) > 1 else 1000
        course_duration_ms = times[-1] + spacing

    costs = _accel.emd_1d_consecutive(series.histogram_matrix())
    survivors: list[tuple[int, float]] = []
    for t in candidates:
        idx = _frame_index_at(series, t)
        before = series.frames[idx - 1].edge_density
        after = series.frames[idx].edge_density
        ratio = edge_change_ratio(before, after)
        if ratio > edge_threshold:
            excess = float(costs[idx - 1]) - emd_threshold
            survivors.append((t, excess * ratio))

    max_product = max((p for _, p in survivors), default=0.0)
    boundaries = [t for t, _ in survivors]
    confidences = [p / max_product if max_product > 0 else 1.0
                   for _, p in survivors]

    segments: list[SlideSegment] = []
    edges = [0] + boundaries + [course_duration_ms]
    # segment 0 starts at the course start, which needs no evidence
    segment_conf = [1.0] + confidences
    for i in range(len(edges) - 1):
        start, end = edges[i], edges[i + 1]
        keyframe = select_keyframe_span(series, start, end)
        segments.append(SlideSegment(i, start, end, keyframe, segment_conf[i]))
    report = SegmentationReport(tuple(candidates), tuple(boundaries),
                                tuple(confidences))
    return segments, report


def select_keyframe_span(series: FrameSeries, start_ms: int, end_ms: int) -> int:
    """Keyframe = frame of maximum edge density in [start, end), latest wins
    ties (slides accrete content, so the fullest frame represents best)."""
    best_t = None
    best_density = -1.0
    for frame in series.frames:
        if start_ms <= frame.t_ms < end_ms:
            if frame.edge_density >= best_density:
                best_density = frame.edge_density
                best_t = frame.t_ms
    if best_t is None:
        # no sampled frame inside the span: fall back to the span start
        return start_ms
    return best_t


def select_keyframe(segment: SlideSegment, series: FrameSeries) -> int:
    return select_keyframe_span(series, segment.start_ms, segment.end_ms)


def segment_slides(series: FrameSeries, emd_threshold: float,
                   edge_threshold: float,
                   course_duration_ms: int | None = None) -> tuple[list[SlideSegment], SegmentationReport]:
    """Run both detection stages and return the timeline partition."""
    try:
        candidates = detect_boundaries(series, emd_threshold)
    except TooFewFrames:
        candidates = []
    return refine_boundaries(candidates, series, emd_threshold,
                             edge_threshold, course_duration_ms)
