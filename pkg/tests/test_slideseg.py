from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lecturemap.errors import (LengthMismatch, NonSquareDistance,
                               NotNormalized, TooFewFrames)
from lecturemap.ingest.frames import Frame, FrameSeries
from lecturemap.slideseg import (detect_boundaries, emd_1d, emd_transport,
                                 linear_ground_distance, refine_boundaries,
                                 segment_slides, select_keyframe,
                                 select_keyframe_span)

from conftest import make_histogram, peaked_histogram
from oracles import transport_cost_by_vertex_enumeration


def frozen(h: np.ndarray) -> np.ndarray:
    h = np.ascontiguousarray(h, dtype=np.float64)
    h.flags.writeable = False
    return h


def make_series(hist_density_pairs, spacing_ms=1000) -> FrameSeries:
    frames = tuple(
        Frame(i * spacing_ms, frozen(h), density, f"synth#{i}")
        for i, (h, density) in enumerate(hist_density_pairs))
    return FrameSeries(frames)


def ten_slide_series():
    """Ten slides, three frames each; returns (series, true boundary times)."""
    slides = [(peaked_histogram(256, 10 + 25 * i), 0.1 + 0.1 * (i % 3))
              for i in range(10)]
    pairs = []
    truth = []
    for i, (hist, density) in enumerate(slides):
        if i > 0:
            truth.append(len(pairs) * 1000)
        pairs.extend([(hist, density)] * 3)
    return make_series(pairs), truth


class TestEmd1d:
    def test_identical_histograms_zero(self):
        rng = np.random.default_rng(0)
        h = make_histogram(rng, 16)
        assert emd_1d(h, h) == 0.0

    def test_unit_mass_two_bins_apart(self):
        assert emd_1d([1, 0, 0], [0, 0, 1]) == pytest.approx(2.0, abs=1e-12)

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatch):
            emd_1d([1.0, 0.0], [1.0, 0.0, 0.0])

    def test_not_normalized(self):
        with pytest.raises(NotNormalized):
            emd_1d([0.5, 0.1], [0.5, 0.5])

    def test_matches_transport_on_random_8bin_pairs(self):
        rng = np.random.default_rng(42)
        ground = linear_ground_distance(8)
        for _ in range(50):
            h1, h2 = make_histogram(rng, 8), make_histogram(rng, 8)
            assert emd_1d(h1, h2) == pytest.approx(
                emd_transport(h1, h2, ground), abs=1e-9)

    @settings(max_examples=150, deadline=None)
    @given(st.lists(st.lists(st.floats(1e-3, 1.0), min_size=8, max_size=8),
                    min_size=3, max_size=3))
    def test_metric_axioms(self, raw):
        a, b, c = (np.array(h) / np.sum(h) for h in raw)
        assert emd_1d(a, b) == pytest.approx(emd_1d(b, a), abs=1e-12)
        assert emd_1d(a, a) <= 1e-9
        assert emd_1d(a, c) <= emd_1d(a, b) + emd_1d(b, c) + 1e-9


class TestEmdTransport:
    def test_identical_zero_for_any_ground_distance(self):
        rng = np.random.default_rng(5)
        h = make_histogram(rng, 5)
        ground = rng.random((5, 5)) * 3
        np.fill_diagonal(ground, 0.0)
        assert emd_transport(h, h, ground) == pytest.approx(0.0, abs=1e-9)

    @pytest.mark.parametrize("a", [0.0, 0.2, 0.5, 0.9, 1.0])
    def test_two_bin_closed_form(self, a):
        ground = np.array([[0.0, 1.0], [1.0, 0.0]])
        cost = emd_transport([a, 1 - a], [1 - a, a], ground)
        assert cost == pytest.approx(abs(1 - 2 * a), abs=1e-9)

    def test_three_bin_random_instances_match_vertex_enumeration(self):
        rng = np.random.default_rng(9)
        for _ in range(25):
            h1, h2 = make_histogram(rng, 3), make_histogram(rng, 3)
            ground = rng.random((3, 3)) * 2
            np.fill_diagonal(ground, 0.0)
            expected = transport_cost_by_vertex_enumeration(h1, h2, ground)
            assert emd_transport(h1, h2, ground) == pytest.approx(
                expected, abs=1e-8)

    def test_non_square_distance_rejected(self):
        with pytest.raises(NonSquareDistance):
            emd_transport([0.5, 0.5], [0.5, 0.5], np.zeros((2, 3)))
        with pytest.raises(NonSquareDistance):
            emd_transport([0.5, 0.5], [0.5, 0.5], np.zeros((3, 3)))


class TestDetectBoundaries:
    def test_constant_series_has_no_candidates(self):
        h = peaked_histogram(64, 30)
        series = make_series([(h, 0.2)] * 5)
        assert detect_boundaries(series, 0.15) == []

    def test_single_jump_detected(self):
        h1 = np.zeros(16)
        h1[2] = 1.0
        h2 = np.zeros(16)
        h2[5] = 1.0  # EMD 3.0
        series = make_series([(h1, 0.1), (h1, 0.1), (h2, 0.1), (h2, 0.1)])
        assert detect_boundaries(series, 1.0) == [2000]

    def test_too_few_frames(self):
        with pytest.raises(TooFewFrames):
            detect_boundaries(make_series([(peaked_histogram(16, 3), 0.1)]), 0.1)

    def test_ten_slide_fixture_full_recall_at_half_min_emd(self):
        series, truth = ten_slide_series()
        hists = series.histogram_matrix()
        inter = [emd_1d(hists[i], hists[i + 1]) for i in range(len(hists) - 1)]
        min_jump = min(v for v in inter if v > 1e-9)
        candidates = detect_boundaries(series, min_jump / 2)
        assert candidates == truth

    @settings(max_examples=50, deadline=None)
    @given(st.floats(0.01, 5.0), st.floats(0.01, 5.0), st.integers(0, 2**31))
    def test_raising_threshold_never_adds_candidates(self, t1, t2, seed):
        rng = np.random.default_rng(seed)
        series = make_series([(make_histogram(rng, 16), 0.1) for _ in range(8)])
        lo, hi = sorted((t1, t2))
        assert len(detect_boundaries(series, hi)) <= len(detect_boundaries(series, lo))


class TestRefineBoundaries:
    def test_no_candidates_single_full_segment(self):
        series = make_series([(peaked_histogram(32, 5), 0.2)] * 4)
        segments, report = refine_boundaries([], series, 0.15, 0.3)
        assert len(segments) == 1
        assert (segments[0].start_ms, segments[0].end_ms) == (0, 4000)
        assert report.survivors == ()

    def test_equal_edge_densities_drop_candidate(self):
        h1, h2 = peaked_histogram(32, 5), peaked_histogram(32, 20)
        series = make_series([(h1, 0.2), (h1, 0.2), (h2, 0.2), (h2, 0.2)])
        candidates = detect_boundaries(series, 0.15)
        assert candidates == [2000]
        segments, report = refine_boundaries(candidates, series, 0.15, 0.3)
        assert len(segments) == 1
        assert report.candidates == (2000,)
        assert report.survivors == ()

    def test_illumination_jumps_rejected_true_boundaries_kept(self):
        # two true boundaries (histogram + edge change) and two spurious
        # illumination shifts (histogram moves, edges identical)
        pairs = []
        pairs += [(peaked_histogram(64, 10), 0.10)] * 2
        pairs += [(peaked_histogram(64, 13), 0.10)] * 2   # spurious @2000
        pairs += [(peaked_histogram(64, 30), 0.20)] * 2   # true @4000
        pairs += [(peaked_histogram(64, 33), 0.20)] * 2   # spurious @6000
        pairs += [(peaked_histogram(64, 50), 0.30)] * 2   # true @8000
        series = make_series(pairs)
        candidates = detect_boundaries(series, 0.15)
        assert candidates == [2000, 4000, 6000, 8000]
        segments, report = refine_boundaries(candidates, series, 0.15, 0.3)
        assert list(report.survivors) == [4000, 8000]
        assert [s.start_ms for s in segments] == [0, 4000, 8000]

    def test_partition_covers_course_exactly(self):
        series, _ = ten_slide_series()
        segments, _ = segment_slides(series, 0.15, 0.3, course_duration_ms=31000)
        assert segments[0].start_ms == 0
        assert segments[-1].end_ms == 31000
        for a, b in zip(segments, segments[1:]):
            assert a.end_ms == b.start_ms
        assert sum(s.end_ms - s.start_ms for s in segments) == 31000

    def test_confidences_normalized(self):
        series, _ = ten_slide_series()
        _, report = segment_slides(series, 0.15, 0.3)
        assert report.confidences
        assert max(report.confidences) == pytest.approx(1.0)
        assert all(0 < c <= 1 for c in report.confidences)


class TestSelectKeyframe:
    def test_single_frame_segment(self):
        series = make_series([(peaked_histogram(16, 3), 0.5)])
        assert select_keyframe_span(series, 0, 1000) == 0

    def test_building_slide_returns_last_frame(self):
        h = peaked_histogram(16, 3)
        series = make_series([(h, 0.1), (h, 0.2), (h, 0.3)])
        assert select_keyframe_span(series, 0, 3000) == 2000

    def test_latest_tie_break(self):
        h = peaked_histogram(16, 3)
        series = make_series([(h, 0.3), (h, 0.3), (h, 0.1)])
        assert select_keyframe_span(series, 0, 3000) == 1000

    @settings(max_examples=60, deadline=None)
    @given(st.lists(st.floats(0, 1), min_size=1, max_size=12))
    def test_argmax_matches_linear_scan(self, densities):
        h = peaked_histogram(16, 8)
        series = make_series([(h, d) for d in densities])
        got = select_keyframe_span(series, 0, len(densities) * 1000)
        best_t, best_d = None, -1.0
        for frame in series.frames:  # independent scan, latest tie wins
            if frame.edge_density >= best_d:
                best_d, best_t = frame.edge_density, frame.t_ms
        assert got == best_t

    def test_segment_object_entry_point(self):
        series, _ = ten_slide_series()
        segments, _ = segment_slides(series, 0.15, 0.3)
        for seg in segments:
            t = select_keyframe(seg, series)
            assert seg.start_ms <= t < seg.end_ms
