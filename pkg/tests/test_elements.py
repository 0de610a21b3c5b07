from __future__ import annotations

import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lecturemap.elements import (DETECTOR_PROTOCOL, CueLexicon, Element,
                                 Provenance, assign_ids, classify_auxiliary,
                                 classify_block_text, classify_via_client,
                                 elements_from_annotations,
                                 fallback_layout_detect, hintless_text_boxes,
                                 resolve_conflicts, snap_to_segments)
from lecturemap.errors import ClientUnreachable, InvalidResponse
from lecturemap.ingest.annotations import AnnotationEntry, AnnotationSet, BBox
from lecturemap.ingest.subtitles import parse_subtitles
from lecturemap.kinds import KIND_NAMES, ElementKind
from lecturemap.slideseg import SlideSegment
from lecturemap.text import load_lexicon

from stubserver import StubServer

TEST_LEX = CueLexicon(load_lexicon("test_lexicon.txt"))
EXAMPLE_LEX = CueLexicon(load_lexicon("example_lexicon.txt"))


def box(x, y, w, h, text, t0=0, t1=1000, **kwargs):
    return AnnotationEntry(t0, t1, BBox(x, y, w, h), text=text, **kwargs)


def srt(cue_lines: list[tuple[int, int, str]]) -> bytes:
    blocks = []
    for i, (start, end, text) in enumerate(cue_lines, 1):
        def ts(ms):
            h, rem = divmod(ms, 3600_000)
            m, rem = divmod(rem, 60_000)
            s, milli = divmod(rem, 1000)
            return f"{h:02}:{m:02}:{s:02},{milli:03}"
        blocks.append(f"{i}\n{ts(start)} --> {ts(end)}\n{text}\n")
    return "\n".join(blocks).encode()


class TestClassifyViaClient:
    def test_empty_response_list(self):
        with StubServer([{"protocol": DETECTOR_PROTOCOL, "entries": []}]) as stub:
            elements, dropped = classify_via_client(stub.url, [(0, "kf.png")])
        assert elements == [] and dropped == []

    def test_unknown_kind_dropped_with_reason(self):
        response = {"protocol": DETECTOR_PROTOCOL, "entries": [
            {"kind": "diagram", "bbox": [0.1, 0.1, 0.2, 0.2]}]}
        with StubServer([response]) as stub:
            elements, dropped = classify_via_client(stub.url, [(0, "kf.png")])
        assert elements == []
        assert len(dropped) == 1 and "unknown kind" in dropped[0].reason

    def test_recorded_fixture_replay(self):
        canned = [
            {"protocol": DETECTOR_PROTOCOL, "entries": [
                {"kind": "Figure", "bbox": [0.1, 0.2, 0.3, 0.3],
                 "confidence": 0.9},
                {"kind": "Text", "bbox": [0.1, 0.6, 0.5, 0.1],
                 "text": "a pie chart", "confidence": 0.8}]},
            {"protocol": DETECTOR_PROTOCOL, "entries": [
                {"kind": "Equation", "bbox": [0.2, 0.3, 0.4, 0.1],
                 "text": "y = x", "confidence": 0.7}]},
        ]
        with StubServer(canned) as stub:
            elements, dropped = classify_via_client(
                stub.url, [(0, "kf0.png"), (1, "kf1.png")])
        assert dropped == []
        got = [(e.kind, e.segment_index, e.confidence) for e in elements]
        assert got == [(ElementKind.FIGURE, 0, 0.9),
                       (ElementKind.TEXT, 0, 0.8),
                       (ElementKind.EQUATION, 1, 0.7)]
        assert all(e.provenance is Provenance.DETECTOR_CLIENT for e in elements)
        assert stub.requests[0]["protocol"] == DETECTOR_PROTOCOL
        assert stub.requests[0]["keyframe_ref"] == "kf0.png"

    def test_unknown_protocol_version_rejected(self):
        with StubServer([{"protocol": "detector/9", "entries": []}]) as stub:
            with pytest.raises(InvalidResponse):
                classify_via_client(stub.url, [(0, "kf.png")])

    def test_unreachable_endpoint(self):
        with pytest.raises(ClientUnreachable):
            classify_via_client("http://127.0.0.1:1/", [(0, "kf.png")],
                                timeout_s=0.2)

    @settings(max_examples=20, deadline=None)
    @given(st.lists(st.fixed_dictionaries({
        "kind": st.one_of(st.sampled_from(sorted(KIND_NAMES)),
                          st.text(max_size=8)),
        "bbox": st.lists(st.floats(-1, 2), min_size=0, max_size=5),
        "confidence": st.floats(-1, 2),
    }), max_size=5))
    def test_fuzzed_responses_never_leak_bad_entries(self, entries):
        response = {"protocol": DETECTOR_PROTOCOL, "entries": entries}
        with StubServer([response]) as stub:
            elements, _dropped = classify_via_client(stub.url, [(0, "kf.png")])
        for element in elements:
            assert element.kind.value in KIND_NAMES
            assert 0 <= element.confidence <= 1
            b = element.bbox
            assert 0 <= b.x <= 1 and 0 <= b.y <= 1
            assert b.x + b.w <= 1 + 1e-9 and b.y + b.h <= 1 + 1e-9


class TestFallbackLayout:
    def test_equation_by_symbol_ratio(self):
        result = fallback_layout_detect(AnnotationSet(
            (box(0.1, 0.1, 0.4, 0.05, "y = mx + b"),)))
        assert [e.kind for e in result] == [ElementKind.EQUATION]
        assert result[0].provenance is Provenance.FALLBACK
        assert result[0].confidence == 0.5

    def test_prose_is_text(self):
        result = fallback_layout_detect(AnnotationSet(
            (box(0.1, 0.1, 0.6, 0.05,
                 "The histogram groups numbers into bins"),)))
        assert [e.kind for e in result] == [ElementKind.TEXT]

    def test_code_block_detection(self):
        # symbol ratio below the equation cut, punctuation above the code cut
        code = "    for x in data:\n    total += x[i]\n    count += 1"
        assert classify_block_text(code) is ElementKind.CODE_BLOCK

    def test_twelve_box_fixture_matches_hand_grouping(self):
        # three visual blocks separated by > 0.02 vertical gaps:
        #   title (1 box), bullet list (5 boxes), formula area (6 boxes)
        boxes = [
            box(0.10, 0.05, 0.50, 0.040, "Describing distributions"),
            box(0.10, 0.150, 0.40, 0.030, "The mean summarizes the center"),
            box(0.10, 0.185, 0.40, 0.030, "The spread is the variance"),
            box(0.10, 0.220, 0.40, 0.030, "Outliers distort the mean"),
            box(0.10, 0.255, 0.40, 0.030, "The median resists outliers"),
            box(0.10, 0.290, 0.40, 0.030, "Choose summaries with care"),
            box(0.10, 0.500, 0.30, 0.030, "mean = sum / n"),
            box(0.10, 0.535, 0.30, 0.030, "var = E[(x - m)^2]"),
            box(0.10, 0.570, 0.30, 0.030, "sd = sqrt(var)"),
            box(0.10, 0.605, 0.30, 0.030, "se = sd / sqrt(n)"),
            box(0.10, 0.640, 0.30, 0.030, "z = (x - m) / sd"),
            box(0.10, 0.675, 0.30, 0.030, "t = z * adjustment"),
        ]
        result = fallback_layout_detect(AnnotationSet(tuple(boxes)))
        # hand grouping: gaps of 0.105 and 0.18 split; 0.005 gaps join
        assert len(result) == 3
        assert result[0].text == "Describing distributions"
        assert result[1].text.count("\n") == 4
        assert result[2].text.count("\n") == 5
        assert result[0].kind is ElementKind.TEXT
        assert result[1].kind is ElementKind.TEXT
        assert result[2].kind is ElementKind.EQUATION
        merged = result[2].bbox
        assert merged.y == pytest.approx(0.500)
        assert merged.y + merged.h == pytest.approx(0.705)


class TestClassifyAuxiliary:
    def make_transcript(self):
        return parse_subtitles(srt([
            (0, 4000, "welcome to the lecture"),
            (4000, 8000, "for example consider a pie chart"),
            (8000, 12000, "now a quiz about the mean"),
            (12000, 16000, "e.g. the median of five values"),
            (16000, 20000, "that concludes the session"),
        ]), "srt")

    def test_example_block_relabeled(self):
        element = Element("", ElementKind.TEXT, 0, 0, 1000,
                          BBox(0.1, 0.1, 0.2, 0.1), "Example 1: compute it",
                          Provenance.FALLBACK, 0.5)
        out = classify_auxiliary([element], parse_subtitles(srt(
            [(0, 1000, "hello there")]), "srt"), AnnotationSet(()),
            TEST_LEX, EXAMPLE_LEX, subtitle_elements=False)
        assert out[0].kind is ElementKind.EXAMPLE

    def test_quiz_block_relabeled(self):
        element = Element("", ElementKind.TEXT, 0, 0, 1000,
                          BBox(0.1, 0.1, 0.2, 0.1), "Quiz: compute the mean",
                          Provenance.FALLBACK, 0.5)
        out = classify_auxiliary([element], parse_subtitles(srt(
            [(0, 1000, "hello there")]), "srt"), AnnotationSet(()),
            TEST_LEX, EXAMPLE_LEX, subtitle_elements=False)
        assert out[0].kind is ElementKind.TEST

    def test_question_density_marks_test(self):
        element = Element("", ElementKind.TEXT, 0, 0, 1000,
                          BBox(0.1, 0.1, 0.2, 0.1), "What now? Why? How?",
                          Provenance.FALLBACK, 0.5)
        out = classify_auxiliary([element], parse_subtitles(srt(
            [(0, 1000, "hello there")]), "srt"), AnnotationSet(()),
            TEST_LEX, EXAMPLE_LEX, subtitle_elements=False)
        assert out[0].kind is ElementKind.TEST

    def test_three_planted_cue_phrases_labeled(self):
        transcript = self.make_transcript()
        out = classify_auxiliary([], transcript, AnnotationSet(()),
                                 TEST_LEX, EXAMPLE_LEX,
                                 subtitle_elements=False)
        planted = {(4000, ElementKind.EXAMPLE), (8000, ElementKind.TEST),
                   (12000, ElementKind.EXAMPLE)}
        got = {(e.t_start_ms, e.kind) for e in out}
        assert got == planted

    def test_teacher_image_from_flags(self):
        annotations = AnnotationSet((AnnotationEntry(
            0, 2000, BBox(0.7, 0.6, 0.2, 0.3), teacher_head=True),))
        out = classify_auxiliary([], parse_subtitles(srt(
            [(0, 1000, "hello there")]), "srt"), annotations,
            TEST_LEX, EXAMPLE_LEX, subtitle_elements=False)
        assert [e.kind for e in out] == [ElementKind.TEACHER_IMAGE]
        assert out[0].provenance is Provenance.ANNOTATION

    def test_subtitle_elements_one_per_cue(self):
        transcript = self.make_transcript()
        out = classify_auxiliary([], transcript, AnnotationSet(()),
                                 TEST_LEX, EXAMPLE_LEX)
        subtitles = [e for e in out if e.kind is ElementKind.SUBTITLE]
        assert len(subtitles) == len(transcript.cues)


class TestAssembly:
    SEGMENTS = [SlideSegment(0, 0, 10000, 2000, 1.0),
                SlideSegment(1, 10000, 20000, 12000, 0.8)]

    def test_annotation_beats_client_above_iou_threshold(self):
        annotation = Element("", ElementKind.TABLE, 0, 0, 5000,
                             BBox(0.1, 0.1, 0.4, 0.4), "tbl",
                             Provenance.ANNOTATION, 1.0)
        client_same = Element("", ElementKind.FIGURE, 0, 0, 5000,
                              BBox(0.12, 0.1, 0.4, 0.4), None,
                              Provenance.DETECTOR_CLIENT, 0.9)
        client_far = Element("", ElementKind.FIGURE, 0, 0, 5000,
                             BBox(0.6, 0.6, 0.3, 0.3), None,
                             Provenance.DETECTOR_CLIENT, 0.9)
        merged = resolve_conflicts([client_same, client_far], [annotation])
        kinds = sorted(e.kind.value for e in merged)
        assert kinds == ["Figure", "Table"]

    def test_snap_to_segments_places_every_element_in_one_segment(self):
        spanning = Element("", ElementKind.FIGURE, -1, 8000, 15000,
                           BBox(0.1, 0.1, 0.2, 0.2), None,
                           Provenance.ANNOTATION, 1.0)
        out = snap_to_segments([spanning], self.SEGMENTS)
        el = out[0]
        seg = self.SEGMENTS[el.segment_index]
        assert seg.start_ms <= el.t_start_ms < el.t_end_ms <= seg.end_ms
        assert el.segment_index == 1  # larger overlap side

    def test_assign_ids_deterministic(self):
        elements = [
            Element("", ElementKind.FIGURE, 0, 2000, 3000,
                    BBox(0.5, 0.5, 0.2, 0.2), None, Provenance.ANNOTATION, 1.0),
            Element("", ElementKind.TEXT, 0, 1000, 2000,
                    BBox(0.1, 0.1, 0.2, 0.2), "alpha", Provenance.FALLBACK, 0.5),
        ]
        first = assign_ids(list(elements))
        second = assign_ids(list(reversed(elements)))
        assert [(e.id, e.kind) for e in first] == [(e.id, e.kind) for e in second]
        assert [e.id for e in first] == ["e0000", "e0001"]

    def test_output_deterministic_bytes(self):
        annotations = AnnotationSet((
            box(0.1, 0.1, 0.4, 0.05, "y = mx + b"),
            box(0.1, 0.4, 0.5, 0.05, "plain sentence here"),
        ))
        def build():
            elements = fallback_layout_detect(annotations)
            elements = snap_to_segments(elements, self.SEGMENTS)
            elements = assign_ids(elements)
            return json.dumps([
                [e.id, e.kind.value, e.segment_index, e.t_start_ms,
                 e.t_end_ms, e.bbox.as_list(), e.text] for e in elements],
                sort_keys=True).encode()
        assert build() == build()

    def test_elements_from_annotations_uses_kind_hints(self):
        annotations = AnnotationSet((
            AnnotationEntry(0, 1000, BBox(0.1, 0.1, 0.2, 0.2),
                            kind_hint="Figure"),
            AnnotationEntry(0, 1000, BBox(0.4, 0.1, 0.2, 0.2), text="raw box"),
        ))
        direct = elements_from_annotations(annotations)
        assert [e.kind for e in direct] == [ElementKind.FIGURE]
        hintless = hintless_text_boxes(annotations)
        assert len(hintless.entries) == 1
