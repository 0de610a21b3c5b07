"""Element-level extraction: classify on-screen objects into the closed
basic/auxiliary taxonomy.

Three element sources feed the build: a detector service speaking the wire
protocol below, annotation files, and a deterministic rule-based fallback
that clusters raw text boxes into blocks.  Human annotations win conflicts.

Detector wire protocol (JSON over HTTP POST):

    request:  {"protocol": "detector/1", "segment_index": 3,
               "keyframe_ref": "frames/003.png"}
    response: {"protocol": "detector/1",
               "entries": [{"kind": "Figure", "bbox": [x, y, w, h],
                            "text": "...", "confidence": 0.9}]}

Responses with an unknown protocol version are rejected.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, replace
from enum import Enum

from .errors import InvalidResponse
from .httpclient import post_json
from .ingest.annotations import AnnotationEntry, AnnotationSet, BBox
from .ingest.subtitles import Transcript
from .kinds import KIND_NAMES, ElementKind
from .slideseg import SlideSegment

log = logging.getLogger(__name__)

DETECTOR_PROTOCOL = "detector/1"
FALLBACK_CONFIDENCE = 0.5

# screen strip where generated subtitles render; used for cue-derived elements
SUBTITLE_BBOX = BBox(0.1, 0.85, 0.8, 0.1)


class Provenance(Enum):
    DETECTOR_CLIENT = "DetectorClient"
    ANNOTATION = "Annotation"
    FALLBACK = "Fallback"


@dataclass(frozen=True)
class Element:
    id: str
    kind: ElementKind
    segment_index: int
    t_start_ms: int
    t_end_ms: int
    bbox: BBox
    text: str | None
    provenance: Provenance
    confidence: float
    concept_ids: tuple[str, ...] = ()


@dataclass(frozen=True)
class DroppedEntry:
    source: str
    reason: str


# --- detector client --------------------------------------------------------

def classify_via_client(endpoint: str, keyframes: list[tuple[int, str]],
                        timeout_s: float = 10.0
                        ) -> tuple[list[Element], list[DroppedEntry]]:
    """Ask the detector service to classify each keyframe.

    ``keyframes`` pairs each segment index with its keyframe asset reference.
    Invalid response entries are dropped with a recorded reason, never kept.
    """
    elements: list[Element] = []
    dropped: list[DroppedEntry] = []
    for segment_index, keyframe_ref in keyframes:
        response = post_json(endpoint, {
            "protocol": DETECTOR_PROTOCOL,
            "segment_index": segment_index,
            "keyframe_ref": keyframe_ref,
        }, timeout_s)
        if response.get("protocol") != DETECTOR_PROTOCOL:
            raise InvalidResponse(
                f"unknown detector protocol {response.get('protocol')!r}")
        entries = response.get("entries")
        if not isinstance(entries, list):
            raise InvalidResponse("detector response missing 'entries' list")
        for i, entry in enumerate(entries):
            source = f"segment {segment_index} entry {i}"
            element = _element_from_client_entry(entry, segment_index, source,
                                                 dropped)
            if element is not None:
                elements.append(element)
    for drop in dropped:
        log.warning("detector entry dropped (%s): %s", drop.source, drop.reason)
    return elements, dropped


def _element_from_client_entry(entry: object, segment_index: int, source: str,
                               dropped: list[DroppedEntry]) -> Element | None:
    if not isinstance(entry, dict):
        dropped.append(DroppedEntry(source, "entry is not an object"))
        return None
    kind_name = entry.get("kind")
    if kind_name not in KIND_NAMES:
        dropped.append(DroppedEntry(source, f"unknown kind {kind_name!r}"))
        return None
    bbox_raw = entry.get("bbox")
    if (not isinstance(bbox_raw, list) or len(bbox_raw) != 4
            or not all(isinstance(v, (int, float)) and not isinstance(v, bool)
                       for v in bbox_raw)):
        dropped.append(DroppedEntry(source, "bbox is not [x, y, w, h]"))
        return None
    x, y, w, h = (float(v) for v in bbox_raw)
    if not (0 <= x <= 1 and 0 <= y <= 1 and 0 <= w <= 1 and 0 <= h <= 1
            and x + w <= 1 + 1e-9 and y + h <= 1 + 1e-9):
        dropped.append(DroppedEntry(source, "bbox not normalized"))
        return None
    confidence = entry.get("confidence", 1.0)
    if not isinstance(confidence, (int, float)) or isinstance(confidence, bool) \
            or not 0 <= confidence <= 1:
        dropped.append(DroppedEntry(source, "confidence outside [0, 1]"))
        return None
    text = entry.get("text")
    if text is not None and not isinstance(text, str):
        dropped.append(DroppedEntry(source, "text is not a string"))
        return None
    return Element(
        id="", kind=ElementKind(kind_name), segment_index=segment_index,
        t_start_ms=0, t_end_ms=0,  # timed when snapped to its segment
        bbox=BBox(x, y, min(w, 1.0 - x), min(h, 1.0 - y)), text=text,
        provenance=Provenance.DETECTOR_CLIENT, confidence=float(confidence))


# --- rule-based fallback ------------------------------------------------------

_CODE_PUNCT = set("{}()[]=<>;:.,+-*/&|%!#_")


def symbol_ratio(text: str) -> float:
    visible = [c for c in text if not c.isspace()]
    if not visible:
        return 0.0
    symbols = sum(1 for c in visible if not c.isalnum())
    return symbols / len(visible)


def code_punct_density(text: str) -> float:
    visible = [c for c in text if not c.isspace()]
    if not visible:
        return 0.0
    return sum(1 for c in visible if c in _CODE_PUNCT) / len(visible)


def has_indent_pattern(text: str) -> bool:
    """True when at least two lines share the same nonempty leading
    whitespace, the monospace-indent signature of code."""
    groups: dict[str, int] = {}
    for line in text.split("\n"):
        if not line.strip():
            continue
        indent = line[:len(line) - len(line.lstrip())]
        if indent:
            groups[indent] = groups.get(indent, 0) + 1
    return any(count >= 2 for count in groups.values())


def classify_block_text(text: str, equation_symbol_ratio: float = 0.3,
                        code_density: float = 0.15) -> ElementKind:
    if symbol_ratio(text) > equation_symbol_ratio:
        return ElementKind.EQUATION
    if has_indent_pattern(text) and code_punct_density(text) > code_density:
        return ElementKind.CODE_BLOCK
    return ElementKind.TEXT


def fallback_layout_detect(slide_text_boxes: AnnotationSet,
                           block_gap_norm: float = 0.02,
                           equation_symbol_ratio: float = 0.3,
                           code_density: float = 0.15) -> list[Element]:
    """Cluster raw text boxes into blocks by vertical gaps and classify each
    block with the equation/code heuristics."""
    boxes = [e for e in slide_text_boxes.entries if e.text]
    boxes.sort(key=lambda e: (e.bbox.y, e.bbox.x))
    clusters: list[list[AnnotationEntry]] = []
    for entry in boxes:
        if clusters:
            bottom = max(e.bbox.y + e.bbox.h for e in clusters[-1])
            if entry.bbox.y - bottom < block_gap_norm:
                clusters[-1].append(entry)
                continue
        clusters.append([entry])

    elements = []
    for cluster in clusters:
        x0 = min(e.bbox.x for e in cluster)
        y0 = min(e.bbox.y for e in cluster)
        x1 = max(e.bbox.x + e.bbox.w for e in cluster)
        y1 = max(e.bbox.y + e.bbox.h for e in cluster)
        text = "\n".join(e.text for e in cluster)
        kind = classify_block_text(text, equation_symbol_ratio, code_density)
        elements.append(Element(
            id="", kind=kind, segment_index=-1,
            t_start_ms=min(e.t_start_ms for e in cluster),
            t_end_ms=max(e.t_end_ms for e in cluster),
            bbox=BBox(x0, y0, x1 - x0, y1 - y0), text=text,
            provenance=Provenance.FALLBACK, confidence=FALLBACK_CONFIDENCE))
    return elements


# --- auxiliary classification -------------------------------------------------

QUESTION_DENSITY = 0.05


def _lexicon_patterns(words: list[str]) -> list[re.Pattern]:
    patterns = []
    for word in words:
        if re.fullmatch(r"[\w ]+", word):
            patterns.append(re.compile(rf"\b{re.escape(word)}\b", re.IGNORECASE))
        else:
            patterns.append(re.compile(re.escape(word), re.IGNORECASE))
    return patterns


class CueLexicon:
    """Word/phrase matcher for the test and example cue lexicons."""

    def __init__(self, words: list[str]):
        self.words = list(words)
        self._patterns = _lexicon_patterns(self.words)

    def matches(self, text: str) -> bool:
        return any(p.search(text) for p in self._patterns)


def question_mark_density(text: str) -> float:
    visible = [c for c in text if not c.isspace()]
    if not visible:
        return 0.0
    return text.count("?") / len(visible)


def is_test_text(text: str, lexicon: CueLexicon) -> bool:
    return lexicon.matches(text) or question_mark_density(text) > QUESTION_DENSITY


def classify_auxiliary(elements: list[Element], transcript: Transcript,
                       annotations: AnnotationSet,
                       test_lexicon: CueLexicon,
                       example_lexicon: CueLexicon,
                       subtitle_elements: bool = True) -> list[Element]:
    """Apply the auxiliary taxonomy: relabel Test/Example blocks, synthesize
    TeacherImage elements from head flags and Subtitle elements from cues,
    and label matching cue windows."""
    out: list[Element] = []
    for element in elements:
        if element.kind.is_basic and element.text:
            if is_test_text(element.text, test_lexicon):
                element = replace(element, kind=ElementKind.TEST)
            elif example_lexicon.matches(element.text):
                element = replace(element, kind=ElementKind.EXAMPLE)
        out.append(element)

    for entry in annotations.entries:
        if entry.teacher_head:
            out.append(Element(
                id="", kind=ElementKind.TEACHER_IMAGE, segment_index=-1,
                t_start_ms=entry.t_start_ms, t_end_ms=entry.t_end_ms,
                bbox=entry.bbox, text=None,
                provenance=Provenance.ANNOTATION, confidence=1.0))

    for cue in transcript.cues:
        if is_test_text(cue.text, test_lexicon):
            cue_kind = ElementKind.TEST
        elif example_lexicon.matches(cue.text):
            cue_kind = ElementKind.EXAMPLE
        else:
            cue_kind = None
        if cue_kind is not None:
            out.append(Element(
                id="", kind=cue_kind, segment_index=-1,
                t_start_ms=cue.start_ms, t_end_ms=cue.end_ms,
                bbox=SUBTITLE_BBOX, text=cue.text,
                provenance=Provenance.FALLBACK,
                confidence=FALLBACK_CONFIDENCE))
        if subtitle_elements:
            out.append(Element(
                id="", kind=ElementKind.SUBTITLE, segment_index=-1,
                t_start_ms=cue.start_ms, t_end_ms=cue.end_ms,
                bbox=SUBTITLE_BBOX, text=cue.text,
                provenance=Provenance.FALLBACK,
                confidence=FALLBACK_CONFIDENCE))
    return out


# --- assembly helpers ---------------------------------------------------------

def elements_from_annotations(annotations: AnnotationSet) -> list[Element]:
    """Entries carrying an explicit kind hint become elements directly."""
    out = []
    for entry in annotations.entries:
        if entry.kind_hint is None or entry.teacher_head:
            continue
        out.append(Element(
            id="", kind=ElementKind(entry.kind_hint), segment_index=-1,
            t_start_ms=entry.t_start_ms, t_end_ms=entry.t_end_ms,
            bbox=entry.bbox, text=entry.text,
            provenance=Provenance.ANNOTATION, confidence=1.0))
    return out


def hintless_text_boxes(annotations: AnnotationSet) -> AnnotationSet:
    return AnnotationSet(tuple(
        e for e in annotations.entries
        if e.kind_hint is None and e.text and not e.teacher_head))


def resolve_conflicts(client_elements: list[Element],
                      annotation_elements: list[Element],
                      iou_threshold: float = 0.5) -> list[Element]:
    """Annotation elements win over detector elements overlapping > IoU."""
    kept = []
    for ce in client_elements:
        shadowed = any(
            ce.segment_index == ae.segment_index
            and ce.bbox.iou(ae.bbox) > iou_threshold
            for ae in annotation_elements)
        if not shadowed:
            kept.append(ce)
    return annotation_elements + kept


def snap_to_segments(elements: list[Element],
                     segments: list[SlideSegment]) -> list[Element]:
    """Clip each element's time range into the single segment it overlaps
    most, so every element lies inside exactly one segment."""
    out = []
    for element in elements:
        best, overlap = None, -1
        for seg in segments:
            o = min(element.t_end_ms, seg.end_ms) - max(element.t_start_ms, seg.start_ms)
            if o > overlap:
                best, overlap = seg, o
        start = max(element.t_start_ms, best.start_ms)
        end = min(element.t_end_ms, best.end_ms)
        if end <= start:
            # zero-length or out-of-range element: pin to the segment start
            start, end = best.start_ms, min(best.start_ms + 1, best.end_ms)
        out.append(replace(element, segment_index=best.index,
                           t_start_ms=start, t_end_ms=end))
    return out


def assign_ids(elements: list[Element]) -> list[Element]:
    """Deterministic ids in (time, position, kind) order."""
    ordered = sorted(elements, key=lambda e: (
        e.t_start_ms, e.t_end_ms, e.bbox.y, e.bbox.x, e.kind.value, e.text or ""))
    return [replace(e, id=f"e{i:04d}") for i, e in enumerate(ordered)]

