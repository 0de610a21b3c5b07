"""Embedded-visualization geometry: glyph mapping, radial concept views,
cognition-stage assignment, and the time-keyed highlight tracks.

Everything here is a pure function of the pipeline data; coordinates are
normalized and the player scales them at render time.  The radial view uses
a clock-like angular origin: 12 o'clock, clockwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .concepts import Concept, active_concept_at
from .elements import Element
from .errors import OutOfRange
from .ingest.subtitles import Transcript
from .kinds import ElementKind
from .relations import ConceptGraph, RelationKind
from .text import Lemmatizer, default_lemmatize


class GlyphShape(Enum):
    CIRCLE = "Circle"
    RECTANGLE = "Rectangle"
    HEXAGON = "Hexagon"
    TRIANGLE = "Triangle"


class ColorRole(Enum):
    CONCEPT_BLUE = "ConceptBlue"
    FIGURE_TABLE_GREEN = "FigureTableGreen"
    EQUATION_CODE_RED = "EquationCodeRed"
    EXAMPLE_TEST_YELLOW = "ExampleTestYellow"


@dataclass(frozen=True)
class GlyphSpec:
    shape: GlyphShape
    color_role: ColorRole


# Concept-carrying text: blue circle.  Figures & tables: green rectangle.
# Equations & code: red hexagon.  Examples & tests: yellow triangle.
# Teacher images and subtitles are overlay-only and carry no glyph.
_GLYPH_TABLE: dict[ElementKind, GlyphSpec | None] = {
    ElementKind.TEXT: GlyphSpec(GlyphShape.CIRCLE, ColorRole.CONCEPT_BLUE),
    ElementKind.FIGURE: GlyphSpec(GlyphShape.RECTANGLE, ColorRole.FIGURE_TABLE_GREEN),
    ElementKind.TABLE: GlyphSpec(GlyphShape.RECTANGLE, ColorRole.FIGURE_TABLE_GREEN),
    ElementKind.EQUATION: GlyphSpec(GlyphShape.HEXAGON, ColorRole.EQUATION_CODE_RED),
    ElementKind.CODE_BLOCK: GlyphSpec(GlyphShape.HEXAGON, ColorRole.EQUATION_CODE_RED),
    ElementKind.EXAMPLE: GlyphSpec(GlyphShape.TRIANGLE, ColorRole.EXAMPLE_TEST_YELLOW),
    ElementKind.TEST: GlyphSpec(GlyphShape.TRIANGLE, ColorRole.EXAMPLE_TEST_YELLOW),
    ElementKind.TEACHER_IMAGE: None,
    ElementKind.SUBTITLE: None,
}

# light-to-dark blue ramp for the concept center (low to high importance)
IMPORTANCE_RAMP = ("#deebf7", "#9ecae1", "#6baed6", "#3182bd", "#08519c")

TOP_ANGLE = -math.pi / 2
FULL_TURN = 2 * math.pi


def element_glyph(kind: ElementKind) -> GlyphSpec | None:
    return _GLYPH_TABLE[kind]


def timeline_angle(t_ms: int, duration_ms: int) -> float:
    """Clock mapping of course time: 12 o'clock start, clockwise, one full
    turn over the course; t == duration wraps back to the top."""
    if t_ms < 0 or t_ms > duration_ms:
        raise OutOfRange(f"t={t_ms} outside [0, {duration_ms}]")
    angle = TOP_ANGLE + FULL_TURN * (t_ms / duration_ms)
    if angle >= TOP_ANGLE + FULL_TURN:
        angle -= FULL_TURN
    return angle


class MarkerKind(Enum):
    ASSOC_CIRCLE_LIGHT = "AssocCircleLight"
    SIM_CIRCLE_DARK = "SimCircleDark"


class ConnectorKind(Enum):
    CURVE = "Curve"
    ORTHOGONAL_TICK = "OrthogonalTick"


@dataclass(frozen=True)
class InnerMarker:
    angle_rad: float
    kind: MarkerKind
    connector: ConnectorKind
    target_concept: str


@dataclass(frozen=True)
class Arc:
    start_angle: float
    end_angle: float


@dataclass(frozen=True)
class SubBand:
    concept_id: str
    offset_norm: float
    length_norm: float


@dataclass(frozen=True)
class RadialLayout:
    concept_id: str
    center_color_step: int
    center_color: str
    radius_px_norm: float
    inner_markers: tuple[InnerMarker, ...]
    arcs: tuple[Arc, ...]
    outer_ring: tuple[str, ...]
    sub_bands: tuple[SubBand, ...]


def importance_color_steps(importances: list[float]) -> list[int]:
    """Five-step ramp with thresholds at equal quantiles of the course."""
    if not importances:
        return []
    thresholds = np.quantile(importances, [0.2, 0.4, 0.6, 0.8])
    return [int(np.searchsorted(thresholds, imp, side="right"))
            for imp in importances]


def first_comention_ms(a: Concept, b: Concept) -> int:
    """Earliest time both concepts are mentioned in the same cue; falls back
    to the other concept's first mention when they never share a cue."""
    cues_a = {m.location: m.t_ms for m in a.mentions if m.location.startswith("cue:")}
    shared = [m.t_ms for m in b.mentions if m.location in cues_a]
    if shared:
        return min(shared)
    return b.first_mention_ms


def radial_layout(concept: Concept, graph: ConceptGraph,
                  demonstration: list[Element], duration_ms: int,
                  max_duration_ms: int, color_step: int,
                  r_min: float = 0.35, r_max: float = 1.0) -> RadialLayout:
    by_id = {c.id: c for c in graph.concepts}

    markers = []
    for kind, marker_kind, connector in (
            (RelationKind.ASSOCIATION, MarkerKind.ASSOC_CIRCLE_LIGHT,
             ConnectorKind.CURVE),
            (RelationKind.SIMILARITY, MarkerKind.SIM_CIRCLE_DARK,
             ConnectorKind.ORTHOGONAL_TICK)):
        for other_id, _weight in graph.neighbors(concept.id, kind):
            t = first_comention_ms(concept, by_id[other_id])
            markers.append((t, other_id, marker_kind, connector))
    markers.sort(key=lambda m: (m[0], m[1]))
    inner = tuple(
        InnerMarker(timeline_angle(min(t, duration_ms), duration_ms),
                    marker_kind, connector, other_id)
        for t, other_id, marker_kind, connector in markers)

    arcs = []
    for start, end in concept.intervals:
        start_angle = timeline_angle(min(start, duration_ms), duration_ms)
        sweep = FULL_TURN * (min(end, duration_ms) - start) / duration_ms
        arcs.append(Arc(start_angle, start_angle + sweep))

    if max_duration_ms > 0:
        scale = math.sqrt(concept.duration_ms / max_duration_ms)
    else:
        scale = 0.0
    radius = r_min + (r_max - r_min) * scale

    children = sorted(graph.inclusion_children(concept.id))
    sub_bands = []
    for child_id, _weight in children:
        child = by_id[child_id]
        sub_bands.append(SubBand(
            child_id,
            child.first_mention_ms / duration_ms,
            child.duration_ms / duration_ms))
    sub_bands.sort(key=lambda b: (b.offset_norm, b.concept_id))

    ring = tuple(e.id for e in sorted(demonstration,
                                      key=lambda e: (e.t_start_ms, e.id)))
    return RadialLayout(concept.id, color_step, IMPORTANCE_RAMP[color_step],
                        radius, inner, tuple(arcs), ring, tuple(sub_bands))


# --- cognition stages ---------------------------------------------------------

@dataclass(frozen=True)
class StageAssignment:
    concept_id: str
    preparation: tuple[str, ...]    # prerequisite concept ids
    demonstration: tuple[str, ...]  # element ids shown while explaining
    application: tuple[str, ...]    # element ids applying the concept


def overlaps_intervals(element: Element,
                       intervals: tuple[tuple[int, int], ...]) -> bool:
    return any(element.t_start_ms < end and element.t_end_ms > start
               for start, end in intervals)


def stage_assign(concept: Concept, graph: ConceptGraph,
                 elements: list[Element],
                 follow_ms: int = 60000) -> StageAssignment:
    by_id = {c.id: c for c in graph.concepts}
    related = {other for kind in (RelationKind.ASSOCIATION, RelationKind.INCLUSION)
               for other, _ in graph.neighbors(concept.id, kind)}
    preparation = sorted(
        (by_id[cid] for cid in related
         if by_id[cid].first_mention_ms < concept.first_mention_ms),
        key=lambda c: (c.first_mention_ms, c.id))

    demonstration = sorted(
        (e for e in elements
         if e.kind.is_basic and overlaps_intervals(e, concept.intervals)),
        key=lambda e: (e.t_start_ms, e.id))

    span_end = concept.intervals[-1][1] if concept.intervals else 0
    application = sorted(
        (e for e in elements
         if e.kind in (ElementKind.EXAMPLE, ElementKind.TEST)
         and span_end <= e.t_start_ms <= span_end + follow_ms),
        key=lambda e: (e.t_start_ms, e.id))

    return StageAssignment(
        concept.id,
        tuple(c.id for c in preparation),
        tuple(e.id for e in demonstration),
        tuple(e.id for e in application))


# --- highlight tracks -----------------------------------------------------------

N_ICON_SLOTS = 8


@dataclass(frozen=True)
class HighlightBox:
    element_id: str
    t_start_ms: int
    t_end_ms: int
    color_role: ColorRole


@dataclass(frozen=True)
class EmphasisSpan:
    cue_index: int
    concept_id: str
    spans: tuple[tuple[int, int], ...]  # character ranges within the cue


@dataclass(frozen=True)
class IconPlacement:
    element_id: str
    slot: int  # 0..7 clockwise from top
    shape: GlyphShape
    color_role: ColorRole


@dataclass(frozen=True)
class FocusCluster:
    element_id: str
    concept_id: str
    icons: tuple[IconPlacement, ...]


def preferred_slot(anchor: Element, target: Element) -> int:
    """Slot nearest the target's direction from the anchor, 0 at the top,
    counting clockwise (screen y grows downward)."""
    ax, ay = anchor.bbox.center
    tx, ty = target.bbox.center
    dx, dy = tx - ax, ty - ay
    if dx == 0 and dy == 0:
        return 0
    clockwise_from_up = math.atan2(dx, -dy)
    return round(clockwise_from_up / (math.pi / 4)) % N_ICON_SLOTS


def assign_slots(anchor: Element, targets: list[Element]) -> list[tuple[Element, int]]:
    """Nearest-free-slot assignment, clockwise preferred on ties; targets
    beyond the eight slots are dropped."""
    taken: set[int] = set()
    placed = []
    for target in targets:
        want = preferred_slot(anchor, target)
        slot = None
        for distance in range(N_ICON_SLOTS):
            for candidate in ((want + distance) % N_ICON_SLOTS,
                              (want - distance) % N_ICON_SLOTS):
                if candidate not in taken:
                    slot = candidate
                    break
            if slot is not None:
                break
        if slot is None:
            break
        taken.add(slot)
        placed.append((target, slot))
    return placed


@dataclass(frozen=True)
class TrackSet:
    highlights: tuple[HighlightBox, ...]
    subtitle_emphasis: tuple[EmphasisSpan, ...]
    focus_clusters: tuple[FocusCluster, ...]


def highlight_tracks(concepts: list[Concept], elements: list[Element],
                     transcript: Transcript,
                     demonstration_by_concept: dict[str, tuple[str, ...]],
                     lemmatize: Lemmatizer = default_lemmatize) -> TrackSet:
    boxes = tuple(
        HighlightBox(e.id, e.t_start_ms, e.t_end_ms,
                     element_glyph(e.kind).color_role)
        for e in elements if element_glyph(e.kind) is not None)

    by_id = {c.id: c for c in concepts}
    emphasis = []
    for idx, cue in enumerate(transcript.cues):
        active = active_concept_at(cue.start_ms, concepts)
        if active is None:
            continue
        label_seq = active.label.split(" ")
        cue_lemmas = [lemmatize(span.token.lower()) for span in cue.token_spans]
        spans = []
        n = len(label_seq)
        for i in range(len(cue_lemmas) - n + 1):
            if cue_lemmas[i:i + n] == label_seq:
                spans.append((cue.token_spans[i].start,
                              cue.token_spans[i + n - 1].end))
        if spans:
            emphasis.append(EmphasisSpan(idx, active.id, tuple(spans)))

    element_by_id = {e.id: e for e in elements}
    clusters = []
    for element in sorted(elements, key=lambda e: e.id):
        if not element.concept_ids:
            continue
        anchor_concept = min(
            (by_id[cid] for cid in element.concept_ids if cid in by_id),
            key=lambda c: (-c.importance, c.id), default=None)
        if anchor_concept is None:
            continue
        targets = []
        for eid in demonstration_by_concept.get(anchor_concept.id, ()):
            if eid == element.id:
                continue
            target = element_by_id[eid]
            if element_glyph(target.kind) is not None:
                targets.append(target)
        targets.sort(key=lambda e: (e.t_start_ms, e.id))
        icons = tuple(
            IconPlacement(target.id, slot, element_glyph(target.kind).shape,
                          element_glyph(target.kind).color_role)
            for target, slot in assign_slots(element, targets))
        if icons:
            clusters.append(FocusCluster(element.id, anchor_concept.id, icons))

    return TrackSet(boxes, tuple(emphasis), tuple(clusters))
