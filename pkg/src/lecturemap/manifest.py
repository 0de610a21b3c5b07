"""The interaction state machine and the versioned augmentation manifest.

The player's three stages (Playing, Focused, PausedFull) transition through
a data table: unlisted (state, event) pairs keep the state unchanged, so a
lookup plus a handful of named effects gives a total, deterministic
function.  The same table is embedded in the manifest and interpreted by
the browser player, keeping engine and UI behavior identical by
construction.

Manifests serialize canonically: sorted keys, compact separators, floats
rounded to six decimals.  Identical inputs therefore produce identical
bytes, and the strong HTTP validator is a content hash.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from typing import Callable

from .errors import DanglingReference, SchemaVersionMismatch
from .kinds import KIND_NAMES

SCHEMA_VERSION = "1"
SUPPORTED_VERSIONS = (SCHEMA_VERSION,)

STATE_KINDS = ("Playing", "Focused", "PausedFull")
EVENT_KINDS = ("HoverStart", "HoverDwellElapsed", "HoverEnd", "ClickElement",
               "PauseButton", "PlayButton", "Seek", "TimeNodeClick",
               "ConceptAnchorClick")

# The transition table.  Rows omit (state, event) pairs that leave the state
# unchanged.  Effects run in order; a failed guard keeps the current state.
TRANSITION_TABLE: dict = {
    "Playing": {
        "HoverDwellElapsed": {
            "next": "Focused",
            "guard": "dwell_at_least_threshold",
            "effects": ["target_from_event", "entered_at_now"],
        },
        "ClickElement": {"next": "PausedFull",
                         "effects": ["anchor_element_from_event"]},
        "PauseButton": {"next": "PausedFull",
                        "effects": ["anchor_active_concept"]},
        "Seek": {"next": "Playing", "effects": ["time_from_event"]},
        "TimeNodeClick": {"next": "Playing", "effects": ["time_from_event"]},
    },
    "Focused": {
        "HoverEnd": {"next": "Playing", "effects": ["clear_target"]},
        "ClickElement": {"next": "PausedFull",
                         "effects": ["anchor_element_from_event", "clear_target"]},
        "Seek": {"next": "Focused", "effects": ["time_from_event"]},
        "TimeNodeClick": {"next": "Focused", "effects": ["time_from_event"]},
    },
    "PausedFull": {
        "PlayButton": {"next": "Playing", "effects": ["clear_anchor"]},
        "ConceptAnchorClick": {"next": "Playing",
                               "effects": ["time_from_event", "clear_anchor"]},
        "Seek": {"next": "PausedFull", "effects": ["time_from_event"]},
        "TimeNodeClick": {"next": "PausedFull", "effects": ["time_from_event"]},
    },
}


@dataclass(frozen=True)
class PlayerState:
    kind: str
    t_ms: int
    target_element: str | None = None  # Focused
    entered_at_ms: int | None = None   # Focused
    anchor_kind: str | None = None     # PausedFull: "concept" | "element"
    anchor_id: str | None = None       # PausedFull

    @staticmethod
    def playing(t_ms: int) -> "PlayerState":
        return PlayerState("Playing", t_ms)


@dataclass(frozen=True)
class InteractionEvent:
    kind: str
    element_id: str | None = None
    concept_id: str | None = None
    dwell_ms: int | None = None
    t_ms: int | None = None


@dataclass(frozen=True)
class TransitionContext:
    duration_ms: int
    focus_dwell_ms: int = 3000
    hover_grace_ms: int = 500
    active_concept_resolver: Callable[[int], str | None] = lambda t: None


def _clamp_time(t_ms: int | None, duration_ms: int) -> int:
    if t_ms is None:
        return 0
    return max(0, min(duration_ms, t_ms))


def transition(state: PlayerState, event: InteractionEvent,
               ctx: TransitionContext,
               table: dict | None = None) -> PlayerState:
    """Interpret the transition table: a total, pure function."""
    table = TRANSITION_TABLE if table is None else table
    row = table.get(state.kind, {}).get(event.kind)
    if row is None:
        return state

    if row.get("guard") == "dwell_at_least_threshold":
        if event.dwell_ms is None or event.dwell_ms < ctx.focus_dwell_ms:
            return state

    fields = {
        "kind": row["next"],
        "t_ms": state.t_ms,
        "target_element": state.target_element,
        "entered_at_ms": state.entered_at_ms,
        "anchor_kind": state.anchor_kind,
        "anchor_id": state.anchor_id,
    }
    for effect in row.get("effects", ()):
        if effect == "target_from_event":
            if event.element_id is None:
                return state
            fields["target_element"] = event.element_id
        elif effect == "entered_at_now":
            fields["entered_at_ms"] = state.t_ms
        elif effect == "anchor_element_from_event":
            if event.element_id is None:
                return state
            fields["anchor_kind"] = "element"
            fields["anchor_id"] = event.element_id
        elif effect == "anchor_active_concept":
            fields["anchor_kind"] = "concept"
            fields["anchor_id"] = ctx.active_concept_resolver(state.t_ms)
        elif effect == "time_from_event":
            fields["t_ms"] = _clamp_time(event.t_ms, ctx.duration_ms)
        elif effect == "clear_target":
            fields["target_element"] = None
            fields["entered_at_ms"] = None
        elif effect == "clear_anchor":
            fields["anchor_kind"] = None
            fields["anchor_id"] = None
        else:
            raise AssertionError(f"unknown effect {effect!r}")
    if fields["kind"] != "Focused":
        fields["target_element"] = None
        fields["entered_at_ms"] = None
    if fields["kind"] != "PausedFull":
        fields["anchor_kind"] = None
        fields["anchor_id"] = None
    return PlayerState(**fields)


# --- canonical serialization -------------------------------------------------

FLOAT_PRECISION = 6


def _canonicalize(value):
    if isinstance(value, float):
        rounded = round(value, FLOAT_PRECISION)
        return 0.0 if rounded == 0 else rounded
    if isinstance(value, dict):
        return {str(k): _canonicalize(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_canonicalize(v) for v in value]
    return value


def canonical_bytes(document: dict) -> bytes:
    return json.dumps(_canonicalize(document), sort_keys=True,
                      separators=(",", ":"), ensure_ascii=False).encode("utf-8")


def manifest_hash(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


# --- validation ----------------------------------------------------------------

@dataclass(frozen=True)
class Violation:
    path: str
    message: str


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def add(self, path: str, message: str) -> None:
        self.violations.append(Violation(path, message))

    def as_dict(self) -> dict:
        return {"ok": self.ok,
                "violations": [{"path": v.path, "message": v.message}
                               for v in self.violations]}


_DELIVERY_STYLES = ("WhiteboardAnnotation", "SlideBased", "DirectLecture")
_RELATION_KINDS = ("Association", "Inclusion", "Similarity")


def _expect(report: ValidationReport, obj: dict, key: str, types, path: str):
    if key not in obj:
        report.add(f"{path}/{key}", "missing required field")
        return None
    value = obj[key]
    if not isinstance(value, types) or (isinstance(value, bool) and types is not bool):
        report.add(f"{path}/{key}", f"wrong type {type(value).__name__}")
        return None
    return value


def validate_manifest(data: bytes) -> ValidationReport:
    """Full structural and referential validation; violations are report
    entries, never exceptions."""
    report = ValidationReport()
    try:
        doc = json.loads(data.decode("utf-8"))
    except UnicodeDecodeError as exc:
        report.add("<bytes>", f"not UTF-8 at byte {exc.start}")
        return report
    except json.JSONDecodeError as exc:
        report.add("<bytes>", f"JSON parse error at byte {exc.pos}: {exc.msg}")
        return report
    if not isinstance(doc, dict):
        report.add("", "manifest must be a JSON object")
        return report
    validate_manifest_obj(doc, report)
    return report


def validate_manifest_obj(doc: dict, report: ValidationReport) -> None:
    version = doc.get("schema_version")
    if version not in SUPPORTED_VERSIONS:
        report.add("schema_version", f"unsupported version {version!r}")

    duration = _expect(report, doc, "duration_ms", int, "")
    _expect(report, doc, "course_id", str, "")

    segments = _expect(report, doc, "segments", list, "") or []
    segment_indices = set()
    prev_end = 0
    for i, seg in enumerate(segments):
        path = f"segments/{i}"
        if not isinstance(seg, dict):
            report.add(path, "segment must be an object")
            continue
        index = _expect(report, seg, "index", int, path)
        start = _expect(report, seg, "start_ms", int, path)
        end = _expect(report, seg, "end_ms", int, path)
        key_t = _expect(report, seg, "keyframe_t_ms", int, path)
        conf = _expect(report, seg, "boundary_confidence", (int, float), path)
        if index is not None:
            segment_indices.add(index)
            if index != i:
                report.add(f"{path}/index", f"expected {i}, got {index}")
        if start is not None and end is not None:
            if start >= end:
                report.add(f"{path}/end_ms", f"{end} not after start {start}")
            if start != prev_end:
                report.add(f"{path}/start_ms",
                           f"gap: starts at {start}, previous ended {prev_end}")
            prev_end = end
            if key_t is not None and not start <= key_t <= end:
                report.add(f"{path}/keyframe_t_ms", "outside its segment")
        if conf is not None and not 0 <= conf <= 1:
            report.add(f"{path}/boundary_confidence", f"{conf} outside [0, 1]")
    if duration is not None and segments and prev_end != duration:
        report.add("segments", f"partition ends at {prev_end}, not {duration}")

    elements = _expect(report, doc, "elements", list, "") or []
    element_ids = set()
    for i, el in enumerate(elements):
        path = f"elements/{i}"
        if not isinstance(el, dict):
            report.add(path, "element must be an object")
            continue
        eid = _expect(report, el, "id", str, path)
        if eid is not None:
            if eid in element_ids:
                report.add(f"{path}/id", f"duplicate id {eid}")
            element_ids.add(eid)
        kind = _expect(report, el, "kind", str, path)
        if kind is not None and kind not in KIND_NAMES:
            report.add(f"{path}/kind", f"unknown kind {kind!r}")
        seg_idx = _expect(report, el, "segment_index", int, path)
        if seg_idx is not None and seg_idx not in segment_indices:
            report.add(f"{path}/segment_index", f"no segment {seg_idx}")
        bbox = _expect(report, el, "bbox", list, path)
        if bbox is not None:
            if len(bbox) != 4 or not all(
                    isinstance(v, (int, float)) and not isinstance(v, bool)
                    for v in bbox):
                report.add(f"{path}/bbox", "expected [x, y, w, h]")
            elif not all(0 <= v <= 1 for v in bbox) or bbox[0] + bbox[2] > 1 + 1e-6 \
                    or bbox[1] + bbox[3] > 1 + 1e-6:
                report.add(f"{path}/bbox", "outside the unit square")
        conf = _expect(report, el, "confidence", (int, float), path)
        if conf is not None and not 0 <= conf <= 1:
            report.add(f"{path}/confidence", f"{conf} outside [0, 1]")

    concepts = _expect(report, doc, "concepts", list, "") or []
    concept_ids = set()
    for i, con in enumerate(concepts):
        path = f"concepts/{i}"
        if not isinstance(con, dict):
            report.add(path, "concept must be an object")
            continue
        cid = _expect(report, con, "id", str, path)
        if cid is not None:
            if cid in concept_ids:
                report.add(f"{path}/id", f"duplicate id {cid}")
            concept_ids.add(cid)
        mentions = _expect(report, con, "mentions", list, path)
        if mentions is not None and not mentions:
            report.add(f"{path}/mentions", "concept has no mentions")
        dur = _expect(report, con, "duration_ms", int, path)
        if dur is not None and dur <= 0:
            report.add(f"{path}/duration_ms", f"{dur} not positive")
        imp = _expect(report, con, "importance", (int, float), path)
        if imp is not None and not 0 <= imp <= 1:
            report.add(f"{path}/importance", f"{imp} outside [0, 1]")
        style = _expect(report, con, "delivery_style", str, path)
        if style is not None and style not in _DELIVERY_STYLES:
            report.add(f"{path}/delivery_style", f"unknown style {style!r}")
        if mentions:
            for j, m in enumerate(mentions):
                if not isinstance(m, dict):
                    report.add(f"{path}/mentions/{j}", "must be an object")
                    continue
                loc = m.get("location")
                if not isinstance(loc, str) or not (
                        loc.startswith("cue:") or loc in element_ids):
                    report.add(f"{path}/mentions/{j}/location",
                               f"unresolvable location {loc!r}")

    # back-references from elements to concepts
    for i, el in enumerate(elements):
        if isinstance(el, dict):
            for j, cid in enumerate(el.get("concept_ids", [])):
                if cid not in concept_ids:
                    report.add(f"elements/{i}/concept_ids/{j}",
                               f"unknown concept {cid!r}")

    relationships = _expect(report, doc, "relationships", list, "") or []
    seen_triples = set()
    inclusion_edges = []
    for i, rel in enumerate(relationships):
        path = f"relationships/{i}"
        if not isinstance(rel, dict):
            report.add(path, "relationship must be an object")
            continue
        src = _expect(report, rel, "src", str, path)
        dst = _expect(report, rel, "dst", str, path)
        kind = _expect(report, rel, "kind", str, path)
        weight = _expect(report, rel, "weight", (int, float), path)
        if kind is not None and kind not in _RELATION_KINDS:
            report.add(f"{path}/kind", f"unknown kind {kind!r}")
        for name, value in (("src", src), ("dst", dst)):
            if value is not None and value not in concept_ids:
                report.add(f"{path}/{name}", f"unknown concept {value!r}")
        if src is not None and dst is not None:
            if src == dst:
                report.add(path, "self-loop")
            triple = (src, dst, kind)
            if triple in seen_triples:
                report.add(path, f"duplicate triple {triple}")
            seen_triples.add(triple)
            if kind == "Inclusion":
                inclusion_edges.append((src, dst))
        if weight is not None and not 0 < weight <= 1:
            report.add(f"{path}/weight", f"{weight} outside (0, 1]")
    if _has_cycle(inclusion_edges):
        report.add("relationships", "inclusion subgraph is cyclic")

    tracks = _expect(report, doc, "tracks", dict, "")
    if tracks is not None:
        _validate_tracks(tracks, element_ids, concept_ids, duration, report)
    paused = _expect(report, doc, "paused_layout", dict, "")
    if paused is not None:
        _validate_paused(paused, element_ids, concept_ids, report)
    interaction = _expect(report, doc, "interaction", dict, "")
    if interaction is not None:
        _validate_interaction(interaction, report)


def _has_cycle(edges: list[tuple[str, str]]) -> bool:
    children: dict[str, list[str]] = {}
    indegree: dict[str, int] = {}
    for src, dst in edges:
        children.setdefault(src, []).append(dst)
        indegree[dst] = indegree.get(dst, 0) + 1
        indegree.setdefault(src, 0)
    ready = [n for n, d in indegree.items() if d == 0]
    seen = 0
    while ready:
        node = ready.pop()
        seen += 1
        for child in children.get(node, ()):
            indegree[child] -= 1
            if indegree[child] == 0:
                ready.append(child)
    return seen != len(indegree)


def _validate_tracks(tracks: dict, element_ids: set, concept_ids: set,
                     duration: int | None, report: ValidationReport) -> None:
    for i, box in enumerate(tracks.get("highlights", [])):
        if not isinstance(box, dict) or box.get("element_id") not in element_ids:
            report.add(f"tracks/highlights/{i}", "unresolvable element")
    for i, span in enumerate(tracks.get("subtitle_emphasis", [])):
        if not isinstance(span, dict) or span.get("concept_id") not in concept_ids:
            report.add(f"tracks/subtitle_emphasis/{i}", "unresolvable concept")
    for i, cluster in enumerate(tracks.get("focus_clusters", [])):
        path = f"tracks/focus_clusters/{i}"
        if not isinstance(cluster, dict) \
                or cluster.get("element_id") not in element_ids:
            report.add(path, "unresolvable element")
            continue
        slots = [icon.get("slot") for icon in cluster.get("icons", [])
                 if isinstance(icon, dict)]
        if len(slots) != len(set(slots)):
            report.add(f"{path}/icons", "duplicate icon slots")
        for j, icon in enumerate(cluster.get("icons", [])):
            if not isinstance(icon, dict) \
                    or icon.get("element_id") not in element_ids:
                report.add(f"{path}/icons/{j}", "unresolvable element")
    curve = tracks.get("importance_curve")
    if isinstance(curve, dict):
        prev_t = None
        for i, sample in enumerate(curve.get("samples", [])):
            path = f"tracks/importance_curve/samples/{i}"
            if not (isinstance(sample, list) and len(sample) == 2):
                report.add(path, "expected [t_ms, value]")
                continue
            t, v = sample
            if prev_t is not None and t <= prev_t:
                report.add(path, "t_ms not increasing")
            prev_t = t
            if not 0 <= v <= 1:
                report.add(path, f"value {v} outside [0, 1]")
    for i, node in enumerate(tracks.get("time_nodes", [])):
        path = f"tracks/time_nodes/{i}"
        if not isinstance(node, dict):
            report.add(path, "must be an object")
            continue
        t = node.get("t_ms")
        if duration is not None and isinstance(t, int) and not 0 <= t <= duration:
            report.add(f"{path}/t_ms", "outside the course")


def _validate_paused(paused: dict, element_ids: set, concept_ids: set,
                     report: ValidationReport) -> None:
    grouped: list[str] = []
    groups = paused.get("overview_groups", [])
    if len(groups) > 3:
        report.add("paused_layout/overview_groups", "more than three groups")
    for i, group in enumerate(groups):
        path = f"paused_layout/overview_groups/{i}"
        if not isinstance(group, dict):
            report.add(path, "must be an object")
            continue
        if group.get("style") not in _DELIVERY_STYLES:
            report.add(f"{path}/style", f"unknown style {group.get('style')!r}")
        for cid in group.get("concept_ids", []):
            if cid not in concept_ids:
                report.add(f"{path}/concept_ids", f"unknown concept {cid!r}")
            grouped.append(cid)
    if set(grouped) != concept_ids or len(grouped) != len(concept_ids):
        report.add("paused_layout/overview_groups",
                   "groups must cover every concept exactly once")

    for i, rad in enumerate(paused.get("radial_layouts", [])):
        path = f"paused_layout/radial_layouts/{i}"
        if not isinstance(rad, dict):
            report.add(path, "must be an object")
            continue
        if rad.get("concept_id") not in concept_ids:
            report.add(f"{path}/concept_id", "unknown concept")
        sweep = 0.0
        for j, arc in enumerate(rad.get("arcs", [])):
            if isinstance(arc, dict):
                sweep += arc.get("end_angle", 0) - arc.get("start_angle", 0)
        if sweep > 2 * math.pi + 1e-6:
            report.add(f"{path}/arcs", "total sweep exceeds a full turn")
        for j, marker in enumerate(rad.get("inner_markers", [])):
            if isinstance(marker, dict):
                angle = marker.get("angle_rad", 0)
                if not -math.pi / 2 - 1e-9 <= angle < 3 * math.pi / 2:
                    report.add(f"{path}/inner_markers/{j}/angle_rad",
                               f"{angle} outside [-pi/2, 3pi/2)")
                if marker.get("target_concept") not in concept_ids:
                    report.add(f"{path}/inner_markers/{j}", "unknown concept")
        for j, eid in enumerate(rad.get("outer_ring", [])):
            if eid not in element_ids:
                report.add(f"{path}/outer_ring/{j}", f"unknown element {eid!r}")
        for j, band in enumerate(rad.get("sub_bands", [])):
            if isinstance(band, dict) and band.get("concept_id") not in concept_ids:
                report.add(f"{path}/sub_bands/{j}", "unknown concept")

    for i, stage in enumerate(paused.get("stage_assignments", [])):
        path = f"paused_layout/stage_assignments/{i}"
        if not isinstance(stage, dict):
            report.add(path, "must be an object")
            continue
        if stage.get("concept_id") not in concept_ids:
            report.add(f"{path}/concept_id", "unknown concept")
        prep = stage.get("preparation", [])
        demo = stage.get("demonstration", [])
        app = stage.get("application", [])
        for cid in prep:
            if cid not in concept_ids:
                report.add(f"{path}/preparation", f"unknown concept {cid!r}")
        for name, ids in (("demonstration", demo), ("application", app)):
            for eid in ids:
                if eid not in element_ids:
                    report.add(f"{path}/{name}", f"unknown element {eid!r}")
        if set(demo) & set(app):
            report.add(path, "demonstration and application overlap")

    for i, entry in enumerate(paused.get("preview_entries", [])):
        if not isinstance(entry, dict) or entry.get("element_id") not in element_ids:
            report.add(f"paused_layout/preview_entries/{i}", "unresolvable element")


def _validate_interaction(interaction: dict, report: ValidationReport) -> None:
    config = interaction.get("config")
    if not isinstance(config, dict):
        report.add("interaction/config", "missing config object")
    else:
        for key in ("focus_dwell_ms", "hover_grace_ms", "follow_ms"):
            value = config.get(key)
            if not isinstance(value, int) or value < 0:
                report.add(f"interaction/config/{key}",
                           f"expected nonnegative integer, got {value!r}")
    table = interaction.get("transition_table")
    if not isinstance(table, dict):
        report.add("interaction/transition_table", "missing table")
        return
    for state, rows in table.items():
        if state not in STATE_KINDS:
            report.add(f"interaction/transition_table/{state}", "unknown state")
            continue
        if not isinstance(rows, dict):
            report.add(f"interaction/transition_table/{state}", "must be an object")
            continue
        for event, row in rows.items():
            path = f"interaction/transition_table/{state}/{event}"
            if event not in EVENT_KINDS:
                report.add(path, "unknown event")
            if not isinstance(row, dict) or row.get("next") not in STATE_KINDS:
                report.add(path, "row must name a valid next state")


# --- assembly ------------------------------------------------------------------

def build_manifest_document(course: dict) -> dict:
    """Attach schema version and the transition table, then fail fast on any
    dangling reference before the document ever reaches disk."""
    doc = dict(course)
    doc["schema_version"] = SCHEMA_VERSION
    doc.setdefault("interaction", {})
    doc["interaction"]["transition_table"] = TRANSITION_TABLE

    report = ValidationReport()
    validate_manifest_obj(doc, report)
    dangling = [v for v in report.violations
                if "unknown" in v.message or "unresolvable" in v.message]
    if dangling:
        first = dangling[0]
        raise DanglingReference(f"{first.path}: {first.message}")
    if not report.ok:
        first = report.violations[0]
        raise ValueError(f"built manifest invalid at {first.path}: {first.message}")
    return doc


def load_manifest(data: bytes) -> dict:
    """Parse manifest bytes for consumers that trust the producer."""
    doc = json.loads(data.decode("utf-8"))
    version = doc.get("schema_version")
    if version not in SUPPORTED_VERSIONS:
        raise SchemaVersionMismatch(f"unsupported schema version {version!r}")
    return doc
