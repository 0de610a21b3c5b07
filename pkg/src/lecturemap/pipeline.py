"""End-to-end build: run all analysis stages and write the manifest.

Stage order is fixed (ingest, slideseg, elements, concepts, relations,
structure, layout, manifest); each stage is timed and its warnings and drop
counts land in the build report.  A fatal stage error aborts the build with
the stage name attached.  Manifest bytes are a pure function of inputs and
config, so two builds over the same course are byte-identical.
"""

from __future__ import annotations

import json
import shutil
import time
from dataclasses import dataclass, field, replace
from pathlib import Path

from . import concepts as concepts_mod
from . import elements as elements_mod
from . import layout as layout_mod
from . import manifest as manifest_mod
from . import relations as relations_mod
from . import slideseg as slideseg_mod
from . import structure as structure_mod
from .config import BuildConfig, validate_config
from .elements import CueLexicon, Element
from .errors import BuildError, ClientUnreachable, LectureMapError
from .ingest import (AnnotationSet, Transcript, load_annotations, load_frames,
                     parse_subtitles, to_srt, to_webvtt)
from .text import load_lexicon
from importlib import resources

STAGES = ("ingest", "slideseg", "elements", "concepts", "relations",
          "structure", "layout", "manifest")


@dataclass
class StageRecord:
    name: str
    duration_ms: float = 0.0
    warnings: list[str] = field(default_factory=list)
    dropped: int = 0


@dataclass
class BuildResult:
    course_dir: Path
    manifest_path: Path
    manifest_bytes: bytes
    report: dict


class _StageRunner:
    def __init__(self):
        self.records: list[StageRecord] = []

    def run(self, name: str, fn):
        record = StageRecord(name)
        started = time.perf_counter()
        try:
            result = fn(record)
        except LectureMapError as exc:
            raise BuildError(name, str(exc)) from exc
        except OSError as exc:
            raise BuildError(name, str(exc)) from exc
        record.duration_ms = (time.perf_counter() - started) * 1000.0
        self.records.append(record)
        return result


def _subtitle_format(path: Path) -> str:
    if path.suffix.lower() == ".srt":
        return "srt"
    if path.suffix.lower() in (".vtt", ".webvtt"):
        return "webvtt"
    from .ingest import detect_format
    return detect_format(path.read_bytes())


def build_course(cfg: BuildConfig) -> BuildResult:
    validate_config(cfg)
    runner = _StageRunner()

    # --- ingest ---------------------------------------------------------
    def ingest_stage(record: StageRecord):
        subtitle_path = Path(cfg.subtitles)
        if not subtitle_path.is_file():
            raise BuildError("ingest", f"subtitle file missing: {subtitle_path}")
        fmt = _subtitle_format(subtitle_path)
        transcript = parse_subtitles(subtitle_path.read_bytes(), fmt)
        record.warnings += [f"subtitles line {w.line_no}: {w.reason}"
                            for w in transcript.warnings]
        record.dropped += len(transcript.warnings)

        series = load_frames(cfg.frames, cfg.sample_interval_ms,
                             cfg.histogram_bins, cfg.edge_gradient_threshold)
        record.warnings += [f"{w.source_ref}: {w.reason}" for w in series.warnings]

        if cfg.annotations:
            annotations = load_annotations(cfg.annotations)
        else:
            annotations = AnnotationSet(())
        return transcript, series, annotations

    transcript, series, annotations = runner.run("ingest", ingest_stage)
    times = series.times_ms
    frame_spacing = times[1] - times[0] if len(times) > 1 else cfg.sample_interval_ms
    duration_ms = max(transcript.duration_ms, times[-1] + frame_spacing)

    # --- slideseg -------------------------------------------------------
    def slideseg_stage(record: StageRecord):
        return slideseg_mod.segment_slides(
            series, cfg.emd_threshold, cfg.edge_change_threshold, duration_ms)

    segments, seg_report = runner.run("slideseg", slideseg_stage)

    # --- elements -------------------------------------------------------
    def elements_stage(record: StageRecord):
        direct = elements_mod.elements_from_annotations(annotations)
        client_elements: list[Element] = []
        used_client = False
        if cfg.detector_endpoint:
            keyframes = [(seg.index, _keyframe_ref(seg, series))
                         for seg in segments]
            try:
                client_elements, dropped = elements_mod.classify_via_client(
                    cfg.detector_endpoint, keyframes, cfg.client_timeout_s)
                record.dropped += len(dropped)
                record.warnings += [f"{d.source}: {d.reason}" for d in dropped]
                used_client = True
            except ClientUnreachable as exc:
                if cfg.abort_without_detector:
                    raise
                record.warnings.append(f"detector unreachable, using fallback: {exc}")
        if used_client:
            client_elements = [
                _time_client_element(el, segments) for el in client_elements]
            merged = elements_mod.resolve_conflicts(client_elements, direct)
        else:
            fallback = []
            boxes = elements_mod.hintless_text_boxes(annotations)
            for seg in segments:
                seg_boxes = AnnotationSet(tuple(
                    e for e in boxes.entries
                    if seg.contains(e.t_start_ms)))
                fallback += elements_mod.fallback_layout_detect(
                    seg_boxes, cfg.block_gap_norm, cfg.equation_symbol_ratio,
                    cfg.code_punct_density)
            merged = direct + fallback

        test_lex = CueLexicon(load_lexicon("test_lexicon.txt"))
        example_lex = CueLexicon(load_lexicon("example_lexicon.txt"))
        merged = elements_mod.classify_auxiliary(
            merged, transcript, annotations, test_lex, example_lex)
        merged = elements_mod.snap_to_segments(merged, segments)
        return elements_mod.assign_ids(merged)

    elements = runner.run("elements", elements_stage)

    # --- concepts -------------------------------------------------------
    def concepts_stage(record: StageRecord):
        ranked, streams = concepts_mod.extract_ranked_terms(
            transcript, elements, window=cfg.textrank_window,
            damping=cfg.textrank_damping, tol=cfg.textrank_tol,
            max_iter=cfg.textrank_max_iter)
        labels = concepts_mod.assemble_keyphrases(
            ranked, streams, cfg.top_term_fraction, cfg.max_concepts)

        mentions, linked_elements, dropped_labels = concepts_mod.link_mentions(
            [label for label, _ in labels], transcript, elements)
        record.dropped += len(dropped_labels)
        record.warnings += [f"concept {label!r} matched nowhere, dropped"
                            for label in dropped_labels]

        evidence = _delivery_evidence(segments, annotations, linked_elements)
        label_scores = dict(labels)
        built: list[concepts_mod.Concept] = []
        label_to_id: dict[str, str] = {}
        for label, _score in labels:
            if label not in mentions:
                continue
            duration, intervals = concepts_mod.compute_duration(
                mentions[label], transcript, cfg.mention_gap_ms)
            if duration <= 0:
                record.warnings.append(
                    f"concept {label!r} has no spoken duration, dropped")
                record.dropped += 1
                continue
            style = concepts_mod.classify_delivery(intervals, evidence)
            cid = f"c{len(built):04d}"
            label_to_id[label] = cid
            built.append(concepts_mod.Concept(
                id=cid, label=label, mentions=tuple(mentions[label]),
                duration_ms=duration, intervals=tuple(intervals),
                delivery_style=style, importance=0.0,
                textrank_score=label_scores[label]))

        relabeled = [
            replace(el, concept_ids=tuple(
                label_to_id[lab] for lab in el.concept_ids if lab in label_to_id))
            for el in linked_elements]
        return built, relabeled

    concepts, elements = runner.run("concepts", concepts_stage)

    # --- relations ------------------------------------------------------
    def relations_stage(record: StageRecord):
        rules = relations_mod.rule_relations(
            concepts, transcript, elements, segments,
            cfg.pmi_window_cues, cfg.pmi_threshold, cfg.similarity_threshold)
        llm_rels: list[relations_mod.Relationship] = []
        enrichment = None
        if cfg.llm_endpoint:
            template = json.loads(
                resources.files("lecturemap.data.prompts")
                .joinpath("relationship_extraction.json").read_text("utf-8"))
            llm_rels, enrichment = relations_mod.llm_enrich(
                cfg.llm_endpoint, transcript, concepts, template,
                cfg.llm_weight, cfg.llm_retries, cfg.llm_chunk_tokens,
                cfg.llm_max_tokens, cfg.client_timeout_s)
            record.warnings += enrichment.dropped
            record.dropped += len(enrichment.dropped) + enrichment.skipped_chunks
            if enrichment.client_error:
                record.warnings.append(
                    f"LLM enrichment skipped: {enrichment.client_error}")
        graph = relations_mod.merge_validate(concepts, rules, llm_rels)

        weights = concepts_mod.ImportanceWeights(
            cfg.importance_w_duration, cfg.importance_w_assoc,
            cfg.importance_w_incl, cfg.importance_w_sim)
        raws = [concepts_mod.raw_importance(
            c.duration_ms,
            graph.degree(c.id, relations_mod.RelationKind.ASSOCIATION),
            graph.degree(c.id, relations_mod.RelationKind.INCLUSION),
            graph.degree(c.id, relations_mod.RelationKind.SIMILARITY),
            weights) for c in concepts]
        scored = [replace(c, importance=imp) for c, imp in
                  zip(concepts, concepts_mod.score_importance(raws))]
        graph = relations_mod.ConceptGraph(tuple(scored), graph.relationships)
        return scored, graph

    concepts, graph = runner.run("relations", relations_stage)

    # --- structure ------------------------------------------------------
    def structure_stage(record: StageRecord):
        docs, doc_segments = _tot_documents(
            transcript, segments, duration_ms, cfg.tot_doc_window_cues)
        n_topics = cfg.tot_topics or structure_mod.clamp_topic_count(len(segments))
        topic_rep: dict = {"skipped": "no usable documents"}
        if docs:
            model = structure_mod.tot_fit(
                docs, n_topics, cfg.tot_sweeps,
                None if cfg.tot_alpha == 0 else cfg.tot_alpha,
                cfg.tot_beta, cfg.seed)
            topic_rep = structure_mod.topic_report(model, doc_segments)
        else:
            record.warnings.append("topic model skipped: no content words")

        curve = structure_mod.importance_curve(
            concepts, cfg.curve_stride_ms, duration_ms)
        nodes = structure_mod.key_time_nodes(
            curve, cfg.node_quantile, cfg.node_min_gap_ms)
        overview = structure_mod.partition_overview(concepts)
        return topic_rep, curve, nodes, overview

    topic_rep, curve, nodes, overview = runner.run("structure", structure_stage)

    # --- layout ---------------------------------------------------------
    def layout_stage(record: StageRecord):
        stages = [layout_mod.stage_assign(c, graph, elements, cfg.follow_ms)
                  for c in concepts]
        demo_by_concept = {s.concept_id: s.demonstration for s in stages}
        color_steps = layout_mod.importance_color_steps(
            [c.importance for c in concepts])
        max_duration = max((c.duration_ms for c in concepts), default=0)
        element_by_id = {e.id: e for e in elements}
        radials = [
            layout_mod.radial_layout(
                c, graph,
                [element_by_id[eid] for eid in demo_by_concept[c.id]],
                duration_ms, max_duration, color_steps[i],
                cfg.radius_min_norm, cfg.radius_max_norm)
            for i, c in enumerate(concepts)]
        tracks = layout_mod.highlight_tracks(
            concepts, elements, transcript, demo_by_concept)
        return stages, radials, tracks

    stages, radials, tracks = runner.run("layout", layout_stage)

    # --- manifest -------------------------------------------------------
    def manifest_stage(record: StageRecord):
        course = _course_document(
            cfg, duration_ms, segments, elements, concepts, graph, curve,
            nodes, overview, stages, radials, tracks, series)
        doc = manifest_mod.build_manifest_document(course)
        return manifest_mod.canonical_bytes(doc)

    manifest_bytes = runner.run("manifest", manifest_stage)

    course_dir = Path(cfg.out_dir) / cfg.course_id
    course_dir.mkdir(parents=True, exist_ok=True)
    manifest_path = course_dir / "manifest.json"
    manifest_path.write_bytes(manifest_bytes)
    _write_transcript(course_dir, transcript)
    _copy_keyframes(course_dir, segments, series)

    report = {
        "course_id": cfg.course_id,
        "manifest_sha256": manifest_mod.manifest_hash(manifest_bytes),
        "stages": [
            {"name": r.name, "duration_ms": round(r.duration_ms, 3),
             "warnings": r.warnings, "dropped": r.dropped}
            for r in runner.records
        ],
        "segmentation": seg_report.as_dict(),
        "topics": topic_rep,
    }
    (course_dir / "build_report.json").write_text(
        json.dumps(report, indent=2, ensure_ascii=False), encoding="utf-8")
    return BuildResult(course_dir, manifest_path, manifest_bytes, report)


def _keyframe_ref(segment, series) -> str:
    for frame in series.frames:
        if frame.t_ms == segment.keyframe_t_ms:
            return frame.source_ref
    return ""


def _time_client_element(element: Element, segments) -> Element:
    seg = next((s for s in segments if s.index == element.segment_index),
               segments[-1])
    return replace(element, t_start_ms=seg.start_ms, t_end_ms=seg.end_ms)


def _delivery_evidence(segments, annotations: AnnotationSet,
                       elements: list[Element]) -> list[concepts_mod.DeliveryEvidence]:
    out = []
    for seg in segments:
        handwritten = any(
            e.handwritten and e.t_start_ms < seg.end_ms and e.t_end_ms > seg.start_ms
            for e in annotations.entries)
        head = any(
            e.teacher_head and e.t_start_ms < seg.end_ms and e.t_end_ms > seg.start_ms
            for e in annotations.entries)
        slide = any(e.kind.is_basic and e.segment_index == seg.index
                    for e in elements)
        out.append(concepts_mod.DeliveryEvidence(
            seg.index, seg.start_ms, seg.end_ms, handwritten, head, slide))
    return out


def _tot_documents(transcript: Transcript, segments, duration_ms: int,
                   window_cues: int):
    docs = []
    doc_segments = []
    cues = transcript.cues
    for lo in range(0, len(cues), window_cues):
        window = cues[lo:lo + window_cues]
        tokens = [tok for cue in window
                  for tok in concepts_mod.content_lemmas(cue.text)]
        if not tokens:
            continue
        mid = (window[0].start_ms + window[-1].end_ms) / 2
        docs.append(structure_mod.TotDocument(tuple(tokens), mid / duration_ms))
        seg = next((s.index for s in segments
                    if s.start_ms <= mid < s.end_ms), segments[-1].index)
        doc_segments.append(seg)
    return docs, doc_segments


def _course_document(cfg, duration_ms, segments, elements, concepts, graph,
                     curve, nodes, overview, stages, radials, tracks,
                     series) -> dict:
    keyframe_assets = {}
    for seg in segments:
        ref = _keyframe_ref(seg, series)
        name = Path(ref).name if ref and "#" not in ref else None
        keyframe_assets[seg.index] = f"assets/{name}" if name else None

    glyph_of = {e.id: layout_mod.element_glyph(e.kind) for e in elements}
    return {
        "course_id": cfg.course_id,
        "duration_ms": duration_ms,
        "segments": [
            {"index": s.index, "start_ms": s.start_ms, "end_ms": s.end_ms,
             "keyframe_t_ms": s.keyframe_t_ms,
             "boundary_confidence": s.boundary_confidence,
             "keyframe_asset": keyframe_assets[s.index]}
            for s in segments
        ],
        "elements": [
            {"id": e.id, "kind": e.kind.value, "segment_index": e.segment_index,
             "t_start_ms": e.t_start_ms, "t_end_ms": e.t_end_ms,
             "bbox": e.bbox.as_list(), "text": e.text,
             "provenance": e.provenance.value, "confidence": e.confidence,
             "concept_ids": list(e.concept_ids),
             "glyph": None if glyph_of[e.id] is None else {
                 "shape": glyph_of[e.id].shape.value,
                 "color_role": glyph_of[e.id].color_role.value}}
            for e in elements
        ],
        "concepts": [
            {"id": c.id, "label": c.label,
             "mentions": [{"t_ms": m.t_ms, "location": m.location}
                          for m in c.mentions],
             "duration_ms": c.duration_ms,
             "intervals": [[s, e] for s, e in c.intervals],
             "delivery_style": c.delivery_style.value,
             "importance": c.importance,
             "textrank_score": c.textrank_score}
            for c in concepts
        ],
        "relationships": [
            {"src": r.src, "dst": r.dst, "kind": r.kind.value,
             "weight": r.weight,
             "evidence": [{"source": ev.source, "detail": ev.detail}
                          for ev in r.evidence]}
            for r in graph.relationships
        ],
        "tracks": {
            "highlights": [
                {"element_id": b.element_id, "t_start_ms": b.t_start_ms,
                 "t_end_ms": b.t_end_ms, "color_role": b.color_role.value}
                for b in tracks.highlights
            ],
            "subtitle_emphasis": [
                {"cue_index": s.cue_index, "concept_id": s.concept_id,
                 "spans": [[a, b] for a, b in s.spans]}
                for s in tracks.subtitle_emphasis
            ],
            "focus_clusters": [
                {"element_id": c.element_id, "concept_id": c.concept_id,
                 "icons": [{"element_id": i.element_id, "slot": i.slot,
                            "shape": i.shape.value,
                            "color_role": i.color_role.value}
                           for i in c.icons]}
                for c in tracks.focus_clusters
            ],
            "importance_curve": {
                "stride_ms": cfg.curve_stride_ms,
                "samples": [[t, v] for t, v in curve.samples],
            },
            "time_nodes": [{"t_ms": n.t_ms, "value": n.value} for n in nodes],
        },
        "paused_layout": {
            "overview_groups": [
                {"style": g.style.value, "concept_ids": list(g.concept_ids)}
                for g in overview
            ],
            "radial_layouts": [
                {"concept_id": r.concept_id,
                 "center_color_step": r.center_color_step,
                 "center_color": r.center_color,
                 "radius_px_norm": r.radius_px_norm,
                 "inner_markers": [
                     {"angle_rad": m.angle_rad, "kind": m.kind.value,
                      "connector": m.connector.value,
                      "target_concept": m.target_concept}
                     for m in r.inner_markers],
                 "arcs": [{"start_angle": a.start_angle,
                           "end_angle": a.end_angle} for a in r.arcs],
                 "outer_ring": list(r.outer_ring),
                 "sub_bands": [
                     {"concept_id": b.concept_id, "offset_norm": b.offset_norm,
                      "length_norm": b.length_norm} for b in r.sub_bands]}
                for r in radials
            ],
            "stage_assignments": [
                {"concept_id": s.concept_id,
                 "preparation": list(s.preparation),
                 "demonstration": list(s.demonstration),
                 "application": list(s.application)}
                for s in stages
            ],
            "slide_strip": [
                {"segment_index": s.index, "keyframe_t_ms": s.keyframe_t_ms,
                 "asset": keyframe_assets[s.index]}
                for s in segments
            ],
            "preview_entries": [
                {"element_id": e.id, "t_ms": e.t_start_ms, "kind": e.kind.value}
                for e in sorted(elements, key=lambda e: (e.t_start_ms, e.id))
                if glyph_of[e.id] is not None
            ],
        },
        "interaction": {
            "config": {
                "focus_dwell_ms": cfg.focus_dwell_ms,
                "hover_grace_ms": cfg.hover_grace_ms,
                "follow_ms": cfg.follow_ms,
            },
        },
    }


def _write_transcript(course_dir: Path, transcript: Transcript) -> None:
    if transcript.source_format == "srt":
        (course_dir / "transcript.srt").write_text(to_srt(transcript),
                                                   encoding="utf-8")
    else:
        (course_dir / "transcript.vtt").write_text(to_webvtt(transcript),
                                                   encoding="utf-8")


def _copy_keyframes(course_dir: Path, segments, series) -> None:
    assets = course_dir / "assets"
    for seg in segments:
        ref = _keyframe_ref(seg, series)
        if ref and "#" not in ref and Path(ref).is_file():
            assets.mkdir(exist_ok=True)
            shutil.copyfile(ref, assets / Path(ref).name)
