/** Manifest document types, mirroring the engine's published JSON schema. */

export interface Manifest {
  schema_version: string;
  course_id: string;
  duration_ms: number;
  segments: Segment[];
  elements: ManifestElement[];
  concepts: Concept[];
  relationships: Relationship[];
  tracks: Tracks;
  paused_layout: PausedLayout;
  interaction: Interaction;
}

export interface Segment {
  index: number;
  start_ms: number;
  end_ms: number;
  keyframe_t_ms: number;
  boundary_confidence: number;
  keyframe_asset: string | null;
}

export type BBox = [number, number, number, number]; // x, y, w, h normalized

export interface Glyph {
  shape: "Circle" | "Rectangle" | "Hexagon" | "Triangle";
  color_role: string;
}

export interface ManifestElement {
  id: string;
  kind: string;
  segment_index: number;
  t_start_ms: number;
  t_end_ms: number;
  bbox: BBox;
  text: string | null;
  provenance: string;
  confidence: number;
  concept_ids: string[];
  glyph: Glyph | null;
}

export interface Mention {
  t_ms: number;
  location: string;
}

export interface Concept {
  id: string;
  label: string;
  mentions: Mention[];
  duration_ms: number;
  intervals: [number, number][];
  delivery_style: string;
  importance: number;
  textrank_score: number;
}

export interface Relationship {
  src: string;
  dst: string;
  kind: "Association" | "Inclusion" | "Similarity";
  weight: number;
  evidence: { source: string; detail: string }[];
}

export interface Tracks {
  highlights: HighlightBox[];
  subtitle_emphasis: EmphasisSpan[];
  focus_clusters: FocusCluster[];
  importance_curve: { stride_ms: number; samples: [number, number][] };
  time_nodes: { t_ms: number; value: number }[];
}

export interface HighlightBox {
  element_id: string;
  t_start_ms: number;
  t_end_ms: number;
  color_role: string;
}

export interface EmphasisSpan {
  cue_index: number;
  concept_id: string;
  spans: [number, number][];
}

export interface FocusCluster {
  element_id: string;
  concept_id: string;
  icons: IconPlacement[];
}

export interface IconPlacement {
  element_id: string;
  slot: number;
  shape: Glyph["shape"];
  color_role: string;
}

export interface PausedLayout {
  overview_groups: { style: string; concept_ids: string[] }[];
  radial_layouts: RadialLayout[];
  stage_assignments: StageAssignment[];
  slide_strip: { segment_index: number; keyframe_t_ms: number; asset: string | null }[];
  preview_entries: { element_id: string; t_ms: number; kind: string }[];
}

export interface RadialLayout {
  concept_id: string;
  center_color_step: number;
  center_color: string;
  radius_px_norm: number;
  inner_markers: InnerMarker[];
  arcs: { start_angle: number; end_angle: number }[];
  outer_ring: string[];
  sub_bands: { concept_id: string; offset_norm: number; length_norm: number }[];
}

export interface InnerMarker {
  angle_rad: number;
  kind: "AssocCircleLight" | "SimCircleDark";
  connector: "Curve" | "OrthogonalTick";
  target_concept: string;
}

export interface StageAssignment {
  concept_id: string;
  preparation: string[];
  demonstration: string[];
  application: string[];
}

export interface Interaction {
  config: {
    focus_dwell_ms: number;
    hover_grace_ms: number;
    follow_ms: number;
  };
  transition_table: TransitionTable;
}

export type StateKind = "Playing" | "Focused" | "PausedFull";

export interface TransitionRow {
  next: StateKind;
  guard?: string;
  effects: string[];
}

export type TransitionTable = Partial<
  Record<StateKind, Record<string, TransitionRow>>
>;

export interface PlayerState {
  kind: StateKind;
  t_ms: number;
  target_element: string | null;
  entered_at_ms: number | null;
  anchor_kind: "concept" | "element" | null;
  anchor_id: string | null;
}

export type EventKind =
  | "HoverStart"
  | "HoverDwellElapsed"
  | "HoverEnd"
  | "ClickElement"
  | "PauseButton"
  | "PlayButton"
  | "Seek"
  | "TimeNodeClick"
  | "ConceptAnchorClick";

export interface InteractionEvent {
  kind: EventKind;
  element_id?: string;
  concept_id?: string;
  dwell_ms?: number;
  t_ms?: number;
}

export interface Cue {
  startMs: number;
  endMs: number;
  text: string;
}
