/**
 * Play/Focused-stage overlay: a declarative draw list computed from the
 * manifest tracks at the current playback time. The DOM layer only paints
 * what this module returns.
 */

import { bboxToPx, slotPosition, type PointPx, type RectPx } from "./geometry.js";
import type {
  Cue,
  Manifest,
  ManifestElement,
  PlayerState,
} from "./types.js";

export interface BoxDraw {
  type: "highlight-box";
  elementId: string;
  rect: RectPx;
  colorRole: string;
  intensified: boolean;
}

export interface IconDraw {
  type: "focus-icon";
  elementId: string;
  shape: string;
  colorRole: string;
  at: PointPx;
  slot: number;
}

export interface SubtitleDraw {
  type: "subtitle";
  text: string;
  emphasis: [number, number][];
  conceptId: string | null;
}

export interface NodeDraw {
  type: "time-node";
  tMs: number;
  xNorm: number;
  value: number;
}

export type OverlayItem = BoxDraw | IconDraw | SubtitleDraw | NodeDraw;

function elementById(
  manifest: Manifest,
): Map<string, ManifestElement> {
  return new Map(manifest.elements.map((e) => [e.id, e]));
}

export function activeCueIndex(cues: Cue[], tMs: number): number {
  for (let i = 0; i < cues.length; i++) {
    const cue = cues[i]!;
    if (cue.startMs <= tMs && tMs < cue.endMs) return i;
  }
  return -1;
}

/**
 * Overlay frame for the Playing and Focused stages: highlight boxes active
 * at t, subtitle emphasis for the current cue, progress-bar time nodes,
 * and (when Focused) the target's focus-cluster icons.
 */
export function renderPlayStage(
  manifest: Manifest,
  state: PlayerState,
  cues: Cue[],
  width: number,
  height: number,
): OverlayItem[] {
  const t = state.t_ms;
  const byId = elementById(manifest);
  const items: OverlayItem[] = [];

  for (const box of manifest.tracks.highlights) {
    if (box.t_start_ms <= t && t < box.t_end_ms) {
      const element = byId.get(box.element_id);
      if (element === undefined) continue;
      items.push({
        type: "highlight-box",
        elementId: box.element_id,
        rect: bboxToPx(element.bbox, width, height),
        colorRole: box.color_role,
        intensified:
          state.kind === "Focused" && state.target_element === box.element_id,
      });
    }
  }

  const cueIndex = activeCueIndex(cues, t);
  if (cueIndex >= 0) {
    const emphasis = manifest.tracks.subtitle_emphasis.find(
      (s) => s.cue_index === cueIndex,
    );
    items.push({
      type: "subtitle",
      text: cues[cueIndex]!.text,
      emphasis: emphasis?.spans ?? [],
      conceptId: emphasis?.concept_id ?? null,
    });
  }

  for (const node of manifest.tracks.time_nodes) {
    items.push({
      type: "time-node",
      tMs: node.t_ms,
      xNorm: node.t_ms / manifest.duration_ms,
      value: node.value,
    });
  }

  if (state.kind === "Focused" && state.target_element !== null) {
    const cluster = manifest.tracks.focus_clusters.find(
      (c) => c.element_id === state.target_element,
    );
    const anchor = byId.get(state.target_element);
    if (cluster !== undefined && anchor !== undefined) {
      const rect = bboxToPx(anchor.bbox, width, height);
      for (const icon of cluster.icons) {
        items.push({
          type: "focus-icon",
          elementId: icon.element_id,
          shape: icon.shape,
          colorRole: icon.color_role,
          at: slotPosition(rect, icon.slot),
          slot: icon.slot,
        });
      }
    }
  }
  return items;
}
