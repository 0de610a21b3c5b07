/**
 * PausedFull-stage layout: slides and concept overview on top, the three
 * cognition-stage regions with the anchor concept's radial view in the
 * middle, and the element preview strip at the bottom. Hovering another
 * concept swaps the Demonstration content without a state change; clicking
 * an anchor is the caller's cue to dispatch ConceptAnchorClick.
 */

import { renderRadial, type RadialRender, type RectPx } from "./geometry.js";
import type { Manifest, PlayerState, StageAssignment } from "./types.js";

// top / player / preview shares of the viewport height
export const REGION_RATIOS = { top: 0.25, player: 0.55, preview: 0.2 };

export interface PausedRegions {
  top: RectPx;
  player: RectPx;
  preview: RectPx;
  preparation: RectPx;
  demonstration: RectPx;
  application: RectPx;
}

export function pausedRegions(width: number, height: number): PausedRegions {
  const top = { x: 0, y: 0, w: width, h: height * REGION_RATIOS.top };
  const player = {
    x: 0,
    y: top.h,
    w: width,
    h: height * REGION_RATIOS.player,
  };
  const preview = {
    x: 0,
    y: top.h + player.h,
    w: width,
    h: height * REGION_RATIOS.preview,
  };
  const columnWidth = player.w / 3;
  return {
    top,
    player,
    preview,
    preparation: { x: 0, y: player.y, w: columnWidth, h: player.h },
    demonstration: {
      x: columnWidth,
      y: player.y,
      w: columnWidth,
      h: player.h,
    },
    application: { x: 2 * columnWidth, y: player.y, w: columnWidth, h: player.h },
  };
}

export interface PausedView {
  regions: PausedRegions;
  anchorConceptId: string | null;
  overview: { style: string; conceptIds: string[] }[];
  slideStrip: { segmentIndex: number; asset: string | null }[];
  preparation: string[]; // concept ids
  demonstration: string[]; // element ids
  application: string[]; // element ids
  radial: RadialRender | null;
  preview: { elementId: string; tMs: number; kind: string }[];
}

function anchorConcept(manifest: Manifest, state: PlayerState): string | null {
  if (state.anchor_kind === "concept") return state.anchor_id;
  if (state.anchor_kind === "element" && state.anchor_id !== null) {
    const element = manifest.elements.find((e) => e.id === state.anchor_id);
    if (element !== undefined && element.concept_ids.length > 0) {
      // highest-importance concept the element describes
      const concepts = manifest.concepts.filter((c) =>
        element.concept_ids.includes(c.id),
      );
      concepts.sort((a, b) =>
        b.importance - a.importance || (a.id < b.id ? -1 : 1),
      );
      return concepts[0]?.id ?? null;
    }
  }
  return null;
}

export function stageFor(
  manifest: Manifest,
  conceptId: string,
): StageAssignment | undefined {
  return manifest.paused_layout.stage_assignments.find(
    (s) => s.concept_id === conceptId,
  );
}

/**
 * Full-mode view of the paused stage. `hoveredConceptId` swaps the
 * demonstration flow to that concept while leaving the state untouched.
 */
export function renderPausedFull(
  manifest: Manifest,
  state: PlayerState,
  width: number,
  height: number,
  hoveredConceptId: string | null = null,
): PausedView {
  const regions = pausedRegions(width, height);
  const anchorId = anchorConcept(manifest, state);
  const shownId = hoveredConceptId ?? anchorId;

  const stage = shownId !== null ? stageFor(manifest, shownId) : undefined;
  const radialSpec =
    shownId !== null
      ? manifest.paused_layout.radial_layouts.find(
          (r) => r.concept_id === shownId,
        )
      : undefined;

  const side = Math.min(regions.demonstration.w, regions.demonstration.h);
  const square: RectPx = {
    x: regions.demonstration.x + (regions.demonstration.w - side) / 2,
    y: regions.demonstration.y + (regions.demonstration.h - side) / 2,
    w: side,
    h: side,
  };

  return {
    regions,
    anchorConceptId: anchorId,
    overview: manifest.paused_layout.overview_groups.map((g) => ({
      style: g.style,
      conceptIds: g.concept_ids,
    })),
    slideStrip: manifest.paused_layout.slide_strip.map((s) => ({
      segmentIndex: s.segment_index,
      asset: s.asset,
    })),
    preparation: stage?.preparation ?? [],
    demonstration: stage?.demonstration ?? [],
    application: stage?.application ?? [],
    radial: radialSpec !== undefined ? renderRadial(radialSpec, square) : null,
    preview: manifest.paused_layout.preview_entries.map((p) => ({
      elementId: p.element_id,
      tMs: p.t_ms,
      kind: p.kind,
    })),
  };
}
