/**
 * Interpreter for the manifest-embedded transition table.
 *
 * The player never hardcodes interaction logic: every transition is a table
 * lookup plus named effects, so engine and player behavior stay identical
 * as long as both interpret the same table. Unlisted (state, event) pairs
 * leave the state unchanged.
 */

import type {
  Concept,
  InteractionEvent,
  Manifest,
  PlayerState,
  TransitionTable,
} from "./types.js";

export interface TransitionContext {
  durationMs: number;
  focusDwellMs: number;
  activeConceptAt: (tMs: number) => string | null;
}

export function initialState(): PlayerState {
  return {
    kind: "Playing",
    t_ms: 0,
    target_element: null,
    entered_at_ms: null,
    anchor_kind: null,
    anchor_id: null,
  };
}

function clampTime(t: number | undefined, durationMs: number): number {
  if (t === undefined) return 0;
  return Math.max(0, Math.min(durationMs, t));
}

export function transition(
  state: PlayerState,
  event: InteractionEvent,
  table: TransitionTable,
  ctx: TransitionContext,
): PlayerState {
  const row = table[state.kind]?.[event.kind];
  if (row === undefined) return state;

  if (row.guard === "dwell_at_least_threshold") {
    if (event.dwell_ms === undefined || event.dwell_ms < ctx.focusDwellMs) {
      return state;
    }
  }

  const next: PlayerState = { ...state, kind: row.next };
  for (const effect of row.effects) {
    switch (effect) {
      case "target_from_event":
        if (event.element_id === undefined) return state;
        next.target_element = event.element_id;
        break;
      case "entered_at_now":
        next.entered_at_ms = state.t_ms;
        break;
      case "anchor_element_from_event":
        if (event.element_id === undefined) return state;
        next.anchor_kind = "element";
        next.anchor_id = event.element_id;
        break;
      case "anchor_active_concept":
        next.anchor_kind = "concept";
        next.anchor_id = ctx.activeConceptAt(state.t_ms);
        break;
      case "time_from_event":
        next.t_ms = clampTime(event.t_ms, ctx.durationMs);
        break;
      case "clear_target":
        next.target_element = null;
        next.entered_at_ms = null;
        break;
      case "clear_anchor":
        next.anchor_kind = null;
        next.anchor_id = null;
        break;
      default:
        throw new Error(`unknown transition effect: ${effect}`);
    }
  }
  if (next.kind !== "Focused") {
    next.target_element = null;
    next.entered_at_ms = null;
  }
  if (next.kind !== "PausedFull") {
    next.anchor_kind = null;
    next.anchor_id = null;
  }
  return next;
}

/**
 * The concept being explained at t: highest importance among concepts whose
 * merged mention intervals cover t, ties broken by id. Identical to the
 * engine's rule; used to resolve the PauseButton anchor.
 */
export function activeConceptAt(
  tMs: number,
  concepts: Concept[],
): string | null {
  let best: Concept | null = null;
  for (const concept of concepts) {
    const active = concept.intervals.some(([s, e]) => s <= tMs && tMs < e);
    if (!active) continue;
    if (
      best === null ||
      concept.importance > best.importance ||
      (concept.importance === best.importance && concept.id < best.id)
    ) {
      best = concept;
    }
  }
  return best === null ? null : best.id;
}

export function contextFromManifest(manifest: Manifest): TransitionContext {
  return {
    durationMs: manifest.duration_ms,
    focusDwellMs: manifest.interaction.config.focus_dwell_ms,
    activeConceptAt: (t) => activeConceptAt(t, manifest.concepts),
  };
}
