/**
 * Player session: manifest, current state, playback clock, and listeners.
 *
 * All transitions funnel through dispatch(), which interprets the
 * manifest-embedded table; nothing else may change the state.
 */

import { DwellTracker, type PointerSample } from "./dwell.js";
import {
  contextFromManifest,
  initialState,
  transition,
  type TransitionContext,
} from "./state.js";
import type {
  Cue,
  InteractionEvent,
  Manifest,
  PlayerState,
} from "./types.js";

export type StateListener = (
  state: PlayerState,
  event: InteractionEvent,
) => void;

export class PlayerSession {
  readonly manifest: Manifest;
  readonly cues: Cue[];
  private state: PlayerState;
  private readonly ctx: TransitionContext;
  private readonly dwell: DwellTracker;
  private readonly listeners: StateListener[] = [];

  constructor(manifest: Manifest, cues: Cue[] = []) {
    this.manifest = manifest;
    this.cues = cues;
    this.state = initialState();
    this.ctx = contextFromManifest(manifest);
    this.dwell = new DwellTracker(
      manifest.interaction.config.focus_dwell_ms,
      manifest.interaction.config.hover_grace_ms,
    );
  }

  get current(): PlayerState {
    return this.state;
  }

  onState(listener: StateListener): void {
    this.listeners.push(listener);
  }

  dispatch(event: InteractionEvent): PlayerState {
    const next = transition(
      this.state,
      event,
      this.manifest.interaction.transition_table,
      this.ctx,
    );
    const changed = next !== this.state;
    this.state = next;
    if (changed) {
      for (const listener of this.listeners) listener(next, event);
    }
    return next;
  }

  /** Advance the playback clock (Playing and Focused stages only). */
  advanceClock(deltaMs: number): void {
    if (this.state.kind === "PausedFull") return;
    const t = Math.min(
      this.manifest.duration_ms,
      this.state.t_ms + Math.max(0, deltaMs),
    );
    this.state = { ...this.state, t_ms: t };
  }

  /** Route raw pointer samples through the dwell tracker into dispatch. */
  pointer(sample: PointerSample): void {
    for (const event of this.dwell.onPointer(sample)) this.dispatch(event);
  }

  /** Per-frame tick: dwell timing plus clock advance. */
  frame(nowMs: number, deltaMs: number): void {
    for (const event of this.dwell.tick(nowMs)) this.dispatch(event);
    this.advanceClock(deltaMs);
  }
}
