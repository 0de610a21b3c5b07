/**
 * Mouse-hover dwell tracking: the focus proxy.
 *
 * Emits HoverStart on entering an element, HoverDwellElapsed exactly once
 * when continuous hover over one element reaches the configured dwell
 * threshold, and HoverEnd once the pointer has been away for the grace
 * period (re-entering the same element within the grace cancels the end,
 * which suppresses flicker from small mouse movements).
 */

import type { InteractionEvent } from "./types.js";

export interface PointerSample {
  type: "enter" | "move" | "leave";
  elementId?: string;
  tMs: number; // wall-clock milliseconds
}

export class DwellTracker {
  private hovered: string | null = null;
  private hoverStartMs = 0;
  private dwellFired = false;
  private pendingEndSinceMs: number | null = null;

  constructor(
    private readonly focusDwellMs: number,
    private readonly hoverGraceMs: number,
  ) {}

  /** Feed a pointer sample; returns the interaction events it produces. */
  onPointer(sample: PointerSample): InteractionEvent[] {
    const events: InteractionEvent[] = [];
    switch (sample.type) {
      case "enter": {
        if (sample.elementId === undefined) break;
        if (
          this.pendingEndSinceMs !== null &&
          sample.elementId === this.hovered
        ) {
          this.pendingEndSinceMs = null; // grace re-entry, keep the hover
          break;
        }
        events.push(...this.flushEnd(sample.tMs, true));
        this.hovered = sample.elementId;
        this.hoverStartMs = sample.tMs;
        this.dwellFired = false;
        this.pendingEndSinceMs = null;
        events.push({ kind: "HoverStart", element_id: sample.elementId });
        events.push(...this.maybeDwell(sample.tMs));
        break;
      }
      case "move":
        events.push(...this.tick(sample.tMs));
        break;
      case "leave":
        if (this.hovered !== null && this.pendingEndSinceMs === null) {
          this.pendingEndSinceMs = sample.tMs;
        }
        break;
    }
    return events;
  }

  /** Advance time (per animation frame); may emit dwell or delayed end. */
  tick(nowMs: number): InteractionEvent[] {
    const events: InteractionEvent[] = [];
    events.push(...this.flushEnd(nowMs, false));
    events.push(...this.maybeDwell(nowMs));
    return events;
  }

  private maybeDwell(nowMs: number): InteractionEvent[] {
    if (
      this.hovered !== null &&
      !this.dwellFired &&
      this.pendingEndSinceMs === null &&
      nowMs - this.hoverStartMs >= this.focusDwellMs
    ) {
      this.dwellFired = true;
      return [
        {
          kind: "HoverDwellElapsed",
          element_id: this.hovered,
          dwell_ms: nowMs - this.hoverStartMs,
        },
      ];
    }
    return [];
  }

  private flushEnd(nowMs: number, force: boolean): InteractionEvent[] {
    if (this.pendingEndSinceMs === null) return [];
    if (!force && nowMs - this.pendingEndSinceMs < this.hoverGraceMs) {
      return [];
    }
    this.hovered = null;
    this.dwellFired = false;
    this.pendingEndSinceMs = null;
    return [{ kind: "HoverEnd" }];
  }
}
