/**
 * Entry point: mount the augmented player over a <video> element.
 *
 * const player = await mountPlayer(videoEl, "http://127.0.0.1:8437", "my-course");
 */

import { CourseApi, type FetchLike } from "./api.js";
import { bindPointer, paintOverlay } from "./dom.js";
import { renderPlayStage } from "./overlay.js";
import { renderPausedFull } from "./paused.js";
import { PlayerSession } from "./session.js";
import type { Manifest, ManifestElement } from "./types.js";

export { CourseApi, parseCues } from "./api.js";
export { DwellTracker } from "./dwell.js";
export * from "./geometry.js";
export { renderPlayStage, activeCueIndex } from "./overlay.js";
export { pausedRegions, renderPausedFull, REGION_RATIOS } from "./paused.js";
export { PlayerSession } from "./session.js";
export {
  activeConceptAt,
  contextFromManifest,
  initialState,
  transition,
} from "./state.js";
export type * from "./types.js";

function hitTest(
  manifest: Manifest,
  xNorm: number,
  yNorm: number,
  tMs: number,
): string | null {
  let best: ManifestElement | null = null;
  for (const element of manifest.elements) {
    if (element.t_start_ms > tMs || tMs >= element.t_end_ms) continue;
    const [x, y, w, h] = element.bbox;
    if (xNorm < x || xNorm > x + w || yNorm < y || yNorm > y + h) continue;
    if (best === null || w * h < best.bbox[2] * best.bbox[3]) best = element;
  }
  return best === null ? null : best.id;
}

export interface MountedPlayer {
  session: PlayerSession;
  stop(): void;
}

export async function mountPlayer(
  video: HTMLVideoElement,
  baseUrl: string,
  courseId: string,
  fetchFn?: FetchLike,
): Promise<MountedPlayer> {
  const api = new CourseApi(baseUrl, fetchFn);
  const manifest = await api.manifest(courseId);
  const cues = await api.transcript(courseId).catch(() => []);
  const session = new PlayerSession(manifest, cues);

  const canvas = document.createElement("canvas");
  canvas.style.position = "absolute";
  canvas.style.inset = "0";
  canvas.style.pointerEvents = "auto";
  video.insertAdjacentElement("afterend", canvas);

  bindPointer(canvas, session, (x, y, t) => hitTest(manifest, x, y, t));
  session.onState((state) => {
    if (state.kind === "PausedFull") video.pause();
    if (state.kind === "Playing" && video.paused) {
      video.currentTime = state.t_ms / 1000;
      void video.play();
    }
  });

  let last = performance.now();
  let raf = 0;
  const loop = (now: number) => {
    const playing = session.current.kind !== "PausedFull" && !video.paused;
    session.frame(now, playing ? now - last : 0);
    last = now;
    canvas.width = video.clientWidth;
    canvas.height = video.clientHeight;
    if (session.current.kind === "PausedFull") {
      // full mode: the view descriptor drives a DOM panel in real apps;
      // the canvas keeps showing the last frame dimmed underneath
      renderPausedFull(manifest, session.current, canvas.width, canvas.height);
    } else {
      paintOverlay(
        canvas,
        renderPlayStage(manifest, session.current, cues, canvas.width,
          canvas.height),
      );
    }
    raf = requestAnimationFrame(loop);
  };
  raf = requestAnimationFrame(loop);

  return {
    session,
    stop() {
      cancelAnimationFrame(raf);
      canvas.remove();
    },
  };
}
