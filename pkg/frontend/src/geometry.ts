/**
 * Pixel mapping of manifest geometry.
 *
 * All manifest coordinates are normalized; the player scales them to the
 * render surface here and nowhere else. Radial angles follow the manifest
 * convention (12 o'clock origin, clockwise), which in screen coordinates
 * (y down) is plain cos/sin.
 */

import type { BBox, RadialLayout } from "./types.js";

export interface RectPx {
  x: number;
  y: number;
  w: number;
  h: number;
}

export interface PointPx {
  x: number;
  y: number;
}

export function bboxToPx(bbox: BBox, width: number, height: number): RectPx {
  const [x, y, w, h] = bbox;
  return { x: x * width, y: y * height, w: w * width, h: h * height };
}

export function rectCenter(rect: RectPx): PointPx {
  return { x: rect.x + rect.w / 2, y: rect.y + rect.h / 2 };
}

/**
 * Position of an icon slot on the 8-point ring around a box: slot 0 sits
 * centered above the box, slots count clockwise (1 = top-right corner,
 * 2 = right edge center, ...).
 */
export function slotPosition(
  rect: RectPx,
  slot: number,
  marginPx = 12,
): PointPx {
  const left = rect.x - marginPx;
  const right = rect.x + rect.w + marginPx;
  const top = rect.y - marginPx;
  const bottom = rect.y + rect.h + marginPx;
  const cx = rect.x + rect.w / 2;
  const cy = rect.y + rect.h / 2;
  switch (((slot % 8) + 8) % 8) {
    case 0:
      return { x: cx, y: top };
    case 1:
      return { x: right, y: top };
    case 2:
      return { x: right, y: cy };
    case 3:
      return { x: right, y: bottom };
    case 4:
      return { x: cx, y: bottom };
    case 5:
      return { x: left, y: bottom };
    case 6:
      return { x: left, y: cy };
    default:
      return { x: left, y: top };
  }
}

/** Point on a circle for a manifest angle (clock convention, y down). */
export function radialPoint(
  center: PointPx,
  radiusPx: number,
  angleRad: number,
): PointPx {
  return {
    x: center.x + radiusPx * Math.cos(angleRad),
    y: center.y + radiusPx * Math.sin(angleRad),
  };
}

export interface RadialRender {
  center: PointPx;
  outerRadiusPx: number;
  innerRadiusPx: number;
  centerColor: string;
  markers: { point: PointPx; kind: string; connector: string; target: string }[];
  arcs: { startAngle: number; endAngle: number; radiusPx: number }[];
  ringSlots: { elementId: string; point: PointPx }[];
}

/** Lay out one concept's radial view inside a square region. */
export function renderRadial(
  layout: RadialLayout,
  region: RectPx,
): RadialRender {
  const center = rectCenter(region);
  const maxRadius = Math.min(region.w, region.h) / 2;
  const outer = maxRadius * layout.radius_px_norm;
  const inner = outer * 0.62;
  const markers = layout.inner_markers.map((m) => ({
    point: radialPoint(center, inner, m.angle_rad),
    kind: m.kind,
    connector: m.connector,
    target: m.target_concept,
  }));
  const arcs = layout.arcs.map((a) => ({
    startAngle: a.start_angle,
    endAngle: a.end_angle,
    radiusPx: inner,
  }));
  const ringSlots = layout.outer_ring.map((elementId, i) => {
    const angle =
      -Math.PI / 2 +
      (2 * Math.PI * i) / Math.max(1, layout.outer_ring.length);
    return { elementId, point: radialPoint(center, outer, angle) };
  });
  return {
    center,
    outerRadiusPx: outer,
    innerRadiusPx: inner,
    centerColor: layout.center_color,
    markers,
    arcs,
    ringSlots,
  };
}
