/**
 * Browser glue: paint the overlay draw list onto a canvas stacked over the
 * video element. Pure geometry and state live in the other modules; this
 * file only translates draw items into canvas calls and DOM events into
 * pointer samples.
 */

import type { OverlayItem } from "./overlay.js";
import type { PlayerSession } from "./session.js";

const ROLE_COLORS: Record<string, string> = {
  // fallback palette for highlight boxes; concept/radial colors always come
  // from the manifest itself (center_color), never from here
  ConceptBlue: "rgba(49, 130, 189, 0.9)",
  FigureTableGreen: "rgba(49, 163, 84, 0.9)",
  EquationCodeRed: "rgba(222, 45, 38, 0.9)",
  ExampleTestYellow: "rgba(254, 196, 79, 0.9)",
};

export function paintOverlay(
  canvas: HTMLCanvasElement,
  items: OverlayItem[],
): void {
  const g = canvas.getContext("2d");
  if (g === null) return;
  g.clearRect(0, 0, canvas.width, canvas.height);
  for (const item of items) {
    switch (item.type) {
      case "highlight-box": {
        g.lineWidth = item.intensified ? 4 : 2;
        g.strokeStyle = ROLE_COLORS[item.colorRole] ?? "rgba(255,255,255,0.9)";
        g.strokeRect(item.rect.x, item.rect.y, item.rect.w, item.rect.h);
        break;
      }
      case "focus-icon": {
        g.fillStyle = ROLE_COLORS[item.colorRole] ?? "white";
        drawGlyph(g, item.shape, item.at.x, item.at.y, 8);
        break;
      }
      case "time-node": {
        const x = item.xNorm * canvas.width;
        const y = canvas.height - 10;
        g.fillStyle = "rgba(49, 130, 189, 0.9)";
        g.beginPath();
        g.arc(x, y, 4, 0, 2 * Math.PI);
        g.fill();
        break;
      }
      case "subtitle":
        drawSubtitle(g, canvas, item.text, item.emphasis);
        break;
    }
  }
}

function drawGlyph(
  g: CanvasRenderingContext2D,
  shape: string,
  x: number,
  y: number,
  r: number,
): void {
  g.beginPath();
  switch (shape) {
    case "Circle":
      g.arc(x, y, r, 0, 2 * Math.PI);
      break;
    case "Rectangle":
      g.rect(x - r, y - r, 2 * r, 2 * r);
      break;
    case "Hexagon":
      for (let i = 0; i < 6; i++) {
        const a = -Math.PI / 2 + (i * Math.PI) / 3;
        const px = x + r * Math.cos(a);
        const py = y + r * Math.sin(a);
        if (i === 0) g.moveTo(px, py);
        else g.lineTo(px, py);
      }
      g.closePath();
      break;
    case "Triangle":
      g.moveTo(x, y - r);
      g.lineTo(x + r, y + r);
      g.lineTo(x - r, y + r);
      g.closePath();
      break;
  }
  g.fill();
}

function drawSubtitle(
  g: CanvasRenderingContext2D,
  canvas: HTMLCanvasElement,
  text: string,
  emphasis: [number, number][],
): void {
  const line = text.replace(/\n/g, " ");
  g.font = "20px sans-serif";
  g.textAlign = "center";
  const y = canvas.height - 36;
  g.fillStyle = "rgba(0, 0, 0, 0.6)";
  const width = g.measureText(line).width + 24;
  g.fillRect((canvas.width - width) / 2, y - 22, width, 32);
  g.fillStyle = "white";
  g.fillText(line, canvas.width / 2, y);
  if (emphasis.length > 0) {
    // underline emphasized spans beneath the rendered line
    const startX = (canvas.width - g.measureText(line).width) / 2;
    g.strokeStyle = ROLE_COLORS["ConceptBlue"]!;
    g.lineWidth = 3;
    for (const [from, to] of emphasis) {
      const prefix = g.measureText(line.slice(0, from)).width;
      const span = g.measureText(line.slice(from, to)).width;
      g.beginPath();
      g.moveTo(startX + prefix, y + 6);
      g.lineTo(startX + prefix + span, y + 6);
      g.stroke();
    }
  }
}

/** Wire pointermove/out events on the overlay into the session's tracker. */
export function bindPointer(
  canvas: HTMLCanvasElement,
  session: PlayerSession,
  elementAt: (xNorm: number, yNorm: number, tMs: number) => string | null,
): void {
  canvas.addEventListener("pointermove", (event) => {
    const rect = canvas.getBoundingClientRect();
    const xNorm = (event.clientX - rect.left) / rect.width;
    const yNorm = (event.clientY - rect.top) / rect.height;
    const id = elementAt(xNorm, yNorm, session.current.t_ms);
    const now = performance.now();
    if (id === null) {
      session.pointer({ type: "leave", tMs: now });
    } else {
      session.pointer({ type: "enter", elementId: id, tMs: now });
    }
  });
  canvas.addEventListener("pointerleave", () => {
    session.pointer({ type: "leave", tMs: performance.now() });
  });
  canvas.addEventListener("click", (event) => {
    const rect = canvas.getBoundingClientRect();
    const xNorm = (event.clientX - rect.left) / rect.width;
    const yNorm = (event.clientY - rect.top) / rect.height;
    const id = elementAt(xNorm, yNorm, session.current.t_ms);
    if (id !== null) {
      session.dispatch({ kind: "ClickElement", element_id: id });
    }
  });
}
