"""Annotation file ingestion.

Annotation documents substitute for detector model outputs.  Schema (JSON):

    {
      "version": 1,
      "entries": [
        {
          "t_start_ms": 0,
          "t_end_ms": 4000,
          "kind": "Text",            // optional, one of the nine kinds
          "bbox": [x, y, w, h],      // normalized to the unit square
          "text": "...",             // optional
          "handwritten": false,      // optional, default false
          "teacher_head": false      // optional, default false
        }
      ]
    }

Components of ``bbox`` are clamped into [0, 1]; a box that still exceeds the
unit square after clamping (x + w > 1 or y + h > 1) rejects the whole file.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from ..errors import SchemaViolation
from ..kinds import KIND_NAMES

SCHEMA_VERSION = 1
_EDGE_TOL = 1e-9


@dataclass(frozen=True)
class BBox:
    x: float
    y: float
    w: float
    h: float

    @property
    def center(self) -> tuple[float, float]:
        return (self.x + self.w / 2, self.y + self.h / 2)

    def area(self) -> float:
        return self.w * self.h

    def iou(self, other: "BBox") -> float:
        ix = max(0.0, min(self.x + self.w, other.x + other.w) - max(self.x, other.x))
        iy = max(0.0, min(self.y + self.h, other.y + other.h) - max(self.y, other.y))
        inter = ix * iy
        union = self.area() + other.area() - inter
        return inter / union if union > 0 else 0.0

    def as_list(self) -> list[float]:
        return [self.x, self.y, self.w, self.h]


@dataclass(frozen=True)
class AnnotationEntry:
    t_start_ms: int
    t_end_ms: int
    bbox: BBox
    kind_hint: str | None = None
    text: str | None = None
    handwritten: bool = False
    teacher_head: bool = False


@dataclass(frozen=True)
class AnnotationSet:
    entries: tuple[AnnotationEntry, ...]


def _clamp01(v: float) -> float:
    return min(1.0, max(0.0, v))


def _require(obj: dict, key: str, types, path: str):
    if key not in obj:
        raise SchemaViolation(f"{path}/{key}", "missing required field")
    value = obj[key]
    if not isinstance(value, types) or isinstance(value, bool) and types != bool:
        raise SchemaViolation(f"{path}/{key}", f"wrong type: {type(value).__name__}")
    return value


def _parse_entry(raw: object, path: str) -> AnnotationEntry:
    if not isinstance(raw, dict):
        raise SchemaViolation(path, "entry must be an object")
    t_start = _require(raw, "t_start_ms", int, path)
    t_end = _require(raw, "t_end_ms", int, path)
    if t_start >= t_end:
        raise SchemaViolation(f"{path}/t_end_ms", f"{t_end} not after t_start_ms {t_start}")
    bbox_raw = _require(raw, "bbox", list, path)
    if len(bbox_raw) != 4 or not all(isinstance(v, (int, float)) and not isinstance(v, bool)
                                     for v in bbox_raw):
        raise SchemaViolation(f"{path}/bbox", "expected [x, y, w, h] numbers")
    x, y, w, h = (_clamp01(float(v)) for v in bbox_raw)
    if x + w > 1.0 + _EDGE_TOL:
        raise SchemaViolation(f"{path}/bbox", f"x+w = {x + w:.6g} > 1")
    if y + h > 1.0 + _EDGE_TOL:
        raise SchemaViolation(f"{path}/bbox", f"y+h = {y + h:.6g} > 1")

    kind = raw.get("kind")
    if kind is not None:
        if not isinstance(kind, str) or kind not in KIND_NAMES:
            raise SchemaViolation(f"{path}/kind", f"unknown kind {kind!r}")
    text = raw.get("text")
    if text is not None and not isinstance(text, str):
        raise SchemaViolation(f"{path}/text", "text must be a string")
    flags = {}
    for flag in ("handwritten", "teacher_head"):
        value = raw.get(flag, False)
        if not isinstance(value, bool):
            raise SchemaViolation(f"{path}/{flag}", "must be a boolean")
        flags[flag] = value
    return AnnotationEntry(t_start, t_end, BBox(x, y, min(w, 1.0 - x), min(h, 1.0 - y)),
                           kind, text, **flags)


def parse_annotations(text: str, source: str = "<annotations>") -> AnnotationSet:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaViolation(source, f"invalid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise SchemaViolation(source, "document must be an object")
    version = doc.get("version")
    if version != SCHEMA_VERSION:
        raise SchemaViolation("version", f"unsupported version {version!r}")
    entries_raw = _require(doc, "entries", list, source)
    entries = tuple(_parse_entry(raw, f"entries/{i}")
                    for i, raw in enumerate(entries_raw))
    return AnnotationSet(entries)


def load_annotations(path: str | Path) -> AnnotationSet:
    path = Path(path)
    return parse_annotations(path.read_text(encoding="utf-8"), str(path))
