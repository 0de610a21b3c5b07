#!/usr/bin/env python3
"""Generate the browser player's test fixtures from the engine.

Builds the demo course, copies its manifest into frontend/test/fixtures/,
and records five interaction event logs together with the reference state
sequence produced by the engine's transition implementation.  The player's
table interpreter must reproduce these sequences exactly.
"""

from __future__ import annotations

import dataclasses
import json
import random
import sys
import tempfile
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from lecturemap.config import BuildConfig
from lecturemap.manifest import (EVENT_KINDS, InteractionEvent, PlayerState,
                                 TransitionContext, transition)
from lecturemap.pipeline import build_course

ROOT = Path(__file__).resolve().parents[1]
DEMO = ROOT / "tests" / "fixtures" / "demo_course"
OUT = ROOT / "frontend" / "test" / "fixtures"


def build_demo() -> dict:
    with tempfile.TemporaryDirectory() as tmp:
        cfg = BuildConfig(
            subtitles=str(DEMO / "transcript.srt"),
            frames=str(DEMO / "frames.lmhc"),
            annotations=str(DEMO / "annotations.json"),
            out_dir=tmp, course_id="fundamental-charts")
        result = build_course(cfg)
        (OUT / "demo_manifest.json").write_bytes(result.manifest_bytes)
        return json.loads(result.manifest_bytes)


def active_concept_resolver(manifest: dict):
    concepts = manifest["concepts"]

    def resolve(t_ms: int) -> str | None:
        active = [c for c in concepts
                  if any(s <= t_ms < e for s, e in c["intervals"])]
        if not active:
            return None
        return min(active, key=lambda c: (-c["importance"], c["id"]))["id"]

    return resolve


def state_dict(state: PlayerState) -> dict:
    return dataclasses.asdict(state)


def event_dict(event: InteractionEvent) -> dict:
    return {k: v for k, v in dataclasses.asdict(event).items()
            if v is not None}


def scripted_log(manifest: dict, ctx: TransitionContext) -> list[InteractionEvent]:
    element = manifest["elements"][0]["id"]
    other = manifest["elements"][10]["id"]
    concept = manifest["concepts"][0]["id"]
    node_t = manifest["tracks"]["time_nodes"][0]["t_ms"] \
        if manifest["tracks"]["time_nodes"] else 60_000
    return [
        InteractionEvent("HoverStart", element_id=element),
        InteractionEvent("HoverDwellElapsed", element_id=element, dwell_ms=2999),
        InteractionEvent("HoverDwellElapsed", element_id=element, dwell_ms=3000),
        InteractionEvent("HoverEnd"),
        InteractionEvent("Seek", t_ms=30_000),
        InteractionEvent("TimeNodeClick", t_ms=node_t),
        InteractionEvent("PauseButton"),
        InteractionEvent("HoverStart", element_id=other),
        InteractionEvent("ConceptAnchorClick", concept_id=concept,
                         t_ms=manifest["concepts"][0]["mentions"][0]["t_ms"]),
        InteractionEvent("HoverDwellElapsed", element_id=other, dwell_ms=4000),
        InteractionEvent("ClickElement", element_id=other),
        InteractionEvent("Seek", t_ms=999_999),
        InteractionEvent("PlayButton"),
    ]


def random_log(manifest: dict, seed: int, steps: int) -> list[InteractionEvent]:
    rng = random.Random(seed)
    element_ids = [e["id"] for e in manifest["elements"]]
    concept_ids = [c["id"] for c in manifest["concepts"]]
    events = []
    for _ in range(steps):
        kind = rng.choice(EVENT_KINDS)
        events.append(InteractionEvent(
            kind,
            element_id=rng.choice(element_ids),
            concept_id=rng.choice(concept_ids),
            dwell_ms=rng.randrange(0, 6000),
            t_ms=rng.randrange(-10_000, manifest["duration_ms"] + 20_000)))
    return events


def main() -> None:
    OUT.mkdir(parents=True, exist_ok=True)
    manifest = build_demo()
    ctx = TransitionContext(
        duration_ms=manifest["duration_ms"],
        focus_dwell_ms=manifest["interaction"]["config"]["focus_dwell_ms"],
        hover_grace_ms=manifest["interaction"]["config"]["hover_grace_ms"],
        active_concept_resolver=active_concept_resolver(manifest))

    logs = [("scripted walkthrough", scripted_log(manifest, ctx))]
    for i, seed in enumerate((101, 202, 303, 404)):
        logs.append((f"random seed {seed}", random_log(manifest, seed, 120)))

    for index, (description, events) in enumerate(logs):
        state = PlayerState.playing(0)
        steps = []
        for event in events:
            state = transition(state, event,
                               ctx, manifest["interaction"]["transition_table"])
            steps.append({"event": event_dict(event), "state": state_dict(state)})
        doc = {
            "description": description,
            "initial": state_dict(PlayerState.playing(0)),
            "steps": steps,
        }
        path = OUT / f"event_log_{index}.json"
        path.write_text(json.dumps(doc, indent=1, ensure_ascii=False) + "\n",
                        encoding="utf-8")
        print(f"wrote {path} ({len(steps)} steps)")


if __name__ == "__main__":
    main()
