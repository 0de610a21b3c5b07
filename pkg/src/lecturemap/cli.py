"""Command line interface: build, validate, inspect, serve."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .config import load_config
from .errors import BuildError, LectureMapError
from .manifest import load_manifest, validate_manifest
from .pipeline import build_course
from .server import serve


def _cmd_build(args) -> int:
    try:
        cfg = load_config(args.config)
        result = build_course(cfg)
    except BuildError as exc:
        print(f"build failed in stage '{exc.stage}': {exc.detail}", file=sys.stderr)
        print(json.dumps({"failed_stage": exc.stage, "error": exc.detail}),
              file=sys.stderr)
        return 1
    except LectureMapError as exc:
        print(f"build failed: {exc}", file=sys.stderr)
        return 1
    print(f"built {result.manifest_path}")
    for stage in result.report["stages"]:
        flags = f" ({len(stage['warnings'])} warnings)" if stage["warnings"] else ""
        print(f"  {stage['name']:<10} {stage['duration_ms']:8.1f} ms{flags}")
    return 0


def _cmd_validate(args) -> int:
    data = Path(args.manifest).read_bytes()
    report = validate_manifest(data)
    if report.ok:
        print("manifest valid")
        return 0
    for violation in report.violations:
        print(f"{violation.path}: {violation.message}")
    return 1


def _cmd_inspect(args) -> int:
    try:
        doc = load_manifest(Path(args.manifest).read_bytes())
    except LectureMapError as exc:
        print(f"cannot inspect: {exc}", file=sys.stderr)
        return 1
    if args.concept:
        concept = next((c for c in doc["concepts"] if c["id"] == args.concept
                        or c["label"] == args.concept), None)
        if concept is None:
            print(f"no concept {args.concept!r}", file=sys.stderr)
            return 1
        related = [r for r in doc["relationships"]
                   if args.concept in (r["src"], r["dst"])]
        print(json.dumps({"concept": concept, "relationships": related},
                         indent=2, ensure_ascii=False))
        return 0
    summary = {
        "course_id": doc["course_id"],
        "duration_ms": doc["duration_ms"],
        "segments": len(doc["segments"]),
        "elements": len(doc["elements"]),
        "concepts": [{"id": c["id"], "label": c["label"],
                      "importance": c["importance"]}
                     for c in doc["concepts"]],
        "relationships": len(doc["relationships"]),
        "time_nodes": len(doc["tracks"]["time_nodes"]),
    }
    print(json.dumps(summary, indent=2, ensure_ascii=False))
    return 0


def _cmd_serve(args) -> int:
    serve(args.root, args.bind)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lecturemap",
        description="Build and serve concept-augmentation manifests for "
                    "lecture videos.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_build = sub.add_parser("build", help="run the full pipeline")
    p_build.add_argument("--config", required=True, help="build config file")
    p_build.set_defaults(fn=_cmd_build)

    p_validate = sub.add_parser("validate", help="validate a manifest file")
    p_validate.add_argument("manifest")
    p_validate.set_defaults(fn=_cmd_validate)

    p_inspect = sub.add_parser("inspect", help="summarize a manifest")
    p_inspect.add_argument("manifest")
    p_inspect.add_argument("--concept", help="concept id or label to detail")
    p_inspect.set_defaults(fn=_cmd_inspect)

    p_serve = sub.add_parser("serve", help="serve built courses over HTTP")
    p_serve.add_argument("--root", required=True, help="directory of built courses")
    p_serve.add_argument("--bind", default="127.0.0.1:8437",
                         help="host:port to bind (default %(default)s)")
    p_serve.set_defaults(fn=_cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
