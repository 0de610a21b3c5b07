"""Read-only HTTP service for built courses.

Endpoints:

    GET /healthz                        -> 200 "ok"
    GET /courses                        -> JSON list of course ids
    GET /courses/{id}/manifest          -> manifest bytes (ETag = sha256)
    GET /courses/{id}/transcript        -> transcript in its source format
    GET /courses/{id}/assets/{path}     -> keyframes and media

Serving is static: manifests are immutable after build, so the strong
validator is simply the content hash.  Any path containing traversal tokens
is rejected with 400 before touching the filesystem.
"""

from __future__ import annotations

import json
import logging
import mimetypes
import threading
import urllib.parse
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

from .manifest import manifest_hash

log = logging.getLogger(__name__)

_TRANSCRIPT_TYPES = {".srt": "application/x-subrip", ".vtt": "text/vtt"}


def list_courses(root: Path) -> list[str]:
    return sorted(p.name for p in root.iterdir()
                  if p.is_dir() and (p / "manifest.json").is_file())


def is_traversal_attempt(raw_path: str) -> bool:
    """Reject parent references, absolute components, and escapes hidden in
    percent-encoding or backslashes, before any filesystem access."""
    decoded = urllib.parse.unquote(raw_path)
    if "\x00" in decoded or "\\" in decoded:
        return True
    parts = decoded.split("/")
    return any(part in ("..", ".") for part in parts)


class CourseRequestHandler(BaseHTTPRequestHandler):
    server_version = "lecturemap"
    root: Path  # set by make_server

    def log_message(self, fmt, *args):  # route into logging, not stderr
        log.info("%s %s", self.address_string(), fmt % args)

    def do_GET(self):  # noqa: N802 (http.server naming)
        try:
            self._route()
        except BrokenPipeError:
            pass

    def do_HEAD(self):  # noqa: N802
        self._head_only = True
        self.do_GET()

    def _route(self):
        raw_path = self.path.split("?", 1)[0]
        if raw_path == "/healthz":
            self._send(200, b"ok", "text/plain; charset=utf-8")
            return
        if is_traversal_attempt(raw_path):
            log.warning("traversal attempt rejected: %r", self.path)
            self._send(400, b"bad path", "text/plain; charset=utf-8")
            return
        parts = [p for p in urllib.parse.unquote(raw_path).split("/") if p]
        if parts == ["courses"]:
            body = json.dumps(list_courses(self.root)).encode("utf-8")
            self._send(200, body, "application/json")
            return
        if len(parts) >= 3 and parts[0] == "courses":
            course_dir = self.root / parts[1]
            if not (course_dir / "manifest.json").is_file():
                self._send(404, b"unknown course", "text/plain; charset=utf-8")
                return
            if parts[2] == "manifest" and len(parts) == 3:
                self._send_manifest(course_dir)
                return
            if parts[2] == "transcript" and len(parts) == 3:
                self._send_transcript(course_dir)
                return
            if parts[2] == "assets" and len(parts) > 3:
                self._send_asset(course_dir, parts[3:])
                return
        self._send(404, b"not found", "text/plain; charset=utf-8")

    def _send_manifest(self, course_dir: Path):
        data = (course_dir / "manifest.json").read_bytes()
        self._send(200, data, "application/json",
                   etag=f'"{manifest_hash(data)}"')

    def _send_transcript(self, course_dir: Path):
        for suffix, content_type in _TRANSCRIPT_TYPES.items():
            path = course_dir / f"transcript{suffix}"
            if path.is_file():
                self._send(200, path.read_bytes(),
                           f"{content_type}; charset=utf-8")
                return
        self._send(404, b"no transcript", "text/plain; charset=utf-8")

    def _send_asset(self, course_dir: Path, segments: list[str]):
        path = course_dir / "assets"
        for segment in segments:
            path = path / segment
        if not path.is_file():
            self._send(404, b"no such asset", "text/plain; charset=utf-8")
            return
        content_type = mimetypes.guess_type(path.name)[0] or "application/octet-stream"
        self._send(200, path.read_bytes(), content_type)

    def _send(self, status: int, body: bytes, content_type: str,
              etag: str | None = None):
        self.send_response(status)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(body)))
        self.send_header("Access-Control-Allow-Origin", "*")
        if etag:
            self.send_header("ETag", etag)
        self.end_headers()
        if not getattr(self, "_head_only", False):
            self.wfile.write(body)


def make_server(root: str | Path, bind_addr: str = "127.0.0.1:8437"
                ) -> ThreadingHTTPServer:
    host, _, port = bind_addr.rpartition(":")
    handler = type("BoundHandler", (CourseRequestHandler,),
                   {"root": Path(root).resolve()})
    return ThreadingHTTPServer((host or "127.0.0.1", int(port)), handler)


def serve(root: str | Path, bind_addr: str = "127.0.0.1:8437") -> None:
    server = make_server(root, bind_addr)
    log.info("serving %s on %s", root, bind_addr)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        server.shutdown()


def serve_in_thread(root: str | Path, bind_addr: str = "127.0.0.1:0"
                    ) -> tuple[ThreadingHTTPServer, str]:
    """Start the service on a background thread; returns (server, base_url)."""
    server = make_server(root, bind_addr)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    host, port = server.server_address[:2]
    return server, f"http://{host}:{port}"
