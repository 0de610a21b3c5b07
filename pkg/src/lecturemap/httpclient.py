"""Minimal JSON-over-HTTP POST helper for the detector and LLM clients."""

from __future__ import annotations

import json
import urllib.error
import urllib.request

from .errors import ClientUnreachable, InvalidResponse


def post_json(url: str, payload: dict, timeout_s: float = 10.0) -> dict:
    body = json.dumps(payload).encode("utf-8")
    request = urllib.request.Request(
        url, data=body, headers={"Content-Type": "application/json"},
        method="POST")
    try:
        with urllib.request.urlopen(request, timeout=timeout_s) as response:
            raw = response.read()
    except (urllib.error.URLError, OSError) as exc:
        raise ClientUnreachable(f"{url}: {exc}") from exc
    try:
        decoded = json.loads(raw.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise InvalidResponse(f"{url}: undecodable response: {exc}") from exc
    if not isinstance(decoded, dict):
        raise InvalidResponse(f"{url}: expected a JSON object")
    return decoded
