"""SRT and WebVTT subtitle parsing.

Both grammars are parsed timestamp-exact: SRT requires ``HH:MM:SS,mmm`` with
a comma and exactly three millisecond digits, WebVTT requires a dot and
allows the short ``MM:SS.mmm`` form.  Cues with malformed timing lines are
rejected individually and reported as warnings carrying the line number;
overlapping cues are resolved by truncating the earlier cue so the cue list
stays a partition of disjoint intervals.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from ..errors import EmptyFile, UnknownFormat

_SRT_TS = re.compile(r"^(\d{2,}):([0-5]\d):([0-5]\d),(\d{3})$")
_VTT_TS = re.compile(r"^(?:(\d{2,}):)?([0-5]\d):([0-5]\d)\.(\d{3})$")
_ARROW = "-->"
_TOKEN = re.compile(r"\w+", re.UNICODE)


@dataclass(frozen=True)
class TokenSpan:
    token: str
    start: int
    end: int


@dataclass(frozen=True)
class Cue:
    start_ms: int
    end_ms: int
    text: str
    token_spans: tuple[TokenSpan, ...] = ()


@dataclass(frozen=True)
class ParseWarning:
    line_no: int
    reason: str


@dataclass(frozen=True)
class Transcript:
    cues: tuple[Cue, ...]
    source_format: str
    warnings: tuple[ParseWarning, ...] = ()

    @property
    def duration_ms(self) -> int:
        return self.cues[-1].end_ms if self.cues else 0


def tokenize(text: str) -> tuple[TokenSpan, ...]:
    return tuple(TokenSpan(m.group(0), m.start(), m.end())
                 for m in _TOKEN.finditer(text))


def _strip_bom(data: bytes) -> bytes:
    return data[3:] if data.startswith(b"\xef\xbb\xbf") else data


def detect_format(data: bytes) -> str:
    """Best-effort sniffing used by the CLI when no extension is available."""
    head = _strip_bom(data)[:512].decode("utf-8", errors="replace")
    if head.lstrip().startswith("WEBVTT"):
        return "webvtt"
    for line in head.splitlines():
        if _ARROW in line and "," in line:
            return "srt"
    raise UnknownFormat("neither a WEBVTT header nor an SRT timing line found")


def _parse_ts(token: str, pattern: re.Pattern) -> int | None:
    m = pattern.match(token)
    if not m:
        return None
    h, mi, s, ms = m.groups()
    hours = int(h) if h is not None else 0
    return ((hours * 60 + int(mi)) * 60 + int(s)) * 1000 + int(ms)


def _parse_timing(line: str, pattern: re.Pattern) -> tuple[int, int] | None:
    if _ARROW not in line:
        return None
    left, _, right = line.partition(_ARROW)
    # WebVTT permits cue settings after the end timestamp
    right = right.strip().split(" ", 1)[0].split("\t", 1)[0]
    start = _parse_ts(left.strip(), pattern)
    end = _parse_ts(right, pattern)
    if start is None or end is None:
        return None
    return start, end


def _blocks(lines: list[str]) -> list[tuple[int, list[str]]]:
    """Split into blank-line-separated blocks, keeping 1-based line offsets."""
    blocks: list[tuple[int, list[str]]] = []
    current: list[str] = []
    start = 1
    for idx, line in enumerate(lines, start=1):
        if line.strip() == "":
            if current:
                blocks.append((start, current))
                current = []
        else:
            if not current:
                start = idx
            current.append(line)
    if current:
        blocks.append((start, current))
    return blocks


def parse_subtitles(data: bytes, fmt: str) -> Transcript:
    """Parse subtitle bytes in the given format ("srt" or "webvtt")."""
    if fmt not in ("srt", "webvtt"):
        raise UnknownFormat(f"unsupported subtitle format: {fmt!r}")
    text = _strip_bom(data).decode("utf-8", errors="replace")
    lines = text.splitlines()
    warnings: list[ParseWarning] = []
    pattern = _SRT_TS if fmt == "srt" else _VTT_TS

    blocks = _blocks(lines)
    if fmt == "webvtt":
        if not blocks or not blocks[0][1][0].startswith("WEBVTT"):
            raise UnknownFormat("missing WEBVTT header")
        header = blocks[0]
        if len(header[1]) == 1 and not any(_ARROW in ln for ln in header[1]):
            blocks = blocks[1:]
        else:
            # header block glued to the first cue: drop only the header lines
            body = header[1]
            cut = next((i for i, ln in enumerate(body) if _ARROW in ln), None)
            if cut is None or cut == 0:
                blocks = blocks[1:]
            else:
                blocks = [(header[0] + cut - 1, body[cut - 1:])] + blocks[1:]

    cues: list[Cue] = []
    for block_start, block in blocks:
        first = block[0].strip()
        if fmt == "webvtt" and first.split(" ")[0] in ("NOTE", "STYLE", "REGION"):
            continue
        timing_idx = next((i for i, ln in enumerate(block) if _ARROW in ln), None)
        if timing_idx is None:
            warnings.append(ParseWarning(block_start, "no timing line in block"))
            continue
        timing_line_no = block_start + timing_idx
        timing = _parse_timing(block[timing_idx], pattern)
        if timing is None:
            warnings.append(ParseWarning(
                timing_line_no, f"malformed timestamp: {block[timing_idx].strip()!r}"))
            continue
        start_ms, end_ms = timing
        if start_ms >= end_ms:
            warnings.append(ParseWarning(
                timing_line_no, f"cue start {start_ms} >= end {end_ms}"))
            continue
        body = "\n".join(block[timing_idx + 1:]).strip()
        if not body:
            warnings.append(ParseWarning(timing_line_no, "empty cue text"))
            continue
        cues.append(Cue(start_ms, end_ms, body, tokenize(body)))

    cues.sort(key=lambda c: (c.start_ms, c.end_ms))
    cues, overlap_warnings = _resolve_overlaps(cues)
    warnings.extend(overlap_warnings)

    if not cues:
        raise EmptyFile("no cues parseable")
    return Transcript(tuple(cues), fmt, tuple(warnings))


def _resolve_overlaps(cues: list[Cue]) -> tuple[list[Cue], list[ParseWarning]]:
    out: list[Cue] = []
    warnings: list[ParseWarning] = []
    for i, cue in enumerate(cues):
        if i + 1 < len(cues) and cue.end_ms > cues[i + 1].start_ms:
            new_end = cues[i + 1].start_ms
            if new_end <= cue.start_ms:
                warnings.append(ParseWarning(
                    0, f"cue at {cue.start_ms}ms fully overlapped, dropped"))
                continue
            cue = Cue(cue.start_ms, new_end, cue.text, cue.token_spans)
        out.append(cue)
    return out, warnings


def _fmt_ts(ms: int, sep: str) -> str:
    h, rem = divmod(ms, 3600_000)
    m, rem = divmod(rem, 60_000)
    s, milli = divmod(rem, 1000)
    return f"{h:02d}:{m:02d}:{s:02d}{sep}{milli:03d}"


def to_srt(transcript: Transcript) -> str:
    parts = []
    for i, cue in enumerate(transcript.cues, start=1):
        parts.append(
            f"{i}\n{_fmt_ts(cue.start_ms, ',')} --> {_fmt_ts(cue.end_ms, ',')}\n{cue.text}\n")
    return "\n".join(parts)


def to_webvtt(transcript: Transcript) -> str:
    parts = ["WEBVTT\n"]
    for cue in transcript.cues:
        parts.append(
            f"{_fmt_ts(cue.start_ms, '.')} --> {_fmt_ts(cue.end_ms, '.')}\n{cue.text}\n")
    return "\n".join(parts)
