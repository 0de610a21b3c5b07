"""Parsing of subtitle files, frame series, and element annotations."""

from .annotations import (AnnotationEntry, AnnotationSet, BBox,
                          load_annotations, parse_annotations)
from .frames import (Frame, FrameSeries, IngestWarning, edge_density,
                     grayscale_histogram, load_frames, read_histogram_cache,
                     write_histogram_cache)
from .subtitles import (Cue, ParseWarning, TokenSpan, Transcript,
                        detect_format, parse_subtitles, to_srt, to_webvtt,
                        tokenize)

__all__ = [
    "AnnotationEntry", "AnnotationSet", "BBox", "load_annotations",
    "parse_annotations", "Frame", "FrameSeries", "IngestWarning",
    "edge_density", "grayscale_histogram", "load_frames",
    "read_histogram_cache", "write_histogram_cache", "Cue", "ParseWarning",
    "TokenSpan", "Transcript", "detect_format", "parse_subtitles", "to_srt",
    "to_webvtt", "tokenize",
]
