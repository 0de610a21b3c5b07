"""Exception types shared across the build pipeline."""

from __future__ import annotations


class LectureMapError(Exception):
    """Base class for all engine errors."""


# --- ingest ---------------------------------------------------------------

class EmptyFile(LectureMapError):
    """Subtitle input yielded no parseable cues."""


class UnknownFormat(LectureMapError):
    """Subtitle format could not be determined or is unsupported."""


class MalformedTimestamp(LectureMapError):
    """A cue timestamp did not match the format grammar.

    Carries the 1-based line number of the offending timestamp line.
    """

    def __init__(self, line_no: int, detail: str):
        super().__init__(f"line {line_no}: {detail}")
        self.line_no = line_no
        self.detail = detail


class NoFrames(LectureMapError):
    """Frame directory contained no usable frames."""


class CorruptImage(LectureMapError):
    """An image file could not be decoded."""


class SchemaViolation(LectureMapError):
    """Annotation or manifest document violated its schema.

    ``path`` is a ``/``-joined locator of the offending field.
    """

    def __init__(self, path: str, detail: str):
        super().__init__(f"{path}: {detail}")
        self.path = path
        self.detail = detail


# --- slideseg -------------------------------------------------------------

class LengthMismatch(LectureMapError):
    """Histograms of different lengths were compared."""


class NotNormalized(LectureMapError):
    """A histogram does not sum to 1 within tolerance."""


class NonSquareDistance(LectureMapError):
    """Ground-distance matrix is not square or does not match the bins."""


class TooFewFrames(LectureMapError):
    """Boundary detection needs at least two frames."""


# --- concepts / structure -------------------------------------------------

class EmptyInput(LectureMapError):
    """An operation received an empty token stream."""


class EmptyCorpus(LectureMapError):
    """Topic model received no documents."""


# --- clients ----------------------------------------------------------------

class ClientUnreachable(LectureMapError):
    """An external detector/LLM endpoint could not be reached."""


class InvalidResponse(LectureMapError):
    """An external client answered with an undecodable payload."""


class AllRetriesMalformed(LectureMapError):
    """Every retry for one request chunk produced malformed output."""


# --- manifest ---------------------------------------------------------------

class DanglingReference(LectureMapError):
    """A manifest cross-reference does not resolve."""


class SchemaVersionMismatch(LectureMapError):
    """Manifest schema version is outside the supported set."""


class OutOfRange(LectureMapError):
    """A value fell outside its documented domain."""


class BuildError(LectureMapError):
    """A pipeline stage failed fatally.  Names the stage."""

    def __init__(self, stage: str, detail: str):
        super().__init__(f"stage '{stage}': {detail}")
        self.stage = stage
        self.detail = detail
